#pragma once

#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include "seqbh/monte_carlo.hpp"

namespace seqbh {

namespace detail {

inline std::string fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), format, v);
  return buf;
}

// Shortest decimal that round-trips, for machine-readable output.
inline std::string fmt_exact(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  double back = 0.0;
  std::sscanf(buf, "%lf", &back);
  if (back == v) {
    for (int prec = 1; prec <= 16; ++prec) {
      char shorter[64];
      std::snprintf(shorter, sizeof(shorter), "%.*g", prec, v);
      std::sscanf(shorter, "%lf", &back);
      if (back == v) return shorter;
    }
  }
  return buf;
}

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

// Estimate with its standard error in parentheses, table style.
inline std::string with_se(double value, double se, const char* format) {
  return fmt(format, value) + " (" + fmt(format, se) + ")";
}

}  // namespace detail

// Machine-readable report: one row per procedure (the sequential procedure,
// then the fixed-sample baseline when one was run).
inline void emit_csv(std::ostream& os, const std::vector<McReport>& rows) {
  os << "scenario,procedure,streams,k0,k1,replications,fdr,fdr_se,fdr_bound,"
        "fnr,fnr_se,fnr_bound,en,en_se,delta,savings_pct,cap_hits,note\n";
  for (const auto& r : rows) {
    const std::string shared = detail::csv_escape(r.name) + ",";
    os << shared << "SBH," << r.streams << ',' << r.k0 << ',' << r.k1 << ',' << r.replications
       << ',' << detail::fmt_exact(r.fdr_hat) << ',' << detail::fmt_exact(r.fdr_se) << ','
       << detail::fmt_exact(r.bound_fdr) << ',' << detail::fmt_exact(r.fnr_hat) << ','
       << detail::fmt_exact(r.fnr_se) << ',' << detail::fmt_exact(r.bound_fnr) << ','
       << detail::fmt_exact(r.en_hat) << ',' << detail::fmt_exact(r.en_se) << ','
       << detail::fmt_exact(r.delta) << ','
       << (r.has_fbh ? detail::fmt_exact(r.savings_vs_fbh) : std::string()) << ',' << r.cap_hits
       << ',' << detail::csv_escape(r.note) << '\n';
    if (r.has_fbh) {
      os << shared << "FBH," << r.streams << ',' << r.k0 << ',' << r.k1 << ',' << r.replications
         << ',' << detail::fmt_exact(r.fbh_fdr) << ',' << detail::fmt_exact(r.fbh_fdr_se) << ','
         << detail::fmt_exact(r.bound_fdr) << ',' << detail::fmt_exact(r.fbh_fnr) << ','
         << detail::fmt_exact(r.fbh_fnr_se) << ',' << detail::fmt_exact(r.bound_fnr) << ','
         << detail::fmt_exact(r.fbh_en) << ",0," << detail::fmt_exact(r.delta) << ",,0,"
         << detail::csv_escape("fixed n=" + std::to_string(r.fbh_n)) << '\n';
    }
  }
}

// Human-readable report in the style of the published operating tables.
inline void emit_markdown(std::ostream& os, const std::vector<McReport>& rows) {
  os << "| Scenario | Procedure | FDR (SE) | K0*a/K | FNR (SE) | K1*b/K | EN (SE) | Savings |\n";
  os << "|---|---|---|---|---|---|---|---|\n";
  for (const auto& r : rows) {
    os << "| " << r.name << " | SBH | " << detail::with_se(r.fdr_hat, r.fdr_se, "%.4f") << " | "
       << detail::fmt("%.4f", r.bound_fdr) << " | " << detail::with_se(r.fnr_hat, r.fnr_se, "%.4f")
       << " | " << detail::fmt("%.4f", r.bound_fnr) << " | "
       << detail::with_se(r.en_hat, r.en_se, "%.1f") << " | "
       << (r.has_fbh ? detail::fmt("%.1f", r.savings_vs_fbh) + "%" : std::string("-")) << " |\n";
    if (r.has_fbh) {
      os << "| " << r.name << " | FBH | " << detail::with_se(r.fbh_fdr, r.fbh_fdr_se, "%.4f")
         << " | " << detail::fmt("%.4f", r.bound_fdr) << " | "
         << detail::with_se(r.fbh_fnr, r.fbh_fnr_se, "%.4f") << " | "
         << detail::fmt("%.4f", r.bound_fnr) << " | " << detail::fmt("%.1f", r.fbh_en)
         << " (0.0) | - |\n";
    }
  }
}

}  // namespace seqbh
