#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <tuple>
#include <utility>
#include <variant>
#include <vector>

#include "seqbh/exp_family.hpp"
#include "seqbh/fixed_sample.hpp"
#include "seqbh/ladder.hpp"
#include "seqbh/procedure.hpp"
#include "seqbh/rng.hpp"
#include "seqbh/standardizer.hpp"
#include "seqbh/stream_model.hpp"

namespace seqbh {

// Harmonic sum 1 + 1/2 + ... + 1/K, the inflation factor of the
// arbitrary-dependence error bounds.
inline double delta_factor(int k) {
  if (k < 1) throw std::invalid_argument("delta_factor: K must be >= 1");
  long double sum = 0.0L;
  for (int i = 1; i <= k; ++i) sum += 1.0L / i;
  return static_cast<double>(sum);
}

struct ExperimentConfig {
  std::string name = "scenario";
  StreamModelSpec model;
  double alpha = 0.05;
  double beta = 0.2;
  std::optional<double> rho;  // unset: 0 for Bernoulli models, 0.583 for normal
  long long replications = 10000;
  std::uint64_t seed = 1;
  long long schedule_step = 1;
  Variant variant = Variant::full;
  std::optional<long long> truncation;  // rejective variant only
  std::optional<long long> fbh_n;       // per-stream fixed sample size of the baseline
  long long cap = 100000;               // per-stream observation budget
  int threads = 0;                      // 0: hardware concurrency
  std::string note;

  double resolved_rho() const {
    if (rho) return *rho;
    return model.is_bernoulli() ? kDiscreteRho : kContinuousRho;
  }

  void validate() const {
    model.validate();
    if (replications < 1)
      throw std::invalid_argument("ExperimentConfig: replications must be >= 1");
    if (schedule_step < 1)
      throw std::invalid_argument("ExperimentConfig: schedule_step must be >= 1");
    if (cap < 1) throw std::invalid_argument("ExperimentConfig: cap must be >= 1");
    if (threads < 0) throw std::invalid_argument("ExperimentConfig: threads must be >= 0");
    if (variant == Variant::rejective) {
      if (!truncation) throw std::invalid_argument("ExperimentConfig: rejective variant needs a truncation point");
      if (*truncation < 1) throw std::invalid_argument("ExperimentConfig: truncation must be >= 1");
    }
    if (fbh_n && *fbh_n < 1)
      throw std::invalid_argument("ExperimentConfig: fbh_n must be >= 1");
    WaldConfig wald{alpha, beta, model.streams(), resolved_rho()};
    wald.validate();
  }
};

struct McReport {
  std::string name;
  std::string note;
  int streams = 0;
  int k0 = 0;  // true nulls
  int k1 = 0;  // false nulls
  long long replications = 0;
  double fdr_hat = 0.0, fdr_se = 0.0;
  double fnr_hat = 0.0, fnr_se = 0.0;
  double en_hat = 0.0, en_se = 0.0;  // expected total sample size E sum_k N^(k)
  double bound_fdr = 0.0;            // K0 * alpha / K
  double bound_fnr = 0.0;            // K1 * beta / K
  double delta = 0.0;                // harmonic factor for the dependent bounds
  long long cap_hits = 0;
  bool has_fbh = false;
  long long fbh_n = 0;
  double fbh_fdr = 0.0, fbh_fdr_se = 0.0;
  double fbh_fnr = 0.0, fbh_fnr_se = 0.0;
  double fbh_en = 0.0;
  double savings_vs_fbh = 0.0;  // percent reduction of EN against the baseline
};

namespace detail {

// Per-observation log-likelihood-ratio increment for one stream.
struct IncrementRule {
  bool bernoulli = true;
  double inc_one = 0.0;   // Bernoulli: increment for x = 1
  double inc_zero = 0.0;  // Bernoulli: increment for x = 0
  double delta = 1.0;     // normal: alternative offset
  double theta0 = 0.0;    // normal: null mean

  double operator()(double x) const {
    if (bernoulli) return x > 0.5 ? inc_one : inc_zero;
    return delta * (x - theta0) - 0.5 * delta * delta;
  }
};

// One replication's shared row source: all streams advance through the same
// K-dimensional time steps. A full row is drawn per time index whether or
// not every stream is still active, so the draw sequence is independent of
// the decision pattern.
struct ReplicationRows {
  ReplicationRows(const StreamModelSpec& spec, std::mt19937_64 engine)
      : gen(spec), rng(std::move(engine)) {}

  StreamGenerator gen;
  std::mt19937_64 rng;
  long long n = 0;
  std::vector<double> row;

  void advance_to(long long target) {
    while (n < target) {
      row = gen.step(rng);
      ++n;
    }
  }
};

// Supplier feeding run_procedure: stream k's cumulative LLR after each new
// observation. Active streams are polled in lock step, so the shared row is
// generated exactly once per time index.
struct LlrSupplier {
  std::shared_ptr<ReplicationRows> rows;
  int stream = 0;
  IncrementRule rule;
  long long my_n = 0;
  double llr = 0.0;

  std::optional<double> operator()() {
    ++my_n;
    rows->advance_to(my_n);
    if (rows->n != my_n)
      throw std::logic_error("monte carlo supplier polled out of lock step");
    llr += rule(rows->row[stream]);
    return llr;
  }
};

struct RepOutcome {
  double fdp = 0.0;
  double fnp = 0.0;
  long long total_n = 0;
  bool cap_hit = false;
  double fbh_fdp = 0.0;
  double fbh_fnp = 0.0;
};

struct ErrorCounts {
  long long v = 0;  // true nulls rejected
  long long r = 0;  // rejections
  long long u = 0;  // false nulls accepted
  long long s = 0;  // acceptances
};

inline std::vector<IncrementRule> increment_rules(const StreamModelSpec& spec) {
  std::vector<IncrementRule> rules(spec.streams());
  if (const auto* b = std::get_if<BernoulliBatterySpec>(&spec.model)) {
    IncrementRule r;
    r.bernoulli = true;
    r.inc_one = std::log(b->p1 / b->p0);
    r.inc_zero = std::log((1.0 - b->p1) / (1.0 - b->p0));
    for (auto& rule : rules) rule = r;
  } else {
    const auto& nrm = std::get<CorrelatedNormalSpec>(spec.model);
    IncrementRule r;
    r.bernoulli = false;
    r.delta = nrm.delta;
    r.theta0 = nrm.theta0;
    for (auto& rule : rules) rule = r;
  }
  return rules;
}

}  // namespace detail

// Estimates FDR, FNR and expected total sample size of the configured
// procedure by plain Monte Carlo, replication-parallel and bit-reproducible:
// every replication draws from its own (seed, replication)-derived generator
// and results are reduced in replication order, so thread count cannot
// change the report.
inline McReport run_monte_carlo(const ExperimentConfig& cfg) {
  cfg.validate();
  const int k_total = cfg.model.streams();
  const std::vector<bool> truth = cfg.model.truth_null();
  const WaldConfig wald{cfg.alpha, cfg.beta, k_total, cfg.resolved_rho()};
  std::vector<Standardizer> phi;
  if (cfg.variant == Variant::full)
    phi.assign(k_total, build_full_standardizer(sbh_wald_ladder(wald)));
  else
    phi.assign(k_total, build_rejective_standardizer(rejective_llr_ladder(wald)));
  const Schedule schedule = Schedule::every(cfg.schedule_step);
  const RunControl control{cfg.cap, /*force_accept_on_cap=*/true};
  const std::vector<detail::IncrementRule> rules = detail::increment_rules(cfg.model);

  const long long reps = cfg.replications;
  std::vector<detail::RepOutcome> outcomes(reps);

  auto run_one = [&](long long rep) {
    detail::RepOutcome out;
    auto rows = std::make_shared<detail::ReplicationRows>(cfg.model, make_rng(cfg.seed, rep, 0));
    std::vector<detail::LlrSupplier> suppliers;
    suppliers.reserve(k_total);
    for (int k = 0; k < k_total; ++k) suppliers.push_back({rows, k, rules[k], 0, 0.0});
    const RunResult rr =
        run_procedure(suppliers, phi, cfg.variant, cfg.truncation, schedule, control);
    detail::ErrorCounts c;
    for (const auto& d : rr.decisions) {
      if (d.verdict == Verdict::reject) {
        ++c.r;
        if (truth[d.stream]) ++c.v;
      } else {
        ++c.s;
        if (!truth[d.stream]) ++c.u;
      }
    }
    out.fdp = static_cast<double>(c.v) / static_cast<double>(std::max<long long>(c.r, 1));
    out.fnp = static_cast<double>(c.u) / static_cast<double>(std::max<long long>(c.s, 1));
    out.total_n = rr.total_n;
    out.cap_hit = rr.cap_hit;

    if (cfg.fbh_n) {
      const long long fn = *cfg.fbh_n;
      auto rng = make_rng(cfg.seed, rep, 1);
      StreamGenerator gen(cfg.model);
      std::vector<double> sums(k_total, 0.0);
      for (long long t = 0; t < fn; ++t) {
        const auto row = gen.step(rng);
        for (int k = 0; k < k_total; ++k) sums[k] += row[k];
      }
      std::vector<double> pvals(k_total);
      if (const auto* b = std::get_if<BernoulliBatterySpec>(&cfg.model.model)) {
        for (int k = 0; k < k_total; ++k)
          pvals[k] = binomial_tail_pvalue(fn, static_cast<long long>(sums[k] + 0.5), b->p0);
      } else {
        const auto& nrm = std::get<CorrelatedNormalSpec>(cfg.model.model);
        for (int k = 0; k < k_total; ++k)
          pvals[k] = normal_tail_pvalue(fn, sums[k] / static_cast<double>(fn), nrm.theta0);
      }
      const std::vector<int> rejected = fixed_sample_bh(pvals, cfg.alpha);
      detail::ErrorCounts fc;
      std::vector<bool> rej(k_total, false);
      for (int k : rejected) rej[k] = true;
      for (int k = 0; k < k_total; ++k) {
        if (rej[k]) {
          ++fc.r;
          if (truth[k]) ++fc.v;
        } else {
          ++fc.s;
          if (!truth[k]) ++fc.u;
        }
      }
      out.fbh_fdp = static_cast<double>(fc.v) / static_cast<double>(std::max<long long>(fc.r, 1));
      out.fbh_fnp = static_cast<double>(fc.u) / static_cast<double>(std::max<long long>(fc.s, 1));
    }
    outcomes[rep] = out;
  };

  unsigned hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 1;
  long long nthreads = cfg.threads > 0 ? cfg.threads : static_cast<long long>(hw);
  nthreads = std::max<long long>(1, std::min(nthreads, reps));
  if (nthreads == 1) {
    for (long long rep = 0; rep < reps; ++rep) run_one(rep);
  } else {
    std::atomic<long long> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(nthreads);
    for (long long t = 0; t < nthreads; ++t) {
      pool.emplace_back([&] {
        while (true) {
          const long long rep = next.fetch_add(1);
          if (rep >= reps) return;
          try {
            run_one(rep);
          } catch (...) {
            std::lock_guard<std::mutex> lock(error_mutex);
            if (!first_error) first_error = std::current_exception();
            return;
          }
        }
      });
    }
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
  }

  McReport rep;
  rep.name = cfg.name;
  rep.note = cfg.note;
  rep.streams = k_total;
  for (bool t : truth) (t ? rep.k0 : rep.k1) += 1;
  rep.replications = reps;
  rep.bound_fdr = rep.k0 * cfg.alpha / k_total;
  rep.bound_fnr = rep.k1 * cfg.beta / k_total;
  rep.delta = delta_factor(k_total);

  auto mean_se = [reps](auto&& value_of) {
    long double mean = 0.0L;
    for (long long i = 0; i < reps; ++i) mean += value_of(i);
    mean /= reps;
    long double ss = 0.0L;
    for (long long i = 0; i < reps; ++i) {
      const long double d = value_of(i) - mean;
      ss += d * d;
    }
    const long double sd = reps > 1 ? std::sqrt(ss / (reps - 1)) : 0.0L;
    return std::pair<double, double>(static_cast<double>(mean),
                                     static_cast<double>(sd / std::sqrt(static_cast<long double>(reps))));
  };

  std::tie(rep.fdr_hat, rep.fdr_se) = mean_se([&](long long i) { return outcomes[i].fdp; });
  std::tie(rep.fnr_hat, rep.fnr_se) = mean_se([&](long long i) { return outcomes[i].fnp; });
  std::tie(rep.en_hat, rep.en_se) =
      mean_se([&](long long i) { return static_cast<double>(outcomes[i].total_n); });
  for (const auto& o : outcomes) rep.cap_hits += o.cap_hit ? 1 : 0;

  if (cfg.fbh_n) {
    rep.has_fbh = true;
    rep.fbh_n = *cfg.fbh_n;
    std::tie(rep.fbh_fdr, rep.fbh_fdr_se) = mean_se([&](long long i) { return outcomes[i].fbh_fdp; });
    std::tie(rep.fbh_fnr, rep.fbh_fnr_se) = mean_se([&](long long i) { return outcomes[i].fbh_fnp; });
    rep.fbh_en = static_cast<double>(k_total) * static_cast<double>(*cfg.fbh_n);
    rep.savings_vs_fbh = 100.0 * (1.0 - rep.en_hat / rep.fbh_en);
  }
  return rep;
}

}  // namespace seqbh
