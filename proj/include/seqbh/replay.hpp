#pragma once

#include <cctype>
#include <cstdlib>
#include <functional>
#include <istream>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "seqbh/exp_family.hpp"
#include "seqbh/glr.hpp"
#include "seqbh/procedure.hpp"
#include "seqbh/standardizer.hpp"

namespace seqbh {

// Raw test statistic of one stream, fed one observation vector per time step.
class SequentialStatistic {
 public:
  virtual ~SequentialStatistic() = default;
  virtual void observe(std::span<const double> x) = 0;
  virtual double value() const = 0;
  virtual long long count() const = 0;
};

// Cumulative simple-vs-simple log likelihood ratio.
class LlrStatistic {
 public:
  explicit LlrStatistic(SimpleTestSpec spec) : spec_(std::move(spec)) { spec_.validate(); }

  void observe(std::span<const double> x) {
    total_ += llr_increment(spec_, x);
    ++n_;
  }

  double value() const { return total_; }
  long long count() const { return n_; }

 private:
  SimpleTestSpec spec_;
  double total_ = 0.0;
  long long n_ = 0;
};

// Signed root of the generalized likelihood ratio pair for a composite
// one-dimensional constraint u(theta) <= u0 vs u(theta) >= u1.
class SignedRootGlrStatistic {
 public:
  explicit SignedRootGlrStatistic(GlrSpec spec)
      : spec_(std::move(spec)), acc_(spec_.model.dim) {
    spec_.validate();
  }

  void observe(std::span<const double> x) { acc_.observe(x); }

  double value() const {
    if (acc_.count() == 0) return 0.0;
    const GlrStatistics g = glr_statistics(spec_, acc_);
    const std::vector<double> mu = acc_.mean();
    const double u_hat = spec_.u_of_mean(mu);
    return signed_root(g.lambda_h, g.lambda_g, u_hat, spec_.u0);
  }

  long long count() const { return acc_.count(); }

 private:
  GlrSpec spec_;
  StatisticAccumulator acc_;
};

namespace detail {

template <class Stat>
class ErasedStatistic final : public SequentialStatistic {
 public:
  explicit ErasedStatistic(Stat inner) : inner_(std::move(inner)) {}
  void observe(std::span<const double> x) override { inner_.observe(x); }
  double value() const override { return inner_.value(); }
  long long count() const override { return inner_.count(); }

 private:
  Stat inner_;
};

}  // namespace detail

template <class Stat>
std::unique_ptr<SequentialStatistic> erase_statistic(Stat stat) {
  return std::make_unique<detail::ErasedStatistic<Stat>>(std::move(stat));
}

enum class EventKind { sample, decision, terminal, incomplete };

struct RunEvent {
  EventKind kind = EventKind::sample;
  int stage = 0;        // sample, decision
  long long n = 0;      // sample, decision
  int stream = -1;      // decision; 0-based
  Verdict verdict = Verdict::accept;  // decision
  int accepted = 0;     // terminal, incomplete: counts so far
  int rejected = 0;
};

struct RunRecord {
  std::vector<RunEvent> events;
  std::vector<Decision> decisions;
  bool complete = false;
};

// Everything needed to apply a procedure to externally supplied observations.
struct ReplayPlan {
  std::vector<std::unique_ptr<SequentialStatistic>> statistics;  // one per stream
  std::vector<Standardizer> standardizers;                       // one per stream
  Variant variant = Variant::full;
  std::optional<long long> truncation;  // rejective variant only
  Schedule schedule = Schedule::every(1);
};

namespace detail {

inline double parse_value(const std::string& token, std::size_t line_no) {
  if (token.empty())
    throw std::invalid_argument("line " + std::to_string(line_no) + ": empty value field");
  const char* begin = token.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end != begin + token.size())
    throw std::invalid_argument("line " + std::to_string(line_no) + ": bad value '" + token + "'");
  return v;
}

inline long long parse_index(const std::string& token, const char* what, std::size_t line_no) {
  if (token.empty() || token.find_first_not_of("0123456789") != std::string::npos)
    throw std::invalid_argument("line " + std::to_string(line_no) + ": bad " + std::string(what) +
                                " '" + token + "'");
  errno = 0;
  const long long v = std::strtoll(token.c_str(), nullptr, 10);
  if (errno == ERANGE)
    throw std::invalid_argument("line " + std::to_string(line_no) + ": " + std::string(what) +
                                " out of range");
  return v;
}

}  // namespace detail

// Applies the configured procedure to tab-separated observations, one line
// per stream per time index: `t<TAB>k<TAB>value[,value...]` with t and k
// 1-based. Lines may arrive in any order; time indices are processed in
// order, and every still-active stream must have a value at every index up
// to the last one supplied. Statistics absorb every observation; boundaries
// are checked at schedule points (and at the truncation point for the
// rejective variant). End of input before termination yields an
// `incomplete` event.
inline RunRecord replay_streams(std::istream& in, ReplayPlan& plan,
                                const std::function<void(const RunEvent&)>& sink = {}) {
  const int k_total = static_cast<int>(plan.statistics.size());
  if (k_total == 0) throw std::invalid_argument("replay: need at least one stream");
  if (plan.standardizers.size() != plan.statistics.size())
    throw std::invalid_argument("replay: need one standardizer per stream");
  for (int k = 0; k < k_total; ++k)
    if (!plan.statistics[k])
      throw std::invalid_argument("replay: statistic for stream " + std::to_string(k + 1) +
                                  " is null");
  if (plan.variant == Variant::rejective) {
    if (!plan.truncation) throw std::invalid_argument("replay: rejective variant needs a truncation point");
    if (*plan.truncation < 1) throw std::invalid_argument("replay: truncation must be >= 1");
  }

  // Buffer the full input keyed by time index; rows may interleave freely.
  std::map<long long, std::vector<std::optional<std::vector<double>>>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      const std::size_t tab = line.find('\t', start);
      fields.push_back(line.substr(start, tab == std::string::npos ? tab : tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    if (fields.size() != 3)
      throw std::invalid_argument("line " + std::to_string(line_no) +
                                  ": expected t<TAB>k<TAB>value[,value...], got " +
                                  std::to_string(fields.size()) + " fields");
    const long long t = detail::parse_index(fields[0], "time index", line_no);
    const long long k1 = detail::parse_index(fields[1], "stream id", line_no);
    if (t < 1)
      throw std::invalid_argument("line " + std::to_string(line_no) + ": time index must be >= 1");
    if (k1 < 1 || k1 > k_total)
      throw std::invalid_argument("line " + std::to_string(line_no) + ": stream id " +
                                  std::to_string(k1) + " outside 1.." + std::to_string(k_total));
    std::vector<double> values;
    std::size_t vstart = 0;
    const std::string& csv = fields[2];
    while (true) {
      const std::size_t comma = csv.find(',', vstart);
      values.push_back(detail::parse_value(
          csv.substr(vstart, comma == std::string::npos ? comma : comma - vstart), line_no));
      if (comma == std::string::npos) break;
      vstart = comma + 1;
    }
    auto& row = rows[t];
    if (row.empty()) row.resize(k_total);
    auto& cell = row[static_cast<std::size_t>(k1 - 1)];
    if (cell)
      throw std::invalid_argument("line " + std::to_string(line_no) +
                                  ": duplicate observation for stream " + std::to_string(k1) +
                                  " at t=" + std::to_string(t));
    cell = std::move(values);
  }

  RunRecord record;
  auto emit = [&](const RunEvent& e) {
    record.events.push_back(e);
    if (sink) sink(e);
  };

  ProcedureState state(k_total);
  const long long last_t = rows.empty() ? 0 : rows.rbegin()->first;
  long long horizon = last_t;
  if (plan.variant == Variant::rejective) horizon = std::min(horizon, *plan.truncation);
  std::optional<long long> checkpoint = plan.schedule.first();

  for (long long t = 1; t <= horizon && !state.finished(); ++t) {
    const auto it = rows.find(t);
    for (int k : state.active) {
      const std::optional<std::vector<double>>* cell = nullptr;
      if (it != rows.end()) cell = &it->second[static_cast<std::size_t>(k)];
      if (!cell || !*cell)
        throw std::invalid_argument("missing observation: stream " + std::to_string(k + 1) +
                                    " has no value at t=" + std::to_string(t));
      try {
        plan.statistics[k]->observe(std::span<const double>((*cell)->data(), (*cell)->size()));
      } catch (const std::invalid_argument& e) {
        throw std::invalid_argument("t=" + std::to_string(t) + " stream " +
                                    std::to_string(k + 1) + ": " + e.what());
      }
    }

    while (checkpoint && *checkpoint < t) checkpoint = plan.schedule.next(*checkpoint);
    const bool at_schedule = checkpoint && *checkpoint == t;
    const bool at_truncation = plan.variant == Variant::rejective && t == *plan.truncation;
    if (!at_schedule && !at_truncation) continue;

    emit({EventKind::sample, state.stage, t, -1, Verdict::accept, state.accepted_count,
          state.rejected_count});

    std::vector<StreamStat> stats;
    stats.reserve(state.active.size());
    for (int k : state.active)
      stats.push_back({k, plan.standardizers[k](plan.statistics[k]->value())});

    const int stage_before = state.stage;
    StepOutcome out;
    if (plan.variant == Variant::full) {
      state.n = t;
      out = sbh_step(state, std::move(stats));
    } else {
      out = rejective_step(state, std::move(stats), t, *plan.truncation);
    }
    for (int k : out.accepted)
      emit({EventKind::decision, stage_before, t, k, Verdict::accept, 0, 0});
    for (int k : out.rejected)
      emit({EventKind::decision, stage_before, t, k, Verdict::reject, 0, 0});
  }

  record.decisions = state.decisions;
  record.complete = state.finished();
  if (record.complete) {
    emit({EventKind::terminal, state.stage, state.n, -1, Verdict::accept, state.accepted_count,
          state.rejected_count});
  } else {
    emit({EventKind::incomplete, state.stage, state.n, -1, Verdict::accept, state.accepted_count,
          state.rejected_count});
  }
  return record;
}

}  // namespace seqbh
