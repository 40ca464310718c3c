#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "seqbh/errors.hpp"
#include "seqbh/ladder.hpp"
#include "seqbh/standardizer.hpp"

namespace seqbh {

enum class Variant { full, rejective };

enum class Verdict { accept, reject };

struct Decision {
  int stream = 0;  // 0-based stream index
  Verdict verdict = Verdict::accept;
  int stage = 0;       // 1-based stage at which the decision was made
  long long n = 0;     // cumulative per-stream sample size at the decision
};

// One standardized statistic for one still-active stream.
struct StreamStat {
  int stream = 0;
  double value = 0.0;
};

enum class StepStatus { continue_sampling, decided, terminal };

struct StepOutcome {
  StepStatus status = StepStatus::continue_sampling;
  std::vector<int> accepted;  // stream ids decided this step, in rank order
  std::vector<int> rejected;
};

// Running state of either procedure variant. `accepted_count` and
// `rejected_count` are the a_j and r_j counters; together with the active set
// they always satisfy accepted_count + rejected_count + active.size() == K.
struct ProcedureState {
  explicit ProcedureState(int num_streams) : total_streams(num_streams) {
    if (num_streams < 1)
      throw std::invalid_argument("ProcedureState: need at least one stream, got " +
                                  std::to_string(num_streams));
    active.resize(num_streams);
    for (int k = 0; k < num_streams; ++k) active[k] = k;
  }

  int total_streams;
  std::vector<int> active;  // kept sorted ascending
  int accepted_count = 0;
  int rejected_count = 0;
  int stage = 1;
  long long n = 0;
  std::vector<Decision> decisions;

  bool finished() const { return active.empty(); }
};

namespace detail {

// Sorts stats by (value, stream) and validates that they cover exactly the
// active set with finite, non-NaN values. Ascending stream index breaks ties,
// so relabeling streams with distinct statistic values relabels the outcome.
inline std::vector<StreamStat> ranked_stats(const ProcedureState& state,
                                            std::vector<StreamStat> stats) {
  if (state.finished())
    throw std::invalid_argument("procedure step: no active streams remain");
  if (stats.size() != state.active.size())
    throw std::invalid_argument("procedure step: got " + std::to_string(stats.size()) +
                                " statistics for " + std::to_string(state.active.size()) +
                                " active streams");
  for (const auto& s : stats)
    if (std::isnan(s.value))
      throw std::invalid_argument("procedure step: statistic for stream " +
                                  std::to_string(s.stream) + " is NaN");
  std::vector<int> ids;
  ids.reserve(stats.size());
  for (const auto& s : stats) ids.push_back(s.stream);
  std::sort(ids.begin(), ids.end());
  if (ids != state.active)
    throw std::invalid_argument("procedure step: statistics must cover exactly the active streams");
  std::sort(stats.begin(), stats.end(), [](const StreamStat& x, const StreamStat& y) {
    return x.value < y.value || (x.value == y.value && x.stream < y.stream);
  });
  return stats;
}

inline void apply_decisions(ProcedureState& state, const std::vector<int>& streams,
                            Verdict verdict) {
  for (int k : streams) {
    state.decisions.push_back({k, verdict, state.stage, state.n});
    auto it = std::lower_bound(state.active.begin(), state.active.end(), k);
    state.active.erase(it);
  }
  if (verdict == Verdict::accept)
    state.accepted_count += static_cast<int>(streams.size());
  else
    state.rejected_count += static_cast<int>(streams.size());
}

}  // namespace detail

// One boundary check of the two-boundary procedure at the current sample
// size (state.n must hold it). Accepts the m lowest-ranked streams where m is
// the largest rank whose statistic lies at or below -(K - a_j - m + 1), and
// rejects the m' highest-ranked streams where m' is the largest count whose
// rank-(|I|-m'+1) statistic lies at or above K - r_j - m' + 1. Both rules use
// the stage-entry counters; both may fire in the same stage. If neither
// fires, sampling continues and the state is unchanged.
inline StepOutcome sbh_step(ProcedureState& state, std::vector<StreamStat> stats) {
  const auto ranked = detail::ranked_stats(state, std::move(stats));
  const int sz = static_cast<int>(ranked.size());
  const int k_total = state.total_streams;
  const int a = state.accepted_count;
  const int r = state.rejected_count;

  int m_acc = 0;
  for (int m = 1; m <= sz; ++m)
    if (ranked[m - 1].value <= -static_cast<double>(k_total - a - m + 1)) m_acc = m;
  int m_rej = 0;
  for (int m = 1; m <= sz; ++m)
    if (ranked[sz - m].value >= static_cast<double>(k_total - r - m + 1)) m_rej = m;

  StepOutcome out;
  if (m_acc == 0 && m_rej == 0) {
    out.status = StepStatus::continue_sampling;
    return out;
  }
  if (m_acc + m_rej > sz)
    throw std::logic_error("sbh_step: acceptance and rejection sets overlap");
  for (int i = 0; i < m_acc; ++i) out.accepted.push_back(ranked[i].stream);
  for (int i = sz - m_rej; i < sz; ++i) out.rejected.push_back(ranked[i].stream);
  detail::apply_decisions(state, out.accepted, Verdict::accept);
  detail::apply_decisions(state, out.rejected, Verdict::reject);
  ++state.stage;
  out.status = state.finished() ? StepStatus::terminal : StepStatus::decided;
  return out;
}

// One boundary check of the rejective procedure at per-stream sample size n.
// Strictly before the truncation point it rejects ranks l_j..|I| where l_j is
// the smallest rank whose statistic lies at or above its own rank, and never
// accepts. At n == truncation every remaining stream is accepted and the
// procedure stops, crossings notwithstanding.
inline StepOutcome rejective_step(ProcedureState& state, std::vector<StreamStat> stats,
                                  long long n, long long truncation) {
  if (truncation < 1)
    throw std::invalid_argument("rejective_step: truncation must be >= 1, got " +
                                std::to_string(truncation));
  if (n < 1 || n > truncation)
    throw std::invalid_argument("rejective_step: n=" + std::to_string(n) +
                                " outside 1.." + std::to_string(truncation));
  if (n < state.n)
    throw std::invalid_argument("rejective_step: sample size decreased from " +
                                std::to_string(state.n) + " to " + std::to_string(n));
  const auto ranked = detail::ranked_stats(state, std::move(stats));
  state.n = n;
  const int sz = static_cast<int>(ranked.size());

  StepOutcome out;
  if (n == truncation) {
    for (const auto& s : ranked) out.accepted.push_back(s.stream);
    std::sort(out.accepted.begin(), out.accepted.end());
    detail::apply_decisions(state, out.accepted, Verdict::accept);
    ++state.stage;
    out.status = StepStatus::terminal;
    return out;
  }

  int first_rejected = 0;  // l_j, 0 when no rank crosses
  for (int l = 1; l <= sz; ++l) {
    if (ranked[l - 1].value >= static_cast<double>(l)) {
      first_rejected = l;
      break;
    }
  }
  if (first_rejected == 0) {
    out.status = StepStatus::continue_sampling;
    return out;
  }
  for (int i = first_rejected - 1; i < sz; ++i) out.rejected.push_back(ranked[i].stream);
  detail::apply_decisions(state, out.rejected, Verdict::reject);
  ++state.stage;
  out.status = state.finished() ? StepStatus::terminal : StepStatus::decided;
  return out;
}

// Sample sizes at which boundaries are checked. Either every m-th
// observation, or an explicit increasing list of checkpoints.
class Schedule {
 public:
  static Schedule every(long long step) {
    if (step < 1)
      throw std::invalid_argument("Schedule::every: step must be >= 1, got " +
                                  std::to_string(step));
    Schedule s;
    s.step_ = step;
    return s;
  }

  static Schedule at(std::vector<long long> points) {
    if (points.empty()) throw std::invalid_argument("Schedule::at: need at least one checkpoint");
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (points[i] < 1)
        throw std::invalid_argument("Schedule::at: checkpoints must be >= 1");
      if (i > 0 && points[i] <= points[i - 1])
        throw std::invalid_argument("Schedule::at: checkpoints must be strictly increasing");
    }
    Schedule s;
    s.points_ = std::move(points);
    return s;
  }

  std::optional<long long> first() const {
    if (step_ > 0) return step_;
    return points_.front();
  }

  // Smallest checkpoint strictly greater than `after`.
  std::optional<long long> next(long long after) const {
    if (step_ > 0) return (after / step_ + 1) * step_;
    auto it = std::upper_bound(points_.begin(), points_.end(), after);
    if (it == points_.end()) return std::nullopt;
    return *it;
  }

 private:
  Schedule() = default;
  long long step_ = 0;
  std::vector<long long> points_;
};

struct RunControl {
  // Hard per-stream sample-size budget. When the next checkpoint would
  // exceed it, the run stops; with force_accept_on_cap the still-active
  // hypotheses are accepted at the last checkpoint reached.
  std::optional<long long> cap;
  bool force_accept_on_cap = false;
};

struct RunResult {
  std::vector<Decision> decisions;       // in the order they were made
  std::vector<long long> per_stream_n;   // observations consumed per stream
  long long total_n = 0;
  int stages = 0;
  bool complete = false;                 // every stream reached a verdict
  bool cap_hit = false;
  std::vector<int> unresolved;           // active streams at exit when incomplete
};

// Drives either procedure over per-stream data suppliers. A supplier is a
// callable returning std::optional<double> with the next raw statistic value
// of its stream; std::nullopt raises stream_underrun. Streams that have
// reached a verdict are no longer polled. For the rejective variant,
// checkpoints are clamped to the truncation point.
template <class Supplier>
RunResult run_procedure(std::vector<Supplier>& suppliers, const std::vector<Standardizer>& phi,
                        Variant variant, std::optional<long long> truncation,
                        const Schedule& schedule, const RunControl& control = {}) {
  const int k_total = static_cast<int>(suppliers.size());
  if (k_total == 0) throw std::invalid_argument("run_procedure: need at least one stream");
  if (phi.size() != suppliers.size())
    throw std::invalid_argument("run_procedure: need one standardizer per stream");
  if (variant == Variant::rejective) {
    if (!truncation) throw std::invalid_argument("run_procedure: rejective variant needs a truncation point");
    if (*truncation < 1) throw std::invalid_argument("run_procedure: truncation must be >= 1");
  }
  if (control.cap && *control.cap < 1)
    throw std::invalid_argument("run_procedure: cap must be >= 1");

  ProcedureState state(k_total);
  std::vector<double> raw(k_total, 0.0);
  std::vector<long long> consumed(k_total, 0);
  RunResult result;

  long long prev = 0;
  std::optional<long long> checkpoint = schedule.first();
  while (true) {
    if (!checkpoint) break;  // schedule exhausted before every stream decided
    long long cp = *checkpoint;
    if (variant == Variant::rejective && cp > *truncation) cp = *truncation;
    if (cp <= prev)
      throw std::logic_error("run_procedure: checkpoint did not advance");
    if (control.cap && cp > *control.cap) {
      result.cap_hit = true;
      if (control.force_accept_on_cap) {
        state.n = prev;
        std::vector<int> remaining = state.active;
        detail::apply_decisions(state, remaining, Verdict::accept);
        ++state.stage;
      }
      break;
    }

    for (long long n = prev + 1; n <= cp; ++n) {
      for (int k : state.active) {
        std::optional<double> x = suppliers[k]();
        if (!x) throw stream_underrun(k, n);
        raw[k] = *x;
        consumed[k] = n;
      }
    }

    std::vector<StreamStat> stats;
    stats.reserve(state.active.size());
    for (int k : state.active) stats.push_back({k, phi[k](raw[k])});

    StepOutcome out;
    if (variant == Variant::full) {
      state.n = cp;
      out = sbh_step(state, std::move(stats));
    } else {
      out = rejective_step(state, std::move(stats), cp, *truncation);
    }
    if (out.status == StepStatus::terminal) break;
    prev = cp;
    checkpoint = schedule.next(cp);
  }

  result.decisions = std::move(state.decisions);
  result.per_stream_n = std::move(consumed);
  for (long long n : result.per_stream_n) result.total_n += n;
  result.stages = state.stage - 1;
  result.complete = state.active.empty();
  result.unresolved = std::move(state.active);
  return result;
}

template <class Supplier>
RunResult run_full(std::vector<Supplier>& suppliers, const CriticalLadder& ladder,
                   const Schedule& schedule, const RunControl& control = {}) {
  std::vector<Standardizer> phi(suppliers.size(), build_full_standardizer(ladder));
  return run_procedure(suppliers, phi, Variant::full, std::nullopt, schedule, control);
}

template <class Supplier>
RunResult run_rejective(std::vector<Supplier>& suppliers, const RejectiveLadder& ladder,
                        long long truncation, const Schedule& schedule,
                        const RunControl& control = {}) {
  std::vector<Standardizer> phi(suppliers.size(), build_rejective_standardizer(ladder));
  return run_procedure(suppliers, phi, Variant::rejective, truncation, schedule, control);
}

}  // namespace seqbh
