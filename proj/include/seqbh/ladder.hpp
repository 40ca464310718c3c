#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "seqbh/errors.hpp"

namespace seqbh {

// Continuity correction applied to the Wald bounds: 0 for discrete-time
// statistics with lattice increments, 0.583 (Siegmund's constant) for
// statistics with continuous sample paths.
inline constexpr double kDiscreteRho = 0.0;
inline constexpr double kContinuousRho = 0.583;

struct WaldConfig {
  double alpha = 0.05;  // FDR budget, in (0,1)
  double beta = 0.20;   // FNR budget, in (0,1)
  int streams = 1;      // K >= 1
  double rho = kDiscreteRho;

  void validate() const {
    if (!(alpha > 0.0 && alpha < 1.0))
      throw std::invalid_argument("WaldConfig: alpha must be in (0,1), got " +
                                  std::to_string(alpha));
    if (!(beta > 0.0 && beta < 1.0))
      throw std::invalid_argument("WaldConfig: beta must be in (0,1), got " +
                                  std::to_string(beta));
    if (alpha + beta > 1.0)
      throw std::invalid_argument("WaldConfig: alpha + beta must be <= 1");
    if (streams < 1)
      throw std::invalid_argument("WaldConfig: streams must be >= 1, got " +
                                  std::to_string(streams));
    if (!(rho >= 0.0))
      throw std::invalid_argument("WaldConfig: rho must be >= 0, got " + std::to_string(rho));
  }
};

// Two-sided ladder A_1 <= ... <= A_K < B_K <= ... <= B_1 for one stream.
// a(s)/b(s) take the 1-based index s in 1..K.
class CriticalLadder {
 public:
  CriticalLadder(std::vector<double> a, std::vector<double> b) : a_(std::move(a)), b_(std::move(b)) {
    if (a_.empty() || a_.size() != b_.size())
      throw std::invalid_argument("CriticalLadder: need equally many lower and upper values");
    for (std::size_t s = 1; s < a_.size(); ++s) {
      if (!(a_[s - 1] <= a_[s]))
        throw std::invalid_argument("CriticalLadder: lower values must be nondecreasing in s");
      if (!(b_[s] <= b_[s - 1]))
        throw std::invalid_argument("CriticalLadder: upper values must be nonincreasing in s");
    }
    // Strict gap at s = K keeps the continuation region nonempty and the
    // standardizing function invertible.
    if (!(a_.back() < b_.back()))
      throw std::invalid_argument("CriticalLadder: require A_K < B_K, got A_K=" +
                                  std::to_string(a_.back()) + " B_K=" + std::to_string(b_.back()));
  }

  int size() const { return static_cast<int>(a_.size()); }
  double a(int s) const { return a_.at(check(s) - 1); }
  double b(int s) const { return b_.at(check(s) - 1); }
  const std::vector<double>& lower() const { return a_; }
  const std::vector<double>& upper() const { return b_; }

 private:
  int check(int s) const {
    if (s < 1 || s > size())
      throw std::invalid_argument("CriticalLadder: index s=" + std::to_string(s) +
                                  " outside 1.." + std::to_string(size()));
    return s;
  }

  std::vector<double> a_, b_;
};

// Upper-only ladder B_K <= ... <= B_1 for the truncated rejective procedure.
class RejectiveLadder {
 public:
  explicit RejectiveLadder(std::vector<double> b) : b_(std::move(b)) {
    if (b_.empty()) throw std::invalid_argument("RejectiveLadder: need at least one value");
    for (std::size_t s = 1; s < b_.size(); ++s)
      if (!(b_[s] <= b_[s - 1]))
        throw std::invalid_argument("RejectiveLadder: values must be nonincreasing in s");
  }

  int size() const { return static_cast<int>(b_.size()); }
  double b(int s) const {
    if (s < 1 || s > size())
      throw std::invalid_argument("RejectiveLadder: index s=" + std::to_string(s) +
                                  " outside 1.." + std::to_string(size()));
    return b_[static_cast<std::size_t>(s) - 1];
  }
  const std::vector<double>& upper() const { return b_; }

 private:
  std::vector<double> b_;
};

// Wald's SPRT bounds for one test at error levels (a, b):
//   A = log(b / (1 - a)) + rho,   B = log((1 - b) / a) - rho.
// A crossing walk overshoots its boundary by about rho on average, so pulling
// the bounds in by rho attains the nominal levels; rho = 0 leaves Wald's
// conservative bounds.
struct WaldBounds {
  double a_value;
  double b_value;
};

inline WaldBounds wald_ab(double a, double b, double rho = kDiscreteRho) {
  if (!(a > 0.0 && a < 1.0) || !(b > 0.0 && b < 1.0))
    throw std::domain_error("wald_ab: error levels must be in (0,1)");
  if (a + b > 1.0)
    throw std::domain_error("wald_ab: need a + b <= 1, got a=" + std::to_string(a) +
                            " b=" + std::to_string(b));
  WaldBounds w{std::log(b / (1.0 - a)) + rho, std::log((1.0 - b) / a) - rho};
  if (!(w.a_value < w.b_value))
    throw std::domain_error("wald_ab: degenerate boundaries, lower bound must lie below upper");
  return w;
}

// Per-rung error levels
//   alpha_s = alpha (K - s beta) / (K (K - beta)),
//   beta_s  = beta  (K - s alpha) / (K (K - alpha)).
// Both decrease in s, and the cross sums s*alpha/K + beta_s and
// alpha_s + s*beta/K stay <= 1, which keeps every rung's Wald bounds valid.
struct LevelPair {
  double alpha_s;
  double beta_s;
};

inline LevelPair fractional_levels(const WaldConfig& cfg, int s) {
  cfg.validate();
  if (s < 1 || s > cfg.streams)
    throw std::invalid_argument("fractional_levels: s=" + std::to_string(s) + " outside 1.." +
                                std::to_string(cfg.streams));
  const double k = static_cast<double>(cfg.streams);
  return {cfg.alpha * (k - s * cfg.beta) / (k * (k - cfg.beta)),
          cfg.beta * (k - s * cfg.alpha) / (k * (k - cfg.alpha))};
}

// Ladder for log-likelihood-ratio streams:
//   A_s = log(s beta / ((1 - alpha_s) K)) + rho,
//   B_s = log((1 - beta_s) K / (s alpha)) - rho.
// Equivalently A_s = A(alpha_s, s beta / K) and B_s = B(s alpha / K, beta_s)
// with A,B the Wald bounds above; the opposite pairings are constant in s.
inline CriticalLadder sbh_wald_ladder(const WaldConfig& cfg) {
  cfg.validate();
  const double k = static_cast<double>(cfg.streams);
  std::vector<double> a(cfg.streams), b(cfg.streams);
  for (int s = 1; s <= cfg.streams; ++s) {
    const LevelPair lv = fractional_levels(cfg, s);
    a[s - 1] = std::log(s * cfg.beta / ((1.0 - lv.alpha_s) * k)) + cfg.rho;
    b[s - 1] = std::log((1.0 - lv.beta_s) * k / (s * cfg.alpha)) - cfg.rho;
  }
  return CriticalLadder(std::move(a), std::move(b));
}

// Upper ladder B_s = log(K / (s alpha)) - rho for log-likelihood-ratio streams
// in the truncated rejective procedure. Under the null the likelihood ratio is
// a supermartingale with mean one; a crossing walk lands near B_s + rho, so
// P(sup_n Lambda_n >= B_s) ~ e^{-(B_s + rho)} = s alpha / K, which is exactly
// the crossing bound the procedure needs. With rho = 0 the bound is exact.
inline RejectiveLadder rejective_llr_ladder(const WaldConfig& cfg) {
  cfg.validate();
  const double k = static_cast<double>(cfg.streams);
  std::vector<double> b(cfg.streams);
  for (int s = 1; s <= cfg.streams; ++s) b[s - 1] = std::log(k / (s * cfg.alpha)) - cfg.rho;
  return RejectiveLadder(std::move(b));
}

}  // namespace seqbh
