#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "seqbh/exp_family.hpp"
#include "seqbh/glr.hpp"

namespace seqbh {

// Per-step success probabilities p1, p2 observed through m1 and m2 Bernoulli
// trials respectively at each time index; tests H: p1 = p2 against
// G: |p1 - p2| >= delta. delta = 0 is allowed when only the null-constrained
// statistic is needed (rejective use).
struct TwoSampleBinomialSpec {
  int m1 = 1;
  int m2 = 1;
  double delta = 0.0;

  void validate() const {
    if (m1 < 1 || m2 < 1)
      throw std::invalid_argument("TwoSampleBinomialSpec: trial counts must be >= 1");
    if (!(delta >= 0.0 && delta < 1.0))
      throw std::invalid_argument("TwoSampleBinomialSpec: delta must be in [0,1)");
  }
};

// KL divergence between Bernoulli(q) and Bernoulli(p), finite on the closed
// square wherever the likelihood ratio is (0 log 0 = 0), +infinity when q
// puts mass where p puts none.
inline double bernoulli_kl(double q, double p) {
  if (q < 0.0 || q > 1.0) throw std::domain_error("bernoulli_kl: q outside [0,1]");
  if (p < 0.0 || p > 1.0) throw std::domain_error("bernoulli_kl: p outside [0,1]");
  constexpr double inf = std::numeric_limits<double>::infinity();
  double out = 0.0;
  if (q > 0.0) {
    if (p == 0.0) return inf;
    out += q * std::log(q / p);
  }
  if (q < 1.0) {
    if (p == 1.0) return inf;
    out += (1.0 - q) * std::log((1.0 - q) / (1.0 - p));
  }
  return out;
}

namespace detail {

inline void check_two_sample_counts(const TwoSampleBinomialSpec& spec, double sum_y1,
                                    double sum_y2, long long n) {
  spec.validate();
  if (n < 1) throw std::domain_error("two_sample_binomial_glr: n must be >= 1");
  const double cap1 = static_cast<double>(n) * spec.m1;
  const double cap2 = static_cast<double>(n) * spec.m2;
  if (sum_y1 < 0.0 || sum_y1 > cap1 || sum_y2 < 0.0 || sum_y2 > cap2)
    throw std::invalid_argument("two_sample_binomial_glr: success totals outside 0..n*m");
}

}  // namespace detail

// Log-GLR for H: p1 = p2 with the constrained MLE pooled across both arms:
//   n * sum_i m_i * [ phat_i log(phat_i/pi) + (1-phat_i) log((1-phat_i)/(1-pi)) ],
// phat_i = sum_yi / (n m_i), pi = (sum_y1 + sum_y2) / (n (m1 + m2)). Each
// bracket carries its arm's per-step trial count m_i. Equals the exact
// product-binomial log-likelihood ratio (the combinatorial terms cancel).
inline double two_sample_binomial_glr(const TwoSampleBinomialSpec& spec, double sum_y1,
                                      double sum_y2, long long n) {
  detail::check_two_sample_counts(spec, sum_y1, sum_y2, n);
  const double nn = static_cast<double>(n);
  const double phat1 = sum_y1 / (nn * spec.m1);
  const double phat2 = sum_y2 / (nn * spec.m2);
  const double pooled = (sum_y1 + sum_y2) / (nn * (spec.m1 + spec.m2));
  return nn * (spec.m1 * bernoulli_kl(phat1, pooled) + spec.m2 * bernoulli_kl(phat2, pooled));
}

// Alternative-constrained variant: the same form with (pi_1, pi_2) the MLE
// under |p1 - p2| = delta, found by minimizing the weighted divergence over
// the two branches p1 - p2 = +-delta. The objective is convex along each
// branch (each term is a Bernoulli KL, convex in its mean argument, and the
// branch is affine), so bracketed minimization is exact up to tolerance.
inline double two_sample_binomial_glr_at_delta(const TwoSampleBinomialSpec& spec, double sum_y1,
                                               double sum_y2, long long n, double tol = 1e-9) {
  detail::check_two_sample_counts(spec, sum_y1, sum_y2, n);
  const double nn = static_cast<double>(n);
  const double phat1 = sum_y1 / (nn * spec.m1);
  const double phat2 = sum_y2 / (nn * spec.m2);
  const double d = spec.delta;
  if (d == 0.0) return two_sample_binomial_glr(spec, sum_y1, sum_y2, n);
  // p1 = t, p2 = t - d on the upper branch; mirrored on the lower branch.
  auto upper = [&](double t) {
    return spec.m1 * bernoulli_kl(phat1, t) + spec.m2 * bernoulli_kl(phat2, t - d);
  };
  auto lower = [&](double t) {
    return spec.m1 * bernoulli_kl(phat1, t - d) + spec.m2 * bernoulli_kl(phat2, t);
  };
  const double best = std::min(detail::golden_minimize(upper, d, 1.0, tol),
                               detail::golden_minimize(lower, d, 1.0, tol));
  if (!std::isfinite(best))
    throw numerical_error("two_sample_binomial_glr_at_delta: constrained likelihood degenerate");
  return nn * best;
}

// GlrSpec view of the same test for the generic machinery: the functional is
// the absolute arm difference |p1 - p2|, with u0 = 0 and u1 = delta. Brackets
// are clipped a hair inside (0,1) so natural coordinates stay finite; the
// clipping perturbs the infimum far below the evaluation tolerances in use.
inline GlrSpec two_sample_binomial_glr_spec(const TwoSampleBinomialSpec& tss) {
  tss.validate();
  if (!(tss.delta > 0.0))
    throw std::invalid_argument("two_sample_binomial_glr_spec: delta must be positive");
  const double w1 = tss.m1, w2 = tss.m2;
  const double d = tss.delta;
  GlrSpec spec;
  spec.model = two_sample_binomial_model(tss.m1, tss.m2);
  spec.u_of_mean = [w1, w2](std::span<const double> mu) {
    return std::abs(mu[0] / w1 - mu[1] / w2);
  };
  spec.u0 = 0.0;
  spec.u1 = d;
  spec.constraint_paths = [d](double c) {
    constexpr double eps = 1e-9;
    std::vector<ConstraintPath> paths;
    if (c == 0.0) {
      ConstraintPath p;
      p.lo = eps;
      p.hi = 1.0 - eps;
      p.natural_point = [](double t) { return std::vector<double>{logit(t), logit(t)}; };
      paths.push_back(std::move(p));
      return paths;
    }
    ConstraintPath up;
    up.lo = c + eps;
    up.hi = 1.0 - eps;
    up.natural_point = [c](double t) { return std::vector<double>{logit(t), logit(t - c)}; };
    paths.push_back(std::move(up));
    ConstraintPath down;
    down.lo = c + eps;
    down.hi = 1.0 - eps;
    down.natural_point = [c](double t) { return std::vector<double>{logit(t - c), logit(t)}; };
    paths.push_back(std::move(down));
    return paths;
  };
  spec.validate();
  return spec;
}

// Sequential statistic over paired success counts (y1, y2) per time step.
// In signed-root mode (full procedure) the value is the signed root of the
// pooled-null and delta-constrained GLRs; in pooled mode (rejective
// procedure) it is the raw null-constrained GLR.
class TwoSampleBinomialStatistic {
 public:
  enum class Mode { signed_root, pooled };

  TwoSampleBinomialStatistic(TwoSampleBinomialSpec spec, Mode mode) : spec_(spec), mode_(mode) {
    spec_.validate();
    if (mode_ == Mode::signed_root && !(spec_.delta > 0.0))
      throw std::invalid_argument("TwoSampleBinomialStatistic: signed-root mode needs delta > 0");
  }

  void observe(std::span<const double> y) {
    if (y.size() != 2)
      throw std::invalid_argument("TwoSampleBinomialStatistic: need a (y1, y2) pair per step");
    if (y[0] < 0 || y[0] > spec_.m1 || y[1] < 0 || y[1] > spec_.m2)
      throw std::invalid_argument("TwoSampleBinomialStatistic: counts outside 0..m");
    sum_y1_ += y[0];
    sum_y2_ += y[1];
    ++n_;
  }

  long long count() const { return n_; }

  double value() const {
    if (n_ == 0) return 0.0;
    const double lambda_h = two_sample_binomial_glr(spec_, sum_y1_, sum_y2_, n_);
    if (mode_ == Mode::pooled) return lambda_h;
    const double lambda_g = two_sample_binomial_glr_at_delta(spec_, sum_y1_, sum_y2_, n_);
    const double u_hat = std::abs(sum_y1_ / (static_cast<double>(n_) * spec_.m1) -
                                  sum_y2_ / (static_cast<double>(n_) * spec_.m2));
    return signed_root(lambda_h, lambda_g, u_hat, 0.0);
  }

 private:
  TwoSampleBinomialSpec spec_;
  Mode mode_;
  double sum_y1_ = 0.0;
  double sum_y2_ = 0.0;
  long long n_ = 0;
};

}  // namespace seqbh
