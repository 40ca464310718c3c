#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "seqbh/errors.hpp"

namespace seqbh {

inline double log1pexp(double t) {
  return t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t));
}

// x log x extended by continuity with 0 log 0 = 0.
inline double xlogx(double x) {
  if (x < 0.0) throw std::domain_error("xlogx: negative argument " + std::to_string(x));
  return x == 0.0 ? 0.0 : x * std::log(x);
}

// Natural-parameter exponential family f_theta(x) = exp(theta'x - psi(theta))
// relative to its base measure, where x is the sufficient statistic of one
// observation. grad_psi maps natural parameters to means, grad_psi_inv is its
// inverse on the interior of the mean domain, and psi_star is the convex
// conjugate of psi, defined on the closed mean domain. Divergences evaluated
// through psi_star stay finite when a sample mean sits on the boundary.
struct ExpFamilyModel {
  int dim = 1;
  std::function<double(std::span<const double>)> psi;
  std::function<std::vector<double>(std::span<const double>)> grad_psi;
  std::function<std::vector<double>(std::span<const double>)> grad_psi_inv;
  std::function<double(std::span<const double>)> psi_star;
};

// Spot-checks that grad_psi_inv inverts grad_psi at the given natural
// parameter points. Factories call this so a mistyped model fails fast.
inline void validate_inverse_pair(const ExpFamilyModel& model,
                                  const std::vector<std::vector<double>>& natural_points,
                                  double tol = 1e-8) {
  for (const auto& theta : natural_points) {
    if (static_cast<int>(theta.size()) != model.dim)
      throw std::invalid_argument("validate_inverse_pair: point dimension mismatch");
    const auto mean = model.grad_psi(theta);
    const auto back = model.grad_psi_inv(mean);
    for (int i = 0; i < model.dim; ++i)
      if (!(std::abs(back[i] - theta[i]) <= tol))
        throw numerical_error("exponential family model: grad_psi_inv fails to invert grad_psi "
                              "(coordinate " + std::to_string(i) + ")");
  }
}

inline double logit(double p) {
  if (!(p > 0.0 && p < 1.0))
    throw std::domain_error("logit: argument must be in (0,1), got " + std::to_string(p));
  return std::log(p / (1.0 - p));
}

inline double logistic(double t) { return 1.0 / (1.0 + std::exp(-t)); }

// Natural parameter of the Bernoulli family: theta = log(p/(1-p)).
inline double bernoulli_natural(double p) { return logit(p); }

inline ExpFamilyModel bernoulli_model() {
  ExpFamilyModel m;
  m.dim = 1;
  m.psi = [](std::span<const double> t) { return log1pexp(t[0]); };
  m.grad_psi = [](std::span<const double> t) { return std::vector<double>{logistic(t[0])}; };
  m.grad_psi_inv = [](std::span<const double> mu) { return std::vector<double>{logit(mu[0])}; };
  m.psi_star = [](std::span<const double> mu) {
    if (mu[0] < 0.0 || mu[0] > 1.0)
      throw std::domain_error("bernoulli psi_star: mean outside [0,1]");
    return xlogx(mu[0]) + xlogx(1.0 - mu[0]);
  };
  validate_inverse_pair(m, {{-1.5}, {0.0}, {2.0}});
  return m;
}

// Normal with unit variance and mean theta; psi(theta) = theta^2 / 2.
inline ExpFamilyModel unit_normal_model() {
  ExpFamilyModel m;
  m.dim = 1;
  m.psi = [](std::span<const double> t) { return 0.5 * t[0] * t[0]; };
  m.grad_psi = [](std::span<const double> t) { return std::vector<double>{t[0]}; };
  m.grad_psi_inv = [](std::span<const double> mu) { return std::vector<double>{mu[0]}; };
  m.psi_star = [](std::span<const double> mu) { return 0.5 * mu[0] * mu[0]; };
  validate_inverse_pair(m, {{-2.0}, {0.0}, {1.0}});
  return m;
}

// Product of two binomials with m1 and m2 trials per observation step; the
// sufficient statistic of one step is the pair of success counts.
inline ExpFamilyModel two_sample_binomial_model(int m1, int m2) {
  if (m1 < 1 || m2 < 1)
    throw std::invalid_argument("two_sample_binomial_model: trial counts must be >= 1");
  const double w1 = m1, w2 = m2;
  ExpFamilyModel m;
  m.dim = 2;
  m.psi = [w1, w2](std::span<const double> t) { return w1 * log1pexp(t[0]) + w2 * log1pexp(t[1]); };
  m.grad_psi = [w1, w2](std::span<const double> t) {
    return std::vector<double>{w1 * logistic(t[0]), w2 * logistic(t[1])};
  };
  m.grad_psi_inv = [w1, w2](std::span<const double> mu) {
    return std::vector<double>{logit(mu[0] / w1), logit(mu[1] / w2)};
  };
  m.psi_star = [w1, w2](std::span<const double> mu) {
    const double q1 = mu[0] / w1, q2 = mu[1] / w2;
    if (q1 < 0.0 || q1 > 1.0 || q2 < 0.0 || q2 > 1.0)
      throw std::domain_error("two_sample_binomial psi_star: mean outside the trial range");
    return w1 * (xlogx(q1) + xlogx(1.0 - q1)) + w2 * (xlogx(q2) + xlogx(1.0 - q2));
  };
  validate_inverse_pair(m, {{-1.0, 0.5}, {0.25, -0.75}});
  return m;
}

// Simple null density vs simple alternative density inside one family.
struct SimpleTestSpec {
  ExpFamilyModel model;
  std::vector<double> null_theta;
  std::vector<double> alt_theta;

  void validate() const {
    if (static_cast<int>(null_theta.size()) != model.dim ||
        static_cast<int>(alt_theta.size()) != model.dim)
      throw std::invalid_argument("SimpleTestSpec: parameter dimension mismatch");
    if (null_theta == alt_theta)
      throw std::invalid_argument("SimpleTestSpec: null and alternative must differ");
  }
};

// Log-likelihood-ratio contribution of one observation with sufficient
// statistic x: (alt - null)'x - (psi(alt) - psi(null)).
inline double llr_increment(const SimpleTestSpec& spec, std::span<const double> x) {
  if (static_cast<int>(x.size()) != spec.model.dim)
    throw std::invalid_argument("llr_increment: observation dimension mismatch");
  double dot = 0.0;
  for (int i = 0; i < spec.model.dim; ++i) dot += (spec.alt_theta[i] - spec.null_theta[i]) * x[i];
  return dot - (spec.model.psi(spec.alt_theta) - spec.model.psi(spec.null_theta));
}

inline double llr_increment(const SimpleTestSpec& spec, double x) {
  return llr_increment(spec, std::span<const double>(&x, 1));
}

// Kullback-Leibler information I(theta, lambda) between family members, in
// natural coordinates: (theta - lambda)' grad_psi(theta) - psi(theta) + psi(lambda).
inline double kl_info(const ExpFamilyModel& model, std::span<const double> theta,
                      std::span<const double> lambda) {
  if (static_cast<int>(theta.size()) != model.dim ||
      static_cast<int>(lambda.size()) != model.dim)
    throw std::invalid_argument("kl_info: parameter dimension mismatch");
  const auto mean = model.grad_psi(theta);
  double dot = 0.0;
  for (int i = 0; i < model.dim; ++i) dot += (theta[i] - lambda[i]) * mean[i];
  return dot - model.psi(theta) + model.psi(lambda);
}

// Same divergence parametrized by the first argument's mean:
// I = psi_star(mu) + psi(lambda) - lambda'mu. Well-defined for boundary means,
// where the natural-coordinate form is not.
inline double kl_info_mean(const ExpFamilyModel& model, std::span<const double> mu,
                           std::span<const double> lambda) {
  if (static_cast<int>(mu.size()) != model.dim ||
      static_cast<int>(lambda.size()) != model.dim)
    throw std::invalid_argument("kl_info_mean: parameter dimension mismatch");
  double dot = 0.0;
  for (int i = 0; i < model.dim; ++i) dot += lambda[i] * mu[i];
  return model.psi_star(mu) + model.psi(lambda) - dot;
}

// Running sufficient-statistic total S_n and sample size n for one stream.
class StatisticAccumulator {
 public:
  explicit StatisticAccumulator(int dim) : sum_(dim, 0.0) {
    if (dim < 1) throw std::invalid_argument("StatisticAccumulator: dimension must be >= 1");
  }

  void observe(std::span<const double> x) {
    if (x.size() != sum_.size())
      throw std::invalid_argument("StatisticAccumulator: observation dimension mismatch");
    for (std::size_t i = 0; i < sum_.size(); ++i) sum_[i] += x[i];
    ++n_;
  }

  void observe(double x) { observe(std::span<const double>(&x, 1)); }

  long long count() const { return n_; }
  const std::vector<double>& sum() const { return sum_; }

  std::vector<double> mean() const {
    if (n_ == 0) throw std::domain_error("StatisticAccumulator: mean of an empty sample");
    std::vector<double> mu(sum_.size());
    for (std::size_t i = 0; i < sum_.size(); ++i) mu[i] = sum_[i] / static_cast<double>(n_);
    return mu;
  }

 private:
  std::vector<double> sum_;
  long long n_ = 0;
};

}  // namespace seqbh
