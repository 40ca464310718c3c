#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "seqbh/errors.hpp"
#include "seqbh/exp_family.hpp"

namespace seqbh {

// One-parameter slice of a constraint set {lambda : u(lambda) = c}. The
// natural-parameter point is produced from a scalar t in [lo, hi]; a point
// constraint uses lo == hi. Constraint sets that split into branches (for
// instance |p1 - p2| = delta) are given as several paths.
struct ConstraintPath {
  double lo = 0.0;
  double hi = 0.0;
  std::function<std::vector<double>(double)> natural_point;
};

// Composite-hypothesis setup u(theta) <= u0 versus u(theta) >= u1 inside one
// exponential family. `u_of_mean` evaluates the same functional through the
// mean parametrization (u composed with grad_psi_inv), which stays defined
// when the sample mean sits on the boundary of the mean domain.
// `constraint_paths(c)` enumerates the slice u = c.
struct GlrSpec {
  ExpFamilyModel model;
  std::function<double(std::span<const double>)> u_of_mean;
  double u0 = 0.0;
  double u1 = 1.0;
  std::function<std::vector<ConstraintPath>(double)> constraint_paths;

  void validate() const {
    if (!(u0 < u1)) throw std::invalid_argument("GlrSpec: need u0 < u1");
    if (!model.psi || !u_of_mean || !constraint_paths)
      throw std::invalid_argument("GlrSpec: model, u_of_mean and constraint_paths are required");
  }
};

namespace detail {

// Golden-section minimization of f over [lo, hi]. The bracket shrinks by the
// golden ratio per iteration, so the width criterion is reached in ~60 steps;
// the best value probed anywhere (endpoints included) is returned, which for
// the smooth unimodal slices used here lands well inside the requested
// divergence tolerance. Infinite objective values (divergence against a
// boundary member) are handled by always stepping toward the finite side.
inline double golden_minimize(const std::function<double(double)>& f, double lo, double hi,
                              double tol) {
  if (!(lo <= hi)) throw std::invalid_argument("golden_minimize: empty bracket");
  if (lo == hi) return f(lo);
  constexpr double kInvPhi = 0.6180339887498949;
  double x1 = hi - kInvPhi * (hi - lo);
  double x2 = lo + kInvPhi * (hi - lo);
  double f1 = f(x1), f2 = f(x2);
  double best = std::min(std::min(f1, f2), std::min(f(lo), f(hi)));
  const double width_goal = std::max(1e-13 * (1.0 + std::abs(lo) + std::abs(hi)), tol * 1e-6);
  for (int iter = 0; iter < 400 && hi - lo > width_goal; ++iter) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - kInvPhi * (hi - lo);
      f1 = f(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + kInvPhi * (hi - lo);
      f2 = f(x2);
    }
    best = std::min(best, std::min(f1, f2));
  }
  if (!std::isfinite(best))
    throw numerical_error("golden_minimize: objective not finite anywhere on the bracket");
  return best;
}

}  // namespace detail

struct GlrStatistics {
  double lambda_h = 0.0;  // n * inf over {u = u0} of I(mean, .)
  double lambda_g = 0.0;  // n * inf over {u = u1} of I(mean, .)
};

// Infimum of I(mu, lambda) over the slice u(lambda) = c, times n.
inline double constrained_divergence(const GlrSpec& spec, std::span<const double> mu, double c,
                                     double tol = 1e-9) {
  const auto paths = spec.constraint_paths(c);
  if (paths.empty())
    throw std::invalid_argument("constrained_divergence: constraint level has no paths");
  double best = std::numeric_limits<double>::infinity();
  for (const auto& path : paths) {
    if (!path.natural_point)
      throw std::invalid_argument("constrained_divergence: path without a parametrization");
    auto objective = [&](double t) {
      const auto lambda = path.natural_point(t);
      return kl_info_mean(spec.model, mu, lambda);
    };
    best = std::min(best, detail::golden_minimize(objective, path.lo, path.hi, tol));
  }
  if (!std::isfinite(best))
    throw numerical_error("constrained_divergence: divergence infinite on every path");
  return best;
}

// Log-GLR pair for H: u(theta) <= u0 vs G: u(theta) >= u1, evaluated at the
// current sufficient-statistic total. Each value is n times the infimum
// Kullback-Leibler divergence between the sample mean's family member and
// the respective constraint slice. Boundary sample means are handled through
// the mean-parametrized divergence (0 log 0 = 0).
inline GlrStatistics glr_statistics(const GlrSpec& spec, const StatisticAccumulator& acc,
                                    double tol = 1e-9) {
  spec.validate();
  if (acc.count() == 0) throw std::domain_error("glr_statistics: no observations accumulated");
  const auto mu = acc.mean();
  const double n = static_cast<double>(acc.count());
  GlrStatistics out;
  out.lambda_h = n * constrained_divergence(spec, mu, spec.u0, tol);
  out.lambda_g = n * constrained_divergence(spec, mu, spec.u1, tol);
  // Divergences are nonnegative; snap away optimizer-level negative fuzz.
  out.lambda_h = std::max(0.0, out.lambda_h);
  out.lambda_g = std::max(0.0, out.lambda_g);
  return out;
}

// Signed-root normal approximation of the GLR pair:
//   +sqrt(2 Lambda_H) when the MLE is past u0 and H is the better-rejected
//   hypothesis, otherwise -sqrt(2 Lambda_G). The Lambda inputs already carry
//   the factor n.
inline double signed_root(double lambda_h, double lambda_g, double u_hat, double u0) {
  if (lambda_h < 0.0 || lambda_g < 0.0)
    throw std::invalid_argument("signed_root: GLR statistics must be nonnegative");
  if (u_hat > u0 && lambda_h >= lambda_g) return std::sqrt(2.0 * lambda_h);
  return -std::sqrt(2.0 * lambda_g);
}

// Scalar exponential family tested on its natural parameter directly:
// H: theta <= u0 vs G: theta >= u1. Constraint slices are single points.
inline GlrSpec natural_parameter_glr_spec(ExpFamilyModel model, double u0, double u1) {
  if (model.dim != 1)
    throw std::invalid_argument("natural_parameter_glr_spec: model must be one-dimensional");
  GlrSpec spec;
  spec.model = std::move(model);
  const auto inv = spec.model.grad_psi_inv;
  spec.u_of_mean = [inv](std::span<const double> mu) { return inv(mu)[0]; };
  spec.u0 = u0;
  spec.u1 = u1;
  spec.constraint_paths = [](double c) {
    std::vector<ConstraintPath> paths(1);
    paths[0].lo = c;
    paths[0].hi = c;
    paths[0].natural_point = [](double t) { return std::vector<double>{t}; };
    return paths;
  };
  spec.validate();
  return spec;
}

// Unit-variance normal mean test H: theta <= u0 vs G: theta >= u1. The mean
// equals the natural parameter, so u_of_mean is the identity and
// Lambda_H = n (mean - u0)^2 / 2 when the mean is past u0.
inline GlrSpec normal_mean_glr_spec(double u0, double u1) {
  GlrSpec spec = natural_parameter_glr_spec(unit_normal_model(), u0, u1);
  spec.u_of_mean = [](std::span<const double> mu) { return mu[0]; };
  return spec;
}

// Bernoulli success-probability test H: p <= p_lo vs G: p >= p_hi expressed
// through the mean scale, so boundary sample means (0 or 1) stay evaluable.
inline GlrSpec bernoulli_glr_spec(double p_lo, double p_hi) {
  if (!(p_lo > 0.0 && p_lo < 1.0 && p_hi > 0.0 && p_hi < 1.0))
    throw std::invalid_argument("bernoulli_glr_spec: hypothesis probabilities must be in (0,1)");
  if (!(p_lo < p_hi)) throw std::invalid_argument("bernoulli_glr_spec: need p_lo < p_hi");
  GlrSpec spec;
  spec.model = bernoulli_model();
  spec.u_of_mean = [](std::span<const double> mu) { return mu[0]; };
  spec.u0 = p_lo;
  spec.u1 = p_hi;
  spec.constraint_paths = [](double c) {
    std::vector<ConstraintPath> paths(1);
    paths[0].lo = c;
    paths[0].hi = c;
    paths[0].natural_point = [](double t) { return std::vector<double>{logit(t)}; };
    return paths;
  };
  spec.validate();
  return spec;
}

}  // namespace seqbh
