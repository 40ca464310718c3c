#pragma once

#include <cstddef>
#include <random>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "seqbh/mvnormal.hpp"
#include "seqbh/rng.hpp"

namespace seqbh {

// Battery of independent Bernoulli streams: stream k has success probability
// p[k], and the per-stream test is H: p <= p0 vs G: p >= p1. Every p[k] must
// land on one side or the other, so the truth of each hypothesis is defined.
struct BernoulliBatterySpec {
  std::vector<double> p;
  double p0 = 0.4;
  double p1 = 0.6;
};

// Streams observed as coordinates of a multivariate normal with mean theta
// and covariance cov, one draw per time index. The per-stream test is
// H: theta <= theta0 vs G: theta >= theta0 + delta.
struct CorrelatedNormalSpec {
  std::vector<double> theta;
  Matrix cov;
  double theta0 = 0.0;
  double delta = 1.0;
};

struct StreamModelSpec {
  std::variant<BernoulliBatterySpec, CorrelatedNormalSpec> model;

  int streams() const {
    if (const auto* b = std::get_if<BernoulliBatterySpec>(&model))
      return static_cast<int>(b->p.size());
    return static_cast<int>(std::get<CorrelatedNormalSpec>(model).theta.size());
  }

  bool is_bernoulli() const { return std::holds_alternative<BernoulliBatterySpec>(model); }

  void validate() const {
    if (const auto* b = std::get_if<BernoulliBatterySpec>(&model)) {
      if (b->p.empty()) throw std::invalid_argument("stream model: need at least one stream");
      if (!(b->p0 > 0.0 && b->p0 < 1.0 && b->p1 > 0.0 && b->p1 < 1.0 && b->p0 < b->p1))
        throw std::invalid_argument("stream model: need 0 < p0 < p1 < 1");
      for (std::size_t k = 0; k < b->p.size(); ++k) {
        if (!(b->p[k] > 0.0 && b->p[k] < 1.0))
          throw std::invalid_argument("stream model: p[" + std::to_string(k) +
                                      "] outside (0,1)");
        if (b->p[k] > b->p0 && b->p[k] < b->p1)
          throw std::invalid_argument(
              "stream model: p[" + std::to_string(k) +
              "] lies strictly between p0 and p1, hypothesis truth undefined");
      }
      return;
    }
    const auto& nrm = std::get<CorrelatedNormalSpec>(model);
    if (nrm.theta.empty()) throw std::invalid_argument("stream model: need at least one stream");
    if (!(nrm.delta > 0.0)) throw std::invalid_argument("stream model: delta must be > 0");
    if (nrm.cov.size() != nrm.theta.size())
      throw std::invalid_argument("stream model: covariance size does not match theta");
    for (std::size_t k = 0; k < nrm.theta.size(); ++k) {
      if (nrm.theta[k] > nrm.theta0 && nrm.theta[k] < nrm.theta0 + nrm.delta)
        throw std::invalid_argument(
            "stream model: theta[" + std::to_string(k) +
            "] lies strictly between theta0 and theta0+delta, hypothesis truth undefined");
    }
    cholesky_factor(nrm.cov);  // symmetric positive definite or throws
  }

  // truth_null()[k] is true when stream k's null hypothesis is true.
  std::vector<bool> truth_null() const {
    std::vector<bool> truth;
    if (const auto* b = std::get_if<BernoulliBatterySpec>(&model)) {
      truth.reserve(b->p.size());
      for (double p : b->p) truth.push_back(p <= b->p0);
    } else {
      const auto& nrm = std::get<CorrelatedNormalSpec>(model);
      truth.reserve(nrm.theta.size());
      for (double t : nrm.theta) truth.push_back(t <= nrm.theta0);
    }
    return truth;
  }
};

// Draws one time step of all K streams. Owns the Cholesky factor and the
// normal sampler's carry state, so one generator serves one replication.
class StreamGenerator {
 public:
  explicit StreamGenerator(const StreamModelSpec& spec) : spec_(spec) {
    spec_.validate();
    if (const auto* nrm = std::get_if<CorrelatedNormalSpec>(&spec_.model))
      chol_ = cholesky_factor(nrm->cov);
    z_.resize(spec_.streams());
  }

  std::vector<double> step(std::mt19937_64& rng) {
    if (const auto* b = std::get_if<BernoulliBatterySpec>(&spec_.model)) {
      std::vector<double> row(b->p.size());
      for (std::size_t k = 0; k < b->p.size(); ++k)
        row[k] = unit_(rng) < b->p[k] ? 1.0 : 0.0;
      return row;
    }
    const auto& nrm = std::get<CorrelatedNormalSpec>(spec_.model);
    for (auto& z : z_) z = normal_(rng);
    return correlated_row(nrm.theta, chol_, z_);
  }

  const StreamModelSpec& spec() const { return spec_; }

 private:
  StreamModelSpec spec_;
  Matrix chol_;
  std::vector<double> z_;
  NormalSampler normal_;
  std::uniform_real_distribution<double> unit_{0.0, 1.0};
};

inline std::vector<double> generate_step(StreamGenerator& gen, std::mt19937_64& rng) {
  return gen.step(rng);
}

}  // namespace seqbh
