#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "seqbh/errors.hpp"
#include "seqbh/mvnormal.hpp"
#include "seqbh/rng.hpp"
#include "seqbh/stream_model.hpp"

using Catch::Matchers::WithinAbs;
using namespace seqbh;

namespace {

Matrix multiply_lt(const Matrix& l) {
  const std::size_t k = l.size();
  Matrix m(k, std::vector<double>(k, 0.0));
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j)
      for (std::size_t t = 0; t < k; ++t) m[i][j] += l[i][t] * l[j][t];
  return m;
}

void check_reconstruction(const Matrix& cov) {
  const Matrix l = cholesky_factor(cov);
  const Matrix back = multiply_lt(l);
  for (std::size_t i = 0; i < cov.size(); ++i) {
    for (std::size_t j = 0; j < cov.size(); ++j) {
      REQUIRE_THAT(back[i][j], WithinAbs(cov[i][j], 1e-10));
      if (j > i) REQUIRE_THAT(l[i][j], WithinAbs(0.0, 0.0));
    }
  }
}

double sample_correlation(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace

TEST_CASE("cholesky factor of the identity is the identity") {
  check_reconstruction({{1.0, 0.0}, {0.0, 1.0}});
  const Matrix l = cholesky_factor({{1.0, 0.0}, {0.0, 1.0}});
  CHECK_THAT(l[0][0], WithinAbs(1.0, 1e-15));
  CHECK_THAT(l[1][1], WithinAbs(1.0, 1e-15));
  CHECK_THAT(l[1][0], WithinAbs(0.0, 1e-15));
}

TEST_CASE("cholesky factor of an exchangeable pair is exact") {
  const Matrix l = cholesky_factor({{1.0, 0.8}, {0.8, 1.0}});
  CHECK_THAT(l[0][0], WithinAbs(1.0, 1e-15));
  CHECK_THAT(l[1][0], WithinAbs(0.8, 1e-15));
  CHECK_THAT(l[1][1], WithinAbs(0.6, 1e-15));
}

TEST_CASE("cholesky reconstruction holds for the bundled covariance shapes") {
  check_reconstruction({{1.0, 0.8, -0.6, -0.8},
                        {0.8, 1.0, -0.6, -0.8},
                        {-0.6, -0.6, 1.0, 0.8},
                        {-0.8, -0.8, 0.8, 1.0}});
  check_reconstruction({{1.0, 0.8, 0.6, -0.4, -0.6, -0.8},
                        {0.8, 1.0, 0.8, -0.4, -0.6, -0.8},
                        {0.6, 0.8, 1.0, -0.4, -0.6, -0.8},
                        {-0.4, -0.4, -0.4, 1.0, 0.8, 0.6},
                        {-0.6, -0.6, -0.6, 0.8, 1.0, 0.8},
                        {-0.8, -0.8, -0.8, 0.6, 0.8, 1.0}});
}

TEST_CASE("a non positive definite matrix is rejected with its pivot") {
  try {
    cholesky_factor({{1.0, 0.99}, {0.99, 0.5}});
    FAIL("expected not_positive_definite");
  } catch (const not_positive_definite& e) {
    CHECK(e.pivot() == 2);
  }
  // the same error is catchable as a numerical error
  CHECK_THROWS_AS(cholesky_factor({{-1.0}}), numerical_error);
}

TEST_CASE("malformed matrices are rejected before factorization") {
  CHECK_THROWS_AS(cholesky_factor({}), std::invalid_argument);
  CHECK_THROWS_AS(cholesky_factor({{1.0, 0.0}}), std::invalid_argument);
  CHECK_THROWS_AS(cholesky_factor({{1.0, 0.2}, {0.3, 1.0}}), std::invalid_argument);
}

TEST_CASE("correlated rows reproduce mean and correlation empirically") {
  CorrelatedNormalSpec nrm;
  nrm.theta = {1.0, 0.0};
  nrm.cov = {{1.0, 0.8}, {0.8, 1.0}};
  StreamModelSpec spec{nrm};
  StreamGenerator gen(spec);
  std::mt19937_64 rng = make_rng(99, 0);
  const int n = 20000;
  std::vector<double> x0, x1;
  x0.reserve(n);
  x1.reserve(n);
  for (int i = 0; i < n; ++i) {
    const auto row = gen.step(rng);
    x0.push_back(row[0]);
    x1.push_back(row[1]);
  }
  double m0 = 0.0, m1 = 0.0;
  for (int i = 0; i < n; ++i) {
    m0 += x0[i];
    m1 += x1[i];
  }
  CHECK_THAT(m0 / n, WithinAbs(1.0, 0.03));
  CHECK_THAT(m1 / n, WithinAbs(0.0, 0.03));
  CHECK_THAT(sample_correlation(x0, x1), WithinAbs(0.8, 0.02));
}

TEST_CASE("independent coordinates show no spurious correlation") {
  CorrelatedNormalSpec nrm;
  nrm.theta = {0.0, 0.0, 0.0};
  nrm.cov = {{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}};
  StreamGenerator gen(StreamModelSpec{nrm});
  std::mt19937_64 rng = make_rng(100, 0);
  const int n = 20000;
  std::vector<double> x0, x1, x2;
  for (int i = 0; i < n; ++i) {
    const auto row = gen.step(rng);
    x0.push_back(row[0]);
    x1.push_back(row[1]);
    x2.push_back(row[2]);
  }
  CHECK(std::abs(sample_correlation(x0, x1)) < 0.025);
  CHECK(std::abs(sample_correlation(x0, x2)) < 0.025);
  CHECK(std::abs(sample_correlation(x1, x2)) < 0.025);
}

TEST_CASE("bernoulli batteries draw zero-one rows with the right rates") {
  BernoulliBatterySpec b;
  b.p = {0.4, 0.6};
  StreamGenerator gen(StreamModelSpec{b});
  std::mt19937_64 rng = make_rng(101, 0);
  const int n = 20000;
  double s0 = 0.0, s1 = 0.0;
  for (int i = 0; i < n; ++i) {
    const auto row = gen.step(rng);
    REQUIRE((row[0] == 0.0 || row[0] == 1.0));
    REQUIRE((row[1] == 0.0 || row[1] == 1.0));
    s0 += row[0];
    s1 += row[1];
  }
  CHECK_THAT(s0 / n, WithinAbs(0.4, 0.015));
  CHECK_THAT(s1 / n, WithinAbs(0.6, 0.015));
}

TEST_CASE("hypothesis truth follows the stream parameters") {
  BernoulliBatterySpec b;
  b.p = {0.4, 0.6, 0.3};
  const StreamModelSpec spec{b};
  spec.validate();
  CHECK(spec.truth_null() == std::vector<bool>{true, false, true});
  CHECK(spec.streams() == 3);
  CHECK(spec.is_bernoulli());

  CorrelatedNormalSpec nrm;
  nrm.theta = {1.0, 0.0};
  nrm.cov = {{1.0, 0.0}, {0.0, 1.0}};
  const StreamModelSpec nspec{nrm};
  nspec.validate();
  CHECK(nspec.truth_null() == std::vector<bool>{false, true});
  CHECK_FALSE(nspec.is_bernoulli());
}

TEST_CASE("stream model validation rejects undefined hypothesis truth") {
  BernoulliBatterySpec between;
  between.p = {0.5};
  CHECK_THROWS_AS(StreamModelSpec{between}.validate(), std::invalid_argument);

  CorrelatedNormalSpec mid;
  mid.theta = {0.5};
  mid.cov = {{1.0}};
  CHECK_THROWS_AS(StreamModelSpec{mid}.validate(), std::invalid_argument);

  CorrelatedNormalSpec mismatched;
  mismatched.theta = {0.0, 1.0};
  mismatched.cov = {{1.0}};
  CHECK_THROWS_AS(StreamModelSpec{mismatched}.validate(), std::invalid_argument);

  CorrelatedNormalSpec degenerate;
  degenerate.theta = {0.0, 0.0};
  degenerate.cov = {{1.0, 1.0}, {1.0, 1.0}};
  CHECK_THROWS_AS(StreamModelSpec{degenerate}.validate(), not_positive_definite);
}
