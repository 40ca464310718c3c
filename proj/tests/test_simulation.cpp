#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "seqbh/fixed_sample.hpp"
#include "seqbh/monte_carlo.hpp"

using Catch::Matchers::WithinAbs;
using namespace seqbh;

namespace {

ExperimentConfig small_bernoulli(int nulls, int alts, long long reps, std::uint64_t seed) {
  BernoulliBatterySpec b;
  for (int i = 0; i < nulls; ++i) b.p.push_back(0.4);
  for (int i = 0; i < alts; ++i) b.p.push_back(0.6);
  ExperimentConfig cfg;
  cfg.name = "unit";
  cfg.model = StreamModelSpec{b};
  cfg.replications = reps;
  cfg.seed = seed;
  cfg.threads = 1;
  return cfg;
}

bool reports_identical(const McReport& a, const McReport& b) {
  return a.fdr_hat == b.fdr_hat && a.fdr_se == b.fdr_se && a.fnr_hat == b.fnr_hat &&
         a.fnr_se == b.fnr_se && a.en_hat == b.en_hat && a.en_se == b.en_se &&
         a.cap_hits == b.cap_hits && a.fbh_fdr == b.fbh_fdr && a.fbh_fnr == b.fbh_fnr &&
         a.fbh_en == b.fbh_en && a.savings_vs_fbh == b.savings_vs_fbh;
}

}  // namespace

TEST_CASE("the harmonic inflation factor matches hand values") {
  CHECK_THAT(delta_factor(1), WithinAbs(1.0, 1e-15));
  CHECK_THAT(delta_factor(2), WithinAbs(1.5, 1e-15));
  CHECK_THAT(delta_factor(10), WithinAbs(2.9289682539682538, 1e-14));
  CHECK_THROWS_AS(delta_factor(0), std::invalid_argument);
}

TEST_CASE("the step-up baseline rejects exactly the small p-values") {
  CHECK(fixed_sample_bh({0.01, 0.03}, 0.05) == std::vector<int>{0, 1});
  CHECK(fixed_sample_bh({0.02, 0.04, 0.9}, 0.05).empty());
  CHECK(fixed_sample_bh({1.0, 1.0, 1.0}, 0.05).empty());
  CHECK(fixed_sample_bh({0.9, 0.001}, 0.05) == std::vector<int>{1});
  // the step-up scan rescues every smaller p-value below the cutoff rank
  CHECK(fixed_sample_bh({0.04, 0.049, 0.9, 0.9}, 0.2) == std::vector<int>{0, 1});
  CHECK_THROWS_AS(fixed_sample_bh({0.5}, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(fixed_sample_bh({1.5}, 0.05), std::invalid_argument);
}

TEST_CASE("binomial tail p-values are exact") {
  CHECK_THAT(binomial_tail_pvalue(10, 8, 0.4), WithinAbs(0.0122945536, 1e-12));
  CHECK_THAT(binomial_tail_pvalue(10, 0, 0.4), WithinAbs(1.0, 1e-15));
  CHECK_THAT(binomial_tail_pvalue(10, 11, 0.4), WithinAbs(0.0, 1e-15));
  CHECK_THAT(binomial_tail_pvalue(3, 3, 0.5), WithinAbs(0.125, 1e-14));
  CHECK_THROWS_AS(binomial_tail_pvalue(0, 0, 0.4), std::invalid_argument);
  CHECK_THROWS_AS(binomial_tail_pvalue(10, 1, 1.5), std::invalid_argument);
}

TEST_CASE("normal tail p-values are exact") {
  // mean 1.0 over n = 4 gives a z-statistic of 2
  CHECK_THAT(normal_tail_pvalue(4, 1.0), WithinAbs(0.022750131948179207, 1e-14));
  CHECK_THAT(normal_tail_pvalue(1, 0.0), WithinAbs(0.5, 1e-15));
  CHECK_THAT(normal_tail_pvalue(4, 1.0, 1.0), WithinAbs(0.5, 1e-15));
  CHECK_THROWS_AS(normal_tail_pvalue(0, 0.0), std::invalid_argument);
}

TEST_CASE("an all-null battery keeps the false discovery rate under its bound") {
  ExperimentConfig cfg = small_bernoulli(2, 0, 1000, 5);
  const McReport report = run_monte_carlo(cfg);
  CHECK(report.k0 == 2);
  CHECK(report.k1 == 0);
  CHECK(report.replications == 1000);
  CHECK_THAT(report.bound_fdr, WithinAbs(0.05, 1e-15));
  CHECK_THAT(report.bound_fnr, WithinAbs(0.0, 1e-15));
  CHECK(report.fdr_hat <= report.bound_fdr + 3.0 * report.fdr_se + 1e-12);
  // with no false nulls there is nothing to miss
  CHECK_THAT(report.fnr_hat, WithinAbs(0.0, 1e-15));
  CHECK(report.en_hat > 0.0);
  CHECK(report.cap_hits == 0);
}

TEST_CASE("a mixed battery estimates both error rates and the baseline") {
  ExperimentConfig cfg = small_bernoulli(1, 1, 500, 6);
  cfg.fbh_n = 60;
  const McReport report = run_monte_carlo(cfg);
  CHECK(report.k0 == 1);
  CHECK(report.k1 == 1);
  CHECK_THAT(report.bound_fdr, WithinAbs(0.025, 1e-15));
  CHECK_THAT(report.bound_fnr, WithinAbs(0.1, 1e-15));
  CHECK(report.fdr_hat <= report.bound_fdr + 3.0 * report.fdr_se + 1e-12);
  CHECK(report.fnr_hat <= report.bound_fnr + 3.0 * report.fnr_se + 1e-12);
  REQUIRE(report.has_fbh);
  CHECK(report.fbh_n == 60);
  // the fixed-sample total is constant by construction
  CHECK_THAT(report.fbh_en, WithinAbs(120.0, 1e-12));
  CHECK(report.en_hat < report.fbh_en);
  CHECK(report.savings_vs_fbh > 0.0);
  CHECK_THAT(report.delta, WithinAbs(1.5, 1e-15));
}

TEST_CASE("the same seed reproduces every estimate bit for bit") {
  ExperimentConfig cfg = small_bernoulli(1, 1, 300, 7);
  cfg.fbh_n = 40;
  const McReport first = run_monte_carlo(cfg);
  const McReport second = run_monte_carlo(cfg);
  CHECK(reports_identical(first, second));
  // a different seed moves at least one estimate
  cfg.seed = 8;
  const McReport third = run_monte_carlo(cfg);
  CHECK_FALSE(reports_identical(first, third));
}

TEST_CASE("estimates do not depend on the number of worker threads") {
  ExperimentConfig cfg = small_bernoulli(2, 1, 200, 9);
  cfg.fbh_n = 50;
  cfg.threads = 1;
  const McReport serial = run_monte_carlo(cfg);
  cfg.threads = 3;
  const McReport pooled = run_monte_carlo(cfg);
  CHECK(reports_identical(serial, pooled));
}

TEST_CASE("the rejective variant runs to its truncation point") {
  ExperimentConfig cfg = small_bernoulli(1, 1, 200, 10);
  cfg.variant = Variant::rejective;
  cfg.truncation = 30;
  const McReport report = run_monte_carlo(cfg);
  // every stream stops at or before the truncation point
  CHECK(report.en_hat <= 2.0 * 30.0 + 1e-12);
  CHECK(report.en_hat > 0.0);
  CHECK(report.cap_hits == 0);
}

TEST_CASE("experiment configuration validation rejects bad fields") {
  ExperimentConfig cfg = small_bernoulli(1, 1, 100, 1);
  cfg.replications = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);

  cfg = small_bernoulli(1, 1, 100, 1);
  cfg.alpha = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);

  cfg = small_bernoulli(1, 1, 100, 1);
  cfg.schedule_step = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);

  cfg = small_bernoulli(1, 1, 100, 1);
  cfg.variant = Variant::rejective;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);

  cfg = small_bernoulli(1, 1, 100, 1);
  cfg.cap = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);

  cfg = small_bernoulli(1, 1, 100, 1);
  cfg.fbh_n = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("rho defaults follow the observation family") {
  ExperimentConfig bernoulli_cfg = small_bernoulli(1, 1, 10, 1);
  CHECK_THAT(bernoulli_cfg.resolved_rho(), WithinAbs(0.0, 1e-15));

  CorrelatedNormalSpec nrm;
  nrm.theta = {1.0, 0.0};
  nrm.cov = {{1.0, 0.0}, {0.0, 1.0}};
  ExperimentConfig normal_cfg;
  normal_cfg.model = StreamModelSpec{nrm};
  CHECK_THAT(normal_cfg.resolved_rho(), WithinAbs(0.583, 1e-15));
  normal_cfg.rho = 0.25;
  CHECK_THAT(normal_cfg.resolved_rho(), WithinAbs(0.25, 1e-15));
}
