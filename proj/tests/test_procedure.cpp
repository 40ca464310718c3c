#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <random>
#include <vector>

#include "seqbh/errors.hpp"
#include "seqbh/ladder.hpp"
#include "seqbh/procedure.hpp"
#include "seqbh/rng.hpp"
#include "seqbh/standardizer.hpp"

using namespace seqbh;

namespace {

using Supplier = std::function<std::optional<double>()>;

Supplier replay(std::vector<double> values) {
  return [values = std::move(values), i = std::size_t{0}]() mutable -> std::optional<double> {
    if (i >= values.size()) return std::nullopt;
    return values[i++];
  };
}

// Ladder with integer boundaries: A = (-2, -1), B = (3, 2). The standardizer
// then maps -2 -> -2, -1 -> -1, 2 -> 1, 3 -> 2 and interpolates between.
CriticalLadder toy_ladder() { return CriticalLadder({-2.0, -1.0}, {3.0, 2.0}); }

}  // namespace

TEST_CASE("step rule accepts and rejects by ranked threshold comparisons") {
  ProcedureState state(2);
  // no boundary reached
  auto out = sbh_step(state, {{0, -0.5}, {1, 0.7}});
  CHECK(out.status == StepStatus::continue_sampling);
  CHECK(state.active.size() == 2);
  CHECK(state.stage == 1);

  // rank-1 rejection: largest statistic at or above K - r - 1 + 1 = 2
  out = sbh_step(state, {{0, -0.5}, {1, 2.0}});
  CHECK(out.status == StepStatus::decided);
  CHECK(out.accepted.empty());
  CHECK(out.rejected == std::vector<int>{1});
  CHECK(state.rejected_count == 1);
  CHECK(state.active == std::vector<int>{0});
  CHECK(state.stage == 2);

  // with one rejection banked, the last stream accepts at -(2 - 0 - 1 + 1)
  out = sbh_step(state, {{0, -2.0}});
  CHECK(out.status == StepStatus::terminal);
  CHECK(out.accepted == std::vector<int>{0});
  CHECK(state.finished());
  CHECK(state.decisions.size() == 2);
  CHECK(state.decisions[0].stream == 1);
  CHECK(state.decisions[0].verdict == Verdict::reject);
  CHECK(state.decisions[0].stage == 1);
  CHECK(state.decisions[1].stream == 0);
  CHECK(state.decisions[1].verdict == Verdict::accept);
  CHECK(state.decisions[1].stage == 2);
}

TEST_CASE("both rules can fire in the same stage") {
  ProcedureState state(2);
  auto out = sbh_step(state, {{0, 2.5}, {1, -2.5}});
  CHECK(out.status == StepStatus::terminal);
  CHECK(out.accepted == std::vector<int>{1});
  CHECK(out.rejected == std::vector<int>{0});
  CHECK(state.accepted_count == 1);
  CHECK(state.rejected_count == 1);
}

TEST_CASE("multiple streams can be dismissed in one stage") {
  ProcedureState state(3);
  // m = 1: 3.0 >= 3 holds; m = 2: 2.5 >= 2 holds; m = 3: 0.0 >= 1 fails
  auto out = sbh_step(state, {{0, 3.0}, {1, 2.5}, {2, 0.0}});
  CHECK(out.rejected == std::vector<int>{1, 0});
  CHECK(out.status == StepStatus::decided);
  CHECK(state.active == std::vector<int>{2});
}

TEST_CASE("the step rule takes the largest qualifying rank") {
  ProcedureState state(3);
  // m = 1 fails (-1.0 > -3) but m = 3 holds (all three <= -1), so all accept
  auto out = sbh_step(state, {{0, -1.0}, {1, -1.5}, {2, -1.2}});
  CHECK(out.status == StepStatus::terminal);
  CHECK(out.accepted == std::vector<int>{1, 2, 0});
  CHECK(state.accepted_count == 3);
}

TEST_CASE("statistics must cover exactly the active set") {
  ProcedureState state(2);
  CHECK_THROWS_AS(sbh_step(state, {{0, 0.0}}), std::invalid_argument);
  CHECK_THROWS_AS(sbh_step(state, {{0, 0.0}, {0, 1.0}}), std::invalid_argument);
  CHECK_THROWS_AS(sbh_step(state, {{0, 0.0}, {2, 1.0}}), std::invalid_argument);
  CHECK_THROWS_AS(sbh_step(state, {{0, 0.0}, {1, std::nan("")}}), std::invalid_argument);
}

TEST_CASE("counters always conserve the number of streams") {
  std::mt19937_64 rng = make_rng(7, 0);
  std::uniform_real_distribution<double> value(-6.0, 6.0);
  for (int trial = 0; trial < 200; ++trial) {
    ProcedureState state(6);
    while (!state.finished()) {
      std::vector<StreamStat> stats;
      for (int k : state.active) stats.push_back({k, value(rng)});
      sbh_step(state, std::move(stats));
      REQUIRE(state.accepted_count + state.rejected_count +
                  static_cast<int>(state.active.size()) ==
              state.total_streams);
    }
    REQUIRE(state.decisions.size() == 6);
  }
}

TEST_CASE("the step outcome does not depend on input order") {
  std::mt19937_64 rng = make_rng(8, 0);
  std::uniform_real_distribution<double> value(-5.0, 5.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<StreamStat> stats;
    for (int k = 0; k < 5; ++k) stats.push_back({k, value(rng)});
    std::vector<StreamStat> shuffled = stats;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);

    ProcedureState a(5), b(5);
    auto out_a = sbh_step(a, std::move(stats));
    auto out_b = sbh_step(b, std::move(shuffled));
    REQUIRE(out_a.accepted == out_b.accepted);
    REQUIRE(out_a.rejected == out_b.rejected);
    REQUIRE(a.active == b.active);
  }
}

TEST_CASE("rejective rule rejects from the smallest crossing rank upward") {
  ProcedureState state(4);
  // ranked values 0.5, 2.5, 2.6, 3.0: rank 2 is the first at or above its rank
  auto out = rejective_step(state, {{0, 2.6}, {1, 0.5}, {2, 3.0}, {3, 2.5}}, 1, 10);
  CHECK(out.status == StepStatus::decided);
  CHECK(out.accepted.empty());
  CHECK(out.rejected == std::vector<int>{3, 0, 2});
  CHECK(state.active == std::vector<int>{1});
  // no acceptances before the truncation point
  out = rejective_step(state, {{1, -50.0}}, 2, 10);
  CHECK(out.status == StepStatus::continue_sampling);
  CHECK(state.active == std::vector<int>{1});
}

TEST_CASE("rejective rule accepts everything left at the truncation point") {
  ProcedureState state(3);
  // crossings at the truncation point do not matter: everything is accepted
  auto out = rejective_step(state, {{0, 5.0}, {1, 5.0}, {2, 5.0}}, 10, 10);
  CHECK(out.status == StepStatus::terminal);
  CHECK(out.accepted == std::vector<int>{0, 1, 2});
  CHECK(out.rejected.empty());
  CHECK(state.accepted_count == 3);
  for (const auto& d : state.decisions) {
    CHECK(d.verdict == Verdict::accept);
    CHECK(d.n == 10);
  }
}

TEST_CASE("rejective rule validates its sample-size arguments") {
  ProcedureState state(2);
  CHECK_THROWS_AS(rejective_step(state, {{0, 0.0}, {1, 0.0}}, 0, 10), std::invalid_argument);
  CHECK_THROWS_AS(rejective_step(state, {{0, 0.0}, {1, 0.0}}, 11, 10), std::invalid_argument);
  rejective_step(state, {{0, 0.0}, {1, 0.0}}, 5, 10);
  CHECK_THROWS_AS(rejective_step(state, {{0, 0.0}, {1, 0.0}}, 4, 10), std::invalid_argument);
}

TEST_CASE("schedules enumerate checkpoints") {
  const Schedule every3 = Schedule::every(3);
  CHECK(every3.first() == 3);
  CHECK(every3.next(3) == 6);
  CHECK(every3.next(7) == 9);

  const Schedule listed = Schedule::at({2, 5, 9});
  CHECK(listed.first() == 2);
  CHECK(listed.next(2) == 5);
  CHECK(listed.next(5) == 9);
  CHECK_FALSE(listed.next(9).has_value());

  CHECK_THROWS_AS(Schedule::every(0), std::invalid_argument);
  CHECK_THROWS_AS(Schedule::at({}), std::invalid_argument);
  CHECK_THROWS_AS(Schedule::at({3, 3}), std::invalid_argument);
  CHECK_THROWS_AS(Schedule::at({0, 2}), std::invalid_argument);
}

TEST_CASE("run drives two streams to opposite verdicts") {
  const CriticalLadder ladder = toy_ladder();
  std::vector<Supplier> suppliers;
  suppliers.push_back(replay({0.5, 2.5, 3.5}));
  suppliers.push_back(replay({-0.5, -1.5, -2.5}));
  const RunResult result = run_full(suppliers, ladder, Schedule::every(1));
  REQUIRE(result.complete);
  CHECK(result.stages == 1);
  CHECK(result.total_n == 6);
  CHECK(result.per_stream_n == std::vector<long long>{3, 3});
  REQUIRE(result.decisions.size() == 2);
  CHECK(result.decisions[0].stream == 1);
  CHECK(result.decisions[0].verdict == Verdict::accept);
  CHECK(result.decisions[0].n == 3);
  CHECK(result.decisions[1].stream == 0);
  CHECK(result.decisions[1].verdict == Verdict::reject);
}

TEST_CASE("decided streams stop being sampled") {
  const CriticalLadder ladder = toy_ladder();
  std::vector<Supplier> suppliers;
  // stream 0 is rejected at n = 1 and has no second value to give
  suppliers.push_back(replay({10.0}));
  suppliers.push_back(replay({0.0, -3.0}));
  const RunResult result = run_full(suppliers, ladder, Schedule::every(1));
  REQUIRE(result.complete);
  CHECK(result.stages == 2);
  CHECK(result.per_stream_n == std::vector<long long>{1, 2});
  CHECK(result.total_n == 3);
  REQUIRE(result.decisions.size() == 2);
  CHECK(result.decisions[0].stream == 0);
  CHECK(result.decisions[0].verdict == Verdict::reject);
  CHECK(result.decisions[0].stage == 1);
  CHECK(result.decisions[0].n == 1);
  CHECK(result.decisions[1].stream == 1);
  CHECK(result.decisions[1].verdict == Verdict::accept);
  CHECK(result.decisions[1].stage == 2);
  CHECK(result.decisions[1].n == 2);
}

TEST_CASE("a drained supplier raises an underrun naming stream and time") {
  const CriticalLadder ladder = toy_ladder();
  std::vector<Supplier> suppliers;
  suppliers.push_back(replay({0.0, 0.0}));
  suppliers.push_back(replay({0.0, 0.0}));
  try {
    run_full(suppliers, ladder, Schedule::every(1));
    FAIL("expected stream_underrun");
  } catch (const stream_underrun& e) {
    CHECK(e.stream() == 0);
    CHECK(e.n() == 3);
  }
}

TEST_CASE("an exhausted checkpoint list leaves the run incomplete") {
  const CriticalLadder ladder = toy_ladder();
  std::vector<Supplier> suppliers;
  suppliers.push_back(replay({0.0, 0.0}));
  suppliers.push_back(replay({0.0, 0.0}));
  const RunResult result = run_full(suppliers, ladder, Schedule::at({1, 2}));
  CHECK_FALSE(result.complete);
  CHECK(result.unresolved == std::vector<int>{0, 1});
  CHECK(result.decisions.empty());
  CHECK_FALSE(result.cap_hit);
}

TEST_CASE("the sample-size cap can force-accept whatever is left") {
  const CriticalLadder ladder = toy_ladder();
  std::vector<Supplier> suppliers;
  suppliers.push_back(replay({0.0, 0.0, 0.0}));
  suppliers.push_back(replay({0.0, 0.0, 0.0}));

  RunControl control;
  control.cap = 2;
  control.force_accept_on_cap = true;
  RunResult result = run_full(suppliers, ladder, Schedule::every(1), control);
  CHECK(result.cap_hit);
  CHECK(result.complete);
  REQUIRE(result.decisions.size() == 2);
  for (const auto& d : result.decisions) {
    CHECK(d.verdict == Verdict::accept);
    CHECK(d.n == 2);
  }

  suppliers.clear();
  suppliers.push_back(replay({0.0, 0.0, 0.0}));
  suppliers.push_back(replay({0.0, 0.0, 0.0}));
  control.force_accept_on_cap = false;
  result = run_full(suppliers, ladder, Schedule::every(1), control);
  CHECK(result.cap_hit);
  CHECK_FALSE(result.complete);
  CHECK(result.unresolved == std::vector<int>{0, 1});
}

TEST_CASE("rejective run accepts all survivors at the truncation point") {
  const RejectiveLadder ladder = rejective_llr_ladder({0.05, 0.2, 3, 0.0});
  std::vector<Supplier> suppliers;
  for (int k = 0; k < 3; ++k)
    suppliers.push_back(replay({0.0, 0.0, 0.0, 0.0, 0.0}));
  const RunResult result = run_rejective(suppliers, ladder, 5, Schedule::every(1));
  REQUIRE(result.complete);
  CHECK(result.total_n == 15);
  CHECK(result.stages == 1);
  for (const auto& d : result.decisions) {
    CHECK(d.verdict == Verdict::accept);
    CHECK(d.n == 5);
  }
}

TEST_CASE("rejective run rejects a runaway stream early") {
  const RejectiveLadder ladder = rejective_llr_ladder({0.05, 0.2, 2, 0.0});
  // b(1) = log(40) ~ 3.689, b(2) = log(20) ~ 3.0
  std::vector<Supplier> suppliers;
  suppliers.push_back(replay({1.0, 2.0, 4.0, 4.0, 4.0}));
  suppliers.push_back(replay({0.0, 0.0, 0.0, 0.0, 0.0}));
  const RunResult result = run_rejective(suppliers, ladder, 5, Schedule::every(1));
  REQUIRE(result.complete);
  REQUIRE(result.decisions.size() == 2);
  CHECK(result.decisions[0].stream == 0);
  CHECK(result.decisions[0].verdict == Verdict::reject);
  CHECK(result.decisions[0].n == 3);
  CHECK(result.decisions[1].stream == 1);
  CHECK(result.decisions[1].verdict == Verdict::accept);
  CHECK(result.decisions[1].n == 5);
  CHECK(result.per_stream_n == std::vector<long long>{3, 5});
}
