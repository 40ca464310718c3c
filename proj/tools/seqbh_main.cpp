// Command-line front end: critical-value inspection, Monte Carlo experiment
// tables, streaming application of the procedure to external observations,
// and a one-shot fixed-sample step-up baseline.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "seqbh/seqbh.hpp"

namespace {

using nlohmann::json;

int parse_env_threads() {
  const char* raw = std::getenv("SEQBH_THREADS");
  if (!raw || !*raw) return 0;
  char* end = nullptr;
  const long v = std::strtol(raw, &end, 10);
  if (*end != '\0' || v < 1)
    throw std::invalid_argument("SEQBH_THREADS: expected a positive integer, got '" +
                                std::string(raw) + "'");
  return static_cast<int>(v);
}

std::string exact(double v) { return seqbh::detail::fmt_exact(v); }

struct LadderArgs {
  double alpha = 0.05;
  double beta = 0.2;
  int streams = 1;
  double rho = 0.0;
  std::string variant = "full";
  bool pretty = false;
};

int cmd_ladder(const LadderArgs& args) {
  const seqbh::WaldConfig cfg{args.alpha, args.beta, args.streams, args.rho};
  cfg.validate();
  if (args.variant == "rejective") {
    const seqbh::RejectiveLadder ladder = seqbh::rejective_llr_ladder(cfg);
    if (args.pretty) {
      std::cout << "| s | B_s |\n|---|---|\n";
      for (int s = 1; s <= ladder.size(); ++s)
        std::cout << "| " << s << " | " << seqbh::detail::fmt("%.6f", ladder.b(s)) << " |\n";
    } else {
      std::cout << "s,B_s\n";
      for (int s = 1; s <= ladder.size(); ++s)
        std::cout << s << ',' << exact(ladder.b(s)) << '\n';
    }
    return 0;
  }
  if (args.variant != "full")
    throw std::invalid_argument("--variant: expected 'full' or 'rejective', got '" +
                                args.variant + "'");
  const seqbh::CriticalLadder ladder = seqbh::sbh_wald_ladder(cfg);
  if (args.pretty) {
    std::cout << "| s | A_s | B_s | alpha_s | beta_s |\n|---|---|---|---|---|\n";
    for (int s = 1; s <= ladder.size(); ++s) {
      const seqbh::LevelPair lv = seqbh::fractional_levels(cfg, s);
      std::cout << "| " << s << " | " << seqbh::detail::fmt("%.6f", ladder.a(s)) << " | "
                << seqbh::detail::fmt("%.6f", ladder.b(s)) << " | "
                << seqbh::detail::fmt("%.6f", lv.alpha_s) << " | "
                << seqbh::detail::fmt("%.6f", lv.beta_s) << " |\n";
    }
  } else {
    std::cout << "s,A_s,B_s,alpha_s,beta_s\n";
    for (int s = 1; s <= ladder.size(); ++s) {
      const seqbh::LevelPair lv = seqbh::fractional_levels(cfg, s);
      std::cout << s << ',' << exact(ladder.a(s)) << ',' << exact(ladder.b(s)) << ','
                << exact(lv.alpha_s) << ',' << exact(lv.beta_s) << '\n';
    }
  }
  return 0;
}

struct SimulateArgs {
  std::string config_path;
  std::optional<long long> reps;
  std::optional<long long> seed;
  std::optional<double> rho;
  std::string out = "csv";
  bool pretty = false;
};

int cmd_simulate(const SimulateArgs& args) {
  std::vector<seqbh::ExperimentConfig> scenarios;
  if (args.config_path == "-") {
    scenarios = seqbh::load_scenarios(std::cin);
  } else {
    std::ifstream in(args.config_path);
    if (!in) throw std::invalid_argument("cannot open config file: " + args.config_path);
    scenarios = seqbh::load_scenarios(in);
  }
  const int env_threads = parse_env_threads();
  std::vector<seqbh::McReport> rows;
  rows.reserve(scenarios.size());
  for (auto& cfg : scenarios) {
    if (args.reps) cfg.replications = *args.reps;
    if (args.seed) cfg.seed = static_cast<std::uint64_t>(*args.seed);
    if (args.rho) cfg.rho = *args.rho;
    if (env_threads > 0) cfg.threads = env_threads;
    rows.push_back(seqbh::run_monte_carlo(cfg));
  }
  if (args.pretty || args.out == "md")
    seqbh::emit_markdown(std::cout, rows);
  else if (args.out == "csv")
    seqbh::emit_csv(std::cout, rows);
  else
    throw std::invalid_argument("--out: expected 'csv' or 'md', got '" + args.out + "'");
  return 0;
}

// One stream's hypothesis description from the run config.
std::unique_ptr<seqbh::SequentialStatistic> make_statistic(const json& j, const std::string& path,
                                                           seqbh::Variant variant,
                                                           bool& discrete) {
  namespace sd = seqbh::detail;
  sd::expect_object(j, path);
  const std::string kind = sd::as_string(sd::require_field(j, "kind", path), path + ".kind");
  if (kind == "bernoulli") {
    sd::reject_unknown_keys(j, path, {"kind", "p0", "p1"});
    double p0 = 0.4, p1 = 0.6;
    if (const auto* f = sd::find_field(j, "p0")) p0 = sd::as_number(*f, path + ".p0");
    if (const auto* f = sd::find_field(j, "p1")) p1 = sd::as_number(*f, path + ".p1");
    discrete = true;
    seqbh::SimpleTestSpec spec{seqbh::bernoulli_model(),
                               {seqbh::bernoulli_natural(p0)},
                               {seqbh::bernoulli_natural(p1)}};
    return seqbh::erase_statistic(seqbh::LlrStatistic(std::move(spec)));
  }
  if (kind == "normal-mean") {
    sd::reject_unknown_keys(j, path, {"kind", "theta0", "delta"});
    double theta0 = 0.0, delta = 1.0;
    if (const auto* f = sd::find_field(j, "theta0")) theta0 = sd::as_number(*f, path + ".theta0");
    if (const auto* f = sd::find_field(j, "delta")) delta = sd::as_number(*f, path + ".delta");
    if (!(delta > 0.0)) sd::config_fail(path + ".delta", "expected a positive number");
    discrete = false;
    seqbh::SimpleTestSpec spec{seqbh::unit_normal_model(), {theta0}, {theta0 + delta}};
    return seqbh::erase_statistic(seqbh::LlrStatistic(std::move(spec)));
  }
  if (kind == "normal-glr") {
    sd::reject_unknown_keys(j, path, {"kind", "u0", "u1"});
    const double u0 = sd::as_number(sd::require_field(j, "u0", path), path + ".u0");
    const double u1 = sd::as_number(sd::require_field(j, "u1", path), path + ".u1");
    discrete = false;
    return seqbh::erase_statistic(
        seqbh::SignedRootGlrStatistic(seqbh::normal_mean_glr_spec(u0, u1)));
  }
  if (kind == "bernoulli-glr") {
    sd::reject_unknown_keys(j, path, {"kind", "p_lo", "p_hi"});
    const double p_lo = sd::as_number(sd::require_field(j, "p_lo", path), path + ".p_lo");
    const double p_hi = sd::as_number(sd::require_field(j, "p_hi", path), path + ".p_hi");
    discrete = true;
    return seqbh::erase_statistic(
        seqbh::SignedRootGlrStatistic(seqbh::bernoulli_glr_spec(p_lo, p_hi)));
  }
  if (kind == "two-sample-binomial") {
    sd::reject_unknown_keys(j, path, {"kind", "m1", "m2", "delta"});
    seqbh::TwoSampleBinomialSpec spec;
    spec.m1 = sd::as_integer(sd::require_field(j, "m1", path), path + ".m1");
    spec.m2 = sd::as_integer(sd::require_field(j, "m2", path), path + ".m2");
    spec.delta = sd::as_number(sd::require_field(j, "delta", path), path + ".delta");
    discrete = true;
    const auto mode = variant == seqbh::Variant::full
                          ? seqbh::TwoSampleBinomialStatistic::Mode::signed_root
                          : seqbh::TwoSampleBinomialStatistic::Mode::pooled;
    return seqbh::erase_statistic(seqbh::TwoSampleBinomialStatistic(spec, mode));
  }
  sd::config_fail(path + ".kind", "unknown kind '" + kind +
                                      "' (expected bernoulli, normal-mean, normal-glr, "
                                      "bernoulli-glr or two-sample-binomial)");
}

struct RunArgs {
  std::string input_path = "-";
  std::string config_path;
  std::optional<std::string> variant;
  std::optional<long long> truncation;
  std::optional<long long> step;
  std::optional<double> rho;
  bool trace = false;
};

seqbh::ReplayPlan build_replay_plan(const json& doc, const RunArgs& args) {
  namespace sd = seqbh::detail;
  sd::expect_object(doc, "config");
  sd::reject_unknown_keys(doc, "config",
                          {"alpha", "beta", "rho", "variant", "truncation", "schedule_step",
                           "streams", "ladder"});
  seqbh::ReplayPlan plan;

  std::string variant = "full";
  if (const auto* f = sd::find_field(doc, "variant"))
    variant = sd::as_string(*f, "config.variant");
  if (args.variant) variant = *args.variant;
  if (variant == "full")
    plan.variant = seqbh::Variant::full;
  else if (variant == "rejective")
    plan.variant = seqbh::Variant::rejective;
  else
    sd::config_fail("config.variant", "expected 'full' or 'rejective', got '" + variant + "'");

  double alpha = 0.05, beta = 0.2;
  if (const auto* f = sd::find_field(doc, "alpha")) alpha = sd::as_number(*f, "config.alpha");
  if (const auto* f = sd::find_field(doc, "beta")) beta = sd::as_number(*f, "config.beta");

  const auto& streams = sd::require_field(doc, "streams", "config");
  if (!streams.is_array() || streams.empty())
    sd::config_fail("config.streams", "expected a nonempty array");
  const int k_total = static_cast<int>(streams.size());
  bool all_discrete = true;
  for (int k = 0; k < k_total; ++k) {
    bool discrete = true;
    plan.statistics.push_back(make_statistic(streams[k],
                                             "config.streams[" + std::to_string(k) + "]",
                                             plan.variant, discrete));
    all_discrete = all_discrete && discrete;
  }

  double rho = all_discrete ? seqbh::kDiscreteRho : seqbh::kContinuousRho;
  if (const auto* f = sd::find_field(doc, "rho")) rho = sd::as_number(*f, "config.rho");
  if (args.rho) rho = *args.rho;

  if (const auto* f = sd::find_field(doc, "truncation"))
    plan.truncation = sd::as_integer(*f, "config.truncation");
  if (args.truncation) plan.truncation = *args.truncation;

  long long step = 1;
  if (const auto* f = sd::find_field(doc, "schedule_step"))
    step = sd::as_integer(*f, "config.schedule_step");
  if (args.step) step = *args.step;
  plan.schedule = seqbh::Schedule::every(step);

  const seqbh::WaldConfig wald{alpha, beta, k_total, rho};
  const auto* ladder_field = sd::find_field(doc, "ladder");
  if (plan.variant == seqbh::Variant::full) {
    seqbh::CriticalLadder ladder = seqbh::sbh_wald_ladder(wald);
    if (ladder_field) {
      sd::expect_object(*ladder_field, "config.ladder");
      sd::reject_unknown_keys(*ladder_field, "config.ladder", {"A", "B"});
      auto a = sd::as_number_array(sd::require_field(*ladder_field, "A", "config.ladder"),
                                   "config.ladder.A");
      auto b = sd::as_number_array(sd::require_field(*ladder_field, "B", "config.ladder"),
                                   "config.ladder.B");
      if (static_cast<int>(a.size()) != k_total || static_cast<int>(b.size()) != k_total)
        sd::config_fail("config.ladder", "need one A and one B value per stream");
      ladder = seqbh::CriticalLadder(std::move(a), std::move(b));
    }
    plan.standardizers.assign(k_total, seqbh::build_full_standardizer(ladder, k_total));
  } else {
    seqbh::RejectiveLadder ladder = seqbh::rejective_llr_ladder(wald);
    if (ladder_field) {
      sd::expect_object(*ladder_field, "config.ladder");
      sd::reject_unknown_keys(*ladder_field, "config.ladder", {"B"});
      auto b = sd::as_number_array(sd::require_field(*ladder_field, "B", "config.ladder"),
                                   "config.ladder.B");
      if (static_cast<int>(b.size()) != k_total)
        sd::config_fail("config.ladder", "need one B value per stream");
      ladder = seqbh::RejectiveLadder(std::move(b));
    }
    plan.standardizers.assign(k_total, seqbh::build_rejective_standardizer(ladder, k_total));
  }
  return plan;
}

int cmd_run(const RunArgs& args) {
  std::ifstream config_in(args.config_path);
  if (!config_in) throw std::invalid_argument("cannot open config file: " + args.config_path);
  json doc;
  try {
    doc = json::parse(config_in);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  seqbh::ReplayPlan plan = build_replay_plan(doc, args);

  const auto sink = [&](const seqbh::RunEvent& e) {
    switch (e.kind) {
      case seqbh::EventKind::sample:
        if (args.trace) std::cout << "SAMPLE stage=" << e.stage << " n=" << e.n << '\n';
        break;
      case seqbh::EventKind::decision:
        std::cout << "DECISION stage=" << e.stage << " n=" << e.n << " stream=" << e.stream + 1
                  << " verdict=" << (e.verdict == seqbh::Verdict::accept ? "accept" : "reject")
                  << '\n';
        break;
      case seqbh::EventKind::terminal:
        std::cout << "TERMINAL accepted=" << e.accepted << " rejected=" << e.rejected << '\n';
        break;
      case seqbh::EventKind::incomplete:
        std::cout << "INCOMPLETE accepted=" << e.accepted << " rejected=" << e.rejected << '\n';
        break;
    }
  };

  seqbh::RunRecord record;
  if (args.input_path == "-") {
    record = seqbh::replay_streams(std::cin, plan, sink);
  } else {
    std::ifstream in(args.input_path);
    if (!in) throw std::invalid_argument("cannot open input file: " + args.input_path);
    record = seqbh::replay_streams(in, plan, sink);
  }
  return record.complete ? 0 : 4;
}

struct BhArgs {
  std::vector<double> p_values;
  double alpha = 0.05;
  bool pretty = false;
};

int cmd_bh(const BhArgs& args) {
  const std::vector<int> rejected = seqbh::fixed_sample_bh(args.p_values, args.alpha);
  if (args.pretty) {
    if (rejected.empty()) {
      std::cout << "no rejections\n";
    } else {
      for (int k : rejected)
        std::cout << "reject " << k + 1 << " (p=" << exact(args.p_values[k]) << ")\n";
    }
  } else {
    for (int k : rejected) std::cout << k + 1 << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sequential step-up multiple testing over data streams"};
  app.require_subcommand(1);

  LadderArgs ladder_args;
  auto* ladder = app.add_subcommand("ladder", "Print critical-value ladder and per-rung levels");
  ladder->add_option("-a,--alpha", ladder_args.alpha, "False discovery rate budget");
  ladder->add_option("-b,--beta", ladder_args.beta, "False nondiscovery rate budget");
  ladder->add_option("-K,--streams", ladder_args.streams, "Number of streams")->required();
  ladder->add_option("--rho", ladder_args.rho, "Continuity correction");
  ladder->add_option("--variant", ladder_args.variant, "full or rejective");
  ladder->add_flag("--pretty", ladder_args.pretty, "Markdown instead of CSV");

  SimulateArgs sim_args;
  auto* simulate = app.add_subcommand("simulate", "Run Monte Carlo scenarios from a JSON config");
  simulate->add_option("config", sim_args.config_path, "Scenario file, or - for stdin")->required();
  simulate->add_option("--reps", sim_args.reps, "Override replications of every scenario");
  simulate->add_option("--seed", sim_args.seed, "Override seed of every scenario");
  simulate->add_option("--rho", sim_args.rho, "Override continuity correction");
  simulate->add_option("--out", sim_args.out, "Output format: csv or md");
  simulate->add_flag("--pretty", sim_args.pretty, "Markdown instead of CSV");

  RunArgs run_args;
  auto* run = app.add_subcommand("run", "Apply the procedure to tab-separated observations");
  run->add_option("input", run_args.input_path, "Observation file, or - for stdin");
  run->add_option("-c,--config", run_args.config_path, "Hypothesis config (JSON)")->required();
  run->add_option("--variant", run_args.variant, "full or rejective");
  run->add_option("--truncation", run_args.truncation, "Rejective horizon");
  run->add_option("--step", run_args.step, "Check boundaries every this many observations");
  run->add_option("--rho", run_args.rho, "Continuity correction");
  run->add_flag("--trace", run_args.trace, "Also print SAMPLE events");

  BhArgs bh_args;
  auto* bh = app.add_subcommand("bh", "Fixed-sample step-up rejection on a p-value list");
  bh->add_option("p_values", bh_args.p_values, "P-values, one per hypothesis")->required();
  bh->add_option("-a,--alpha", bh_args.alpha, "False discovery rate budget");
  bh->add_flag("--pretty", bh_args.pretty, "Explain each rejection");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (ladder->parsed()) return cmd_ladder(ladder_args);
    if (simulate->parsed()) return cmd_simulate(sim_args);
    if (run->parsed()) return cmd_run(run_args);
    if (bh->parsed()) return cmd_bh(bh_args);
    std::cerr << "error: no subcommand\n";
    return 2;
  } catch (const seqbh::stream_underrun& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 4;
  } catch (const seqbh::numerical_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}
