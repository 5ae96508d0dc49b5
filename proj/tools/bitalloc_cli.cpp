// Experiment driver. One subcommand per study; a JSON plan (--config)
// supplies everything, and the flags override individual plan fields.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "bitalloc/experiments.hpp"

namespace {

struct Overrides {
  std::string config;
  std::optional<int> trials;
  std::optional<std::string> solver;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<double> time_limit;
  std::optional<int> threads;
};

void add_flags(CLI::App& command, Overrides& o) {
  command.add_option("--config", o.config, "JSON experiment plan")->check(CLI::ExistingFile);
  command.add_option("--trials", o.trials, "number of trials per sweep value")
      ->check(CLI::PositiveNumber);
  command.add_option("--solver", o.solver, "relaxed solver")
      ->check(CLI::IsMember({"fw", "barrier", "both"}));
  command.add_option("--out", o.out, "per-trial CSV; summary and trace files go next to it");
  command.add_option("--seed", o.seed, "base seed; trial t uses seed + t");
  command.add_option("--time-limit", o.time_limit, "per-solve wall-clock limit in seconds")
      ->check(CLI::PositiveNumber);
  command.add_option("--threads", o.threads, "worker threads")->check(CLI::PositiveNumber);
}

bitalloc::ExperimentPlan build_plan(bitalloc::Experiment experiment, const Overrides& o) {
  bitalloc::ExperimentPlan plan =
      o.config.empty() ? bitalloc::default_plan(experiment) : bitalloc::load_plan(o.config);
  // The subcommand decides the experiment even if the plan names another.
  if (!o.config.empty() && plan.experiment != experiment) {
    std::cerr << "note: plan says '" << bitalloc::to_string(plan.experiment) << "', running '"
              << bitalloc::to_string(experiment) << "'\n";
    plan.experiment = experiment;
  }
  if (o.trials) plan.trials = *o.trials;
  if (o.solver) plan.solver = bitalloc::solver_from_string(*o.solver);
  if (o.out) plan.output_path = *o.out;
  if (o.seed) plan.instance.seed = *o.seed;
  if (o.time_limit) {
    plan.fw.time_limit = std::chrono::duration<double>(*o.time_limit);
    plan.barrier.time_limit = std::chrono::duration<double>(*o.time_limit);
  }
  if (o.threads) plan.threads = *o.threads;
  plan.validate();
  return plan;
}

void report_validation(const bitalloc::ExperimentResult& result) {
  int passed = 0;
  int total = 0;
  for (const bitalloc::Record& row : result.trials.records()) {
    const double mse_pass = row.number("mse_pass");
    const double mean_pass = row.number("mean_pass");
    if (std::isnan(mse_pass)) continue;
    ++total;
    passed += (mse_pass == 1.0 && mean_pass == 1.0) ? 1 : 0;
  }
  std::cerr << "validate: " << passed << "/" << total << " trials "
            << (passed == total && total > 0 ? "PASS" : "FAIL") << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bit allocation for quantized linear estimation: solvers and experiments"};
  app.require_subcommand(1);

  struct Command {
    bitalloc::Experiment experiment;
    const char* name;
    const char* help;
  };
  const Command commands[] = {
      {bitalloc::Experiment::kSolve, "solve", "solve and round each trial instance"},
      {bitalloc::Experiment::kCompareSolvers, "compare", "Frank-Wolfe against the barrier solver"},
      {bitalloc::Experiment::kRoundingGap, "rounding-gap", "rounding loss against its bound"},
      {bitalloc::Experiment::kUniformSweep, "uniform-sweep",
       "improvement over the uniform allocation across c = B/m"},
      {bitalloc::Experiment::kSensorScaling, "sensor-scaling", "solve time across m/d"},
      {bitalloc::Experiment::kValidate, "validate", "Monte-Carlo check of the quantization model"},
  };

  Overrides overrides;
  std::optional<bitalloc::Experiment> chosen;
  for (const Command& c : commands) {
    CLI::App* sub = app.add_subcommand(c.name, c.help);
    add_flags(*sub, overrides);
    sub->callback([&chosen, e = c.experiment] { chosen = e; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  bitalloc::ExperimentPlan plan;
  try {
    plan = build_plan(*chosen, overrides);
  } catch (const std::exception& e) {
    std::cerr << "plan error: " << e.what() << "\n";
    return 1;
  }

  const bitalloc::ExperimentResult result = bitalloc::run(plan);
  try {
    bitalloc::write_outputs(plan, result);
  } catch (const std::exception& e) {
    std::cerr << "output error: " << e.what() << "\n";
    return 1;
  }

  result.summary.write_csv(std::cout);
  std::cerr << result.completed << " trial rows ok, " << result.failed << " failed\n";
  for (const bitalloc::Record& row : result.trials.records()) {
    if (const auto* error = row.find("error")) {
      std::cerr << "  trial " << row.number("trial") << ": " << bitalloc::format_field(*error)
                << "\n";
    }
  }
  if (plan.experiment == bitalloc::Experiment::kValidate) report_validation(result);
  return result.exit_status;
}
