#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "bitalloc/experiments.hpp"

namespace {

using bitalloc::Experiment;
using bitalloc::ExperimentPlan;

const std::filesystem::path kData = BITALLOC_TEST_DATA;

ExperimentPlan small_plan(Experiment experiment) {
  ExperimentPlan plan = bitalloc::default_plan(experiment);
  plan.trials = 3;
  plan.instance.d = plan.instance.m = 8;
  plan.instance.seed = 100;
  plan.sweep_values.clear();
  return plan;
}

TEST(Plan, ParseAndDefaults) {
  const ExperimentPlan plan = bitalloc::parse_plan(R"({
    "experiment": "uniform-sweep", "trials": 4, "sweep_values": [2, 3],
    "instance": {"kind": "random_gaussian", "d": 6, "m": 9, "seed": 5, "kappa": {"low": 0.9, "high": 1.1}},
    "fw": {"max_iterations": 50, "step_rule": "short", "start": "zero"},
    "barrier": {"mu_final": 1e-8},
    "solver": "both", "threads": 2
  })");
  EXPECT_EQ(plan.experiment, Experiment::kUniformSweep);
  EXPECT_EQ(plan.trials, 4);
  EXPECT_EQ(plan.sweep_values, (std::vector<double>{2, 3}));
  EXPECT_EQ(plan.instance.kind, bitalloc::InstanceKind::kRandomGaussian);
  EXPECT_EQ(plan.instance.m, 9);
  EXPECT_EQ(plan.instance.kappa.low, 0.9);
  EXPECT_EQ(plan.fw.max_iterations, 50);
  EXPECT_EQ(plan.fw.step_rule, bitalloc::StepRule::kShortStep);
  EXPECT_FALSE(plan.fw_uniform_start);
  EXPECT_EQ(plan.barrier.mu_final, 1e-8);
  EXPECT_EQ(plan.solver, bitalloc::SolverChoice::kBoth);
  EXPECT_EQ(plan.threads, 2);

  const ExperimentPlan defaults = bitalloc::parse_plan(R"({"experiment": "compare"})");
  EXPECT_EQ(defaults.trials, 30);
  EXPECT_EQ(defaults.solver, bitalloc::SolverChoice::kBoth);
  EXPECT_TRUE(defaults.fw_uniform_start);
}

TEST(Plan, Rejections) {
  EXPECT_THROW(bitalloc::parse_plan(R"({"experiment": "solve", "trails": 3})"), bitalloc::Error);
  EXPECT_THROW(bitalloc::parse_plan(R"({"experiment": "solve", "fw": {"gap": 1}})"), bitalloc::Error);
  // Parsing keeps out-of-range values so CLI flags can still override them;
  // validate() rejects them.
  EXPECT_THROW(bitalloc::parse_plan(R"({"experiment": "solve", "trials": 0})").validate(),
               bitalloc::Error);
  EXPECT_THROW(
      bitalloc::parse_plan(R"({"experiment": "uniform-sweep", "sweep_values": []})").validate(),
      bitalloc::Error);
  EXPECT_THROW(bitalloc::parse_plan(R"({"experiment": "dance"})"), bitalloc::Error);
  EXPECT_THROW(bitalloc::parse_plan(R"({"experiment": "solve",)"), bitalloc::Error);
  EXPECT_THROW(bitalloc::parse_plan(R"({"experiment": "solve", "trials": "many"})"), bitalloc::Error);
}

TEST(Plan, LoadResolvesPathsAgainstPlanDirectory) {
  const ExperimentPlan plan = bitalloc::load_plan(kData / "plan_files.json");
  EXPECT_EQ(std::filesystem::path(plan.instance.paths.sensing), kData / "sensing_2x2.csv");
  const auto result = bitalloc::run(plan);
  EXPECT_EQ(result.exit_status, 0);
  EXPECT_EQ(result.completed, 1);
}

TEST(Quantile, TypeSeven) {
  EXPECT_EQ(bitalloc::quantile({3, 1, 2}, 0.5), 2.0);
  EXPECT_EQ(bitalloc::quantile({1, 2, 3, 4}, 0.5), 2.5);
  EXPECT_EQ(bitalloc::quantile({1, 2, 3, 4, 5}, 0.25), 2.0);
  EXPECT_DOUBLE_EQ(bitalloc::quantile({1, 2, 3, 4}, 0.25), 1.75);
  EXPECT_TRUE(std::isnan(bitalloc::quantile({}, 0.5)));
}

TEST(Run, SolveRowsAndSummary) {
  ExperimentPlan plan = small_plan(Experiment::kSolve);
  plan.solver = bitalloc::SolverChoice::kBoth;
  const auto result = bitalloc::run(plan);
  ASSERT_EQ(result.trials.records().size(), 6u);
  EXPECT_EQ(result.completed, 6);
  for (const auto& row : result.trials.records()) {
    EXPECT_EQ(row.number("seed"), 100 + row.number("trial"));
    EXPECT_LE(row.number("gap_actual"), row.number("gap_bound") + 1e-9);
    EXPECT_NEAR(row.number("rounded_objective") - row.number("rounded_from_objective"),
                row.number("gap_actual"), 1e-12);
  }
  ASSERT_EQ(result.summary.records().size(), 2u);
  const auto& summary = result.summary.records().front();
  EXPECT_EQ(summary.number("trials_ok"), 3.0);
  EXPECT_LE(summary.number("objective_q1"), summary.number("objective_median"));
  EXPECT_LE(summary.number("objective_median"), summary.number("objective_q3"));
  EXPECT_EQ(result.traces.size(), 6u);
}

TEST(Run, ThreadCountDoesNotChangeResults) {
  ExperimentPlan plan = small_plan(Experiment::kCompareSolvers);
  plan.fw.max_iterations = 300;
  const auto serial = bitalloc::run(plan);
  plan.threads = 3;
  const auto parallel = bitalloc::run(plan);
  EXPECT_EQ(serial.trials.to_csv(false), parallel.trials.to_csv(false));
  EXPECT_EQ(serial.summary.to_csv(false), parallel.summary.to_csv(false));
}

TEST(Run, UniformSweepImprovement) {
  ExperimentPlan plan = small_plan(Experiment::kUniformSweep);
  plan.sweep_values = {2, 4};
  const auto result = bitalloc::run(plan);
  for (const auto& row : result.trials.records()) {
    EXPECT_NEAR(row.number("improvement_percent"),
                100.0 * (row.number("uniform_objective") - row.number("rounded_objective")) /
                    row.number("uniform_objective"),
                1e-9);
    EXPECT_EQ(row.number("budget"), row.number("sweep_value") * 8);
  }
}

TEST(Run, SensorScalingSetsM) {
  ExperimentPlan plan = bitalloc::default_plan(Experiment::kSensorScaling);
  plan.trials = 1;
  plan.sweep_values = {5, 20};
  plan.fw.max_iterations = 20;
  const auto result = bitalloc::run(plan);
  ASSERT_EQ(result.trials.records().size(), 2u);
  EXPECT_EQ(result.trials.records()[0].number("m"), 50.0);
  EXPECT_EQ(result.trials.records()[1].number("m"), 200.0);
}

TEST(Run, ValidateReportsPass) {
  ExperimentPlan plan = bitalloc::default_plan(Experiment::kValidate);
  plan.mc_samples = 20000;
  const auto result = bitalloc::run(plan);
  ASSERT_EQ(result.trials.records().size(), 1u);
  const auto& row = result.trials.records().front();
  EXPECT_EQ(row.number("mse_pass"), 1.0);
  EXPECT_EQ(row.number("mean_pass"), 1.0);
}

TEST(Run, FailuresAreRecordedAndCounted) {
  ExperimentPlan plan = bitalloc::parse_plan(R"({
    "experiment": "solve", "trials": 2,
    "instance": {"kind": "from_files", "paths": {"sensing": "/nonexistent/h.csv"}}})");
  const auto result = bitalloc::run(plan);
  EXPECT_EQ(result.failed, 2);
  EXPECT_EQ(result.exit_status, 2);
  for (const auto& row : result.trials.records()) {
    ASSERT_NE(row.find("error"), nullptr);
  }
}

TEST(Run, OutputsAreWritten) {
  ExperimentPlan plan = small_plan(Experiment::kRoundingGap);
  plan.trials = 2;
  const auto dir = std::filesystem::temp_directory_path() / "bitalloc_experiments_test";
  std::filesystem::remove_all(dir);
  plan.output_path = dir / "gap.csv";
  const auto result = bitalloc::run(plan);
  bitalloc::write_outputs(plan, result);
  EXPECT_TRUE(std::filesystem::exists(dir / "gap.csv"));
  EXPECT_TRUE(std::filesystem::exists(dir / "gap.summary.csv"));
  std::ifstream trace(dir / "gap.trace.jsonl");
  std::string first;
  ASSERT_TRUE(std::getline(trace, first));
  EXPECT_NE(first.find("\"solver\":\"barrier\""), std::string::npos);
}

}  // namespace
