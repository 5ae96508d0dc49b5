#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "bitalloc/barrier.hpp"
#include "bitalloc/frank_wolfe.hpp"
#include "bitalloc/instances.hpp"
#include "bitalloc/records.hpp"

namespace bitalloc {

enum class Experiment {
  kSolve,           // one solve per trial, with rounding
  kCompareSolvers,  // FW and barrier on the same instance; sweep = d (= m)
  kRoundingGap,     // gap_actual / gap_bound; sweep = d (= m), optional
  kUniformSweep,    // improvement over floor(B/m); sweep = c = B/m
  kSensorScaling,   // solve time against m; sweep = m/d
  kValidate,        // Monte-Carlo check of the quantization model
};

enum class SolverChoice { kFrankWolfe, kBarrier, kBoth };

std::string_view to_string(Experiment experiment);
Experiment experiment_from_string(std::string_view name);
std::string_view to_string(SolverChoice solver);
SolverChoice solver_from_string(std::string_view name);

struct ExperimentPlan {
  Experiment experiment = Experiment::kSolve;
  InstanceSpec instance;
  int trials = 30;
  std::vector<double> sweep_values;
  SolverChoice solver = SolverChoice::kBarrier;
  std::filesystem::path output_path;
  int threads = 1;
  FwConfig fw;
  /// Start Frank-Wolfe at (B/m) 1 instead of 0. Every LMO vertex then lies on
  /// the face 1^T b = B, so the iterates stay budget-saturated.
  bool fw_uniform_start = false;
  BarrierConfig barrier;
  std::int64_t mc_samples = 100000;

  /// Throws kInvalidArgument on trials < 1, threads < 1, a sweep experiment
  /// without sweep values, or invalid solver/instance settings.
  void validate() const;
};

/// Harness defaults: Frank-Wolfe uses the adaptive Lipschitz step and the
/// saturated uniform start, since the short step with the global constant
/// from 0 barely moves on realistic instances.
ExperimentPlan default_plan(Experiment experiment);

/// Parses a JSON plan. Unknown keys are rejected so typos do not pass
/// silently. Missing keys keep the defaults of default_plan(experiment).
ExperimentPlan parse_plan(std::string_view json_text);
/// Like parse_plan; relative instance file paths resolve against the
/// plan's directory.
ExperimentPlan load_plan(const std::filesystem::path& path);

struct TraceEntry {
  int trial = 0;
  double sweep_value = 0.0;
  std::string solver;
  SolveTrace trace;
};

struct ExperimentResult {
  ResultTable trials;   // one row per (sweep value, trial[, solver])
  ResultTable summary;  // median and quartiles per (sweep value[, solver])
  std::vector<TraceEntry> traces;
  int completed = 0;
  int failed = 0;
  /// 0 when at least one trial succeeded, 2 when all failed.
  int exit_status = 0;
};

/// Runs every (sweep value, trial) task on plan.threads workers. Trial t
/// uses seed plan.instance.seed + t; rows come out in task order no matter
/// which worker finished first. A failing trial yields a row with
/// status=failed and is left out of the summary.
ExperimentResult run(const ExperimentPlan& plan);

/// Writes <out> (per-trial CSV), <out stem>.summary.csv and
/// <out stem>.trace.jsonl next to it.
void write_outputs(const ExperimentPlan& plan, const ExperimentResult& result);

/// Type-7 (linear interpolation) sample quantile; NaN for an empty sample.
double quantile(std::vector<double> values, double p);

}  // namespace bitalloc
