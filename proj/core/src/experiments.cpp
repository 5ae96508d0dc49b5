#include "bitalloc/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "bitalloc/quantizer.hpp"
#include "bitalloc/rounding.hpp"

namespace bitalloc {

namespace {

using json = nlohmann::json;

bool needs_sweep(Experiment e) {
  return e == Experiment::kUniformSweep || e == Experiment::kSensorScaling;
}

// ---- plan parsing ---------------------------------------------------------

void reject_unknown(const json& object, std::string_view where,
                    std::initializer_list<std::string_view> allowed) {
  if (!object.is_object()) {
    throw Error(ErrorCode::kParse, std::string(where) + " must be a JSON object");
  }
  for (const auto& [key, value] : object.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw Error(ErrorCode::kParse, "unknown key '" + key + "' in " + std::string(where));
    }
  }
}

template <typename T>
void read(const json& object, const char* key, T& target) {
  if (!object.contains(key)) return;
  try {
    target = object.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("bad value for '") + key + "': " + e.what());
  }
}

void read_seconds(const json& object, const char* key, std::chrono::duration<double>& target) {
  double seconds = target.count();
  read(object, key, seconds);
  target = std::chrono::duration<double>(seconds);
}

void parse_instance(const json& node, InstanceSpec& spec) {
  reject_unknown(node, "instance",
                 {"kind", "d", "m", "kappa", "budget_per_sensor", "budget", "seed", "paths"});
  if (node.contains("kind")) spec.kind = instance_kind_from_string(node.at("kind").get<std::string>());
  read(node, "d", spec.d);
  read(node, "m", spec.m);
  if (node.contains("kappa")) {
    const json& kappa = node.at("kappa");
    reject_unknown(kappa, "instance.kappa", {"low", "high"});
    read(kappa, "low", spec.kappa.low);
    read(kappa, "high", spec.kappa.high);
  }
  read(node, "budget_per_sensor", spec.budget_per_sensor);
  if (node.contains("budget")) {
    double budget = 0.0;
    read(node, "budget", budget);
    spec.budget = budget;
  }
  read(node, "seed", spec.seed);
  if (node.contains("paths")) {
    const json& paths = node.at("paths");
    reject_unknown(paths, "instance.paths", {"sensing", "prior", "kappa", "ranges"});
    read(paths, "sensing", spec.paths.sensing);
    read(paths, "prior", spec.paths.prior);
    read(paths, "kappa", spec.paths.kappa);
    read(paths, "ranges", spec.paths.ranges);
  }
}

void parse_fw(const json& node, ExperimentPlan& plan) {
  reject_unknown(node, "fw", {"max_iterations", "gap_tolerance", "time_limit", "step_rule",
                              "lipschitz", "start"});
  FwConfig& fw = plan.fw;
  if (node.contains("start")) {
    const std::string start = node.at("start").get<std::string>();
    if (start != "zero" && start != "uniform") {
      throw Error(ErrorCode::kParse, "fw.start must be 'zero' or 'uniform', got '" + start + "'");
    }
    plan.fw_uniform_start = start == "uniform";
  }
  read(node, "max_iterations", fw.max_iterations);
  read(node, "gap_tolerance", fw.gap_tolerance);
  read_seconds(node, "time_limit", fw.time_limit);
  if (node.contains("step_rule")) {
    const std::string rule = node.at("step_rule").get<std::string>();
    if (rule == "short") {
      fw.step_rule = StepRule::kShortStep;
    } else if (rule == "adaptive") {
      fw.step_rule = StepRule::kAdaptiveLipschitz;
    } else {
      throw Error(ErrorCode::kParse, "fw.step_rule must be 'short' or 'adaptive', got '" + rule + "'");
    }
  }
  if (node.contains("lipschitz")) {
    double value = 0.0;
    read(node, "lipschitz", value);
    fw.lipschitz_override = value;
  }
}

void parse_barrier(const json& node, BarrierConfig& barrier) {
  reject_unknown(node, "barrier",
                 {"mu_initial", "mu_decrease_factor", "mu_final", "inner_gradient_tolerance",
                  "lbfgs_memory", "max_inner_iterations", "time_limit"});
  read(node, "mu_initial", barrier.mu_initial);
  read(node, "mu_decrease_factor", barrier.mu_decrease_factor);
  read(node, "mu_final", barrier.mu_final);
  read(node, "inner_gradient_tolerance", barrier.inner_gradient_tolerance);
  read(node, "lbfgs_memory", barrier.lbfgs_memory);
  read(node, "max_inner_iterations", barrier.max_inner_iterations);
  read_seconds(node, "time_limit", barrier.time_limit);
}

// ---- per-trial work -------------------------------------------------------

struct Task {
  int index = 0;
  int trial = 0;
  double sweep_value = std::numeric_limits<double>::quiet_NaN();
  std::uint64_t seed = 0;
};

struct TaskOutput {
  std::vector<Record> rows;
  std::vector<TraceEntry> traces;
};

InstanceSpec spec_for(const ExperimentPlan& plan, const Task& task) {
  InstanceSpec spec = plan.instance;
  spec.seed = task.seed;
  if (std::isnan(task.sweep_value)) return spec;
  switch (plan.experiment) {
    case Experiment::kCompareSolvers:
    case Experiment::kRoundingGap:
    case Experiment::kSolve:
    case Experiment::kValidate:
      spec.d = spec.m = static_cast<Eigen::Index>(std::llround(task.sweep_value));
      break;
    case Experiment::kUniformSweep:
      spec.budget_per_sensor = task.sweep_value;
      spec.budget.reset();
      break;
    case Experiment::kSensorScaling:
      spec.m = static_cast<Eigen::Index>(std::llround(task.sweep_value * static_cast<double>(spec.d)));
      break;
  }
  return spec;
}

struct SolverRun {
  std::string name;
  SolveTrace trace;
  bool kkt = false;
};

SolverRun run_solver(const ProblemInstance& instance, const ExperimentPlan& plan, bool barrier) {
  if (barrier) {
    BarrierResult result = solve_barrier(instance, plan.barrier);
    return {"barrier", std::move(result.trace), true};
  }
  std::optional<BitVector> start;
  if (plan.fw_uniform_start) {
    start = BitVector::continuous(Eigen::VectorXd::Constant(
        instance.num_sensors(), instance.budget() / static_cast<double>(instance.num_sensors())));
  }
  return {"fw", solve_fw(instance, plan.fw, start), false};
}

std::vector<bool> solver_list(SolverChoice choice) {
  switch (choice) {
    case SolverChoice::kFrankWolfe: return {false};
    case SolverChoice::kBarrier: return {true};
    case SolverChoice::kBoth: return {false, true};
  }
  return {true};
}

bool integral_budget(double budget) { return std::abs(budget - std::round(budget)) <= 1e-9; }

// F is decreasing in every coordinate, so scaling an unsaturated FW iterate
// up to the budget can only lower the objective. Rounding needs 1^T b = B.
BitVector saturate(const BitVector& bits, double budget) {
  const double total = bits.total();
  if (total <= 0.0 || total >= budget) return bits;
  return BitVector::continuous(bits.bits * (budget / total));
}

void record_solution(Record& row, const std::string& prefix, const ProblemInstance& instance,
                     const SolverRun& run) {
  const SolveTrace& trace = run.trace;
  const double budget = instance.budget();
  const int iterations = std::max(trace.iterations(), 1);
  row.set(prefix + "objective", trace.final_objective)
      .set(prefix + "iterations", static_cast<std::int64_t>(trace.iterations()))
      .set(prefix + "termination", std::string(to_string(trace.termination)))
      .set(prefix + "budget_slack", budget - trace.final_bits.total())
      .set(prefix + "solve_seconds", trace.elapsed_seconds)
      .set(prefix + "seconds_per_iteration", trace.elapsed_seconds / iterations);
  if (!run.kkt) {
    row.set(prefix + "min_gap", trace.min_gap)
        .set(prefix + "rate_bound", trace.rate_bound)
        .set(prefix + "certificate", static_cast<std::int64_t>(trace.certificate_holds()));
  }

  if (!integral_budget(budget) || budget <= 0.0) {
    row.set(prefix + "rounding", std::string("skipped"));
    return;
  }
  const BitVector continuous = run.kkt ? trace.final_bits : saturate(trace.final_bits, budget);
  const RoundingReport report = rounding_report(instance, continuous);
  row.set(prefix + "rounding", std::string("ok"))
      .set(prefix + "rounded_objective", trace.final_objective + report.gap_actual)
      .set(prefix + "gap_actual", report.gap_actual)
      .set(prefix + "gap_bound", report.gap_bound)
      .set(prefix + "gap_ratio", report.gap_actual / report.gap_bound)
      .set(prefix + "simplified_gap_bound", report.simplified_gap_bound)
      .set(prefix + "distance_squared", report.distance_squared)
      .set(prefix + "distance_bound", report.distance_bound)
      .set(prefix + "residual_budget", report.residual_budget)
      .set(prefix + "rounded_bits", format_vector(report.rounded_bits.bits));
  // Objective before rounding of the point that was actually rounded.
  row.set(prefix + "rounded_from_objective",
          evaluate(instance, continuous).objective);
}

Record base_row(const ExperimentPlan& plan, const Task& task, const ProblemInstance& instance) {
  Record row;
  row.set("experiment", std::string(to_string(plan.experiment)))
      .set("trial", static_cast<std::int64_t>(task.trial))
      .set("seed", static_cast<std::int64_t>(task.seed))
      .set("sweep_value", task.sweep_value)
      .set("d", static_cast<std::int64_t>(instance.state_dim()))
      .set("m", static_cast<std::int64_t>(instance.num_sensors()))
      .set("budget", instance.budget())
      .set("status", std::string("ok"));
  return row;
}

TaskOutput run_compare(const ExperimentPlan& plan, const Task& task, const ProblemInstance& instance) {
  TaskOutput out;
  Record row = base_row(plan, task, instance);
  const SolverRun fw = run_solver(instance, plan, false);
  const SolverRun barrier = run_solver(instance, plan, true);
  record_solution(row, "fw_", instance, fw);
  record_solution(row, "barrier_", instance, barrier);
  row.set("relative_difference", std::abs(fw.trace.final_objective - barrier.trace.final_objective) /
                                     barrier.trace.final_objective);
  out.rows.push_back(std::move(row));
  out.traces.push_back({task.trial, task.sweep_value, fw.name, fw.trace});
  out.traces.push_back({task.trial, task.sweep_value, barrier.name, barrier.trace});
  return out;
}

TaskOutput run_solves(const ExperimentPlan& plan, const Task& task, const ProblemInstance& instance) {
  TaskOutput out;
  std::optional<double> uniform_objective;
  if (plan.experiment == Experiment::kUniformSweep) {
    uniform_objective = evaluate(instance, uniform_allocation(instance)).objective;
  }
  for (const bool barrier : solver_list(plan.solver)) {
    Record row = base_row(plan, task, instance);
    const SolverRun run = run_solver(instance, plan, barrier);
    row.set("solver", run.name);
    record_solution(row, "", instance, run);
    if (uniform_objective) {
      const double uniform = *uniform_objective;
      const double rounded = row.number("rounded_objective");
      row.set("uniform_objective", uniform)
          .set("improvement_percent", 100.0 * (uniform - rounded) / uniform)
          .set("continuous_improvement_percent",
               100.0 * (uniform - run.trace.final_objective) / uniform);
    }
    out.rows.push_back(std::move(row));
    out.traces.push_back({task.trial, task.sweep_value, run.name, run.trace});
  }
  return out;
}

// The quantization model is checked at the uniform allocation, in both
// dither modes. Pass criteria: subtractive MSE within 3 standard errors of
// tr(C_eps); non-subtractive per-channel mean error within 4 standard errors.
TaskOutput run_validate(const ExperimentPlan& plan, const Task& task, const ProblemInstance& instance) {
  TaskOutput out;
  Record row = base_row(plan, task, instance);
  const BitVector bits = uniform_allocation(instance);
  const auto start = std::chrono::steady_clock::now();

  const MonteCarloReport subtractive = simulate_lmmse(
      instance, bits, plan.mc_samples,
      QuantizerBank::for_allocation(instance, bits.bits, DitherMode::kSubtractive, task.seed));
  const MonteCarloReport plain = simulate_lmmse(
      instance, bits, plan.mc_samples,
      QuantizerBank::for_allocation(instance, bits.bits, DitherMode::kNonSubtractive, task.seed));

  const double mse_z =
      std::abs(subtractive.empirical_mse - subtractive.analytic_mse) / subtractive.standard_error;
  const double mean_z =
      (plain.empirical_error_mean.array().abs() / plain.error_mean_standard_error.array()).maxCoeff();
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  row.set("samples", plan.mc_samples)
      .set("analytic_mse", subtractive.analytic_mse)
      .set("empirical_mse", subtractive.empirical_mse)
      .set("mse_standard_error", subtractive.standard_error)
      .set("mse_z", mse_z)
      .set("max_mean_error_z", mean_z)
      .set("nonsubtractive_mse", plain.empirical_mse)
      .set("ks_distance", subtractive.uniformity_ks_distance)
      .set("mse_pass", static_cast<std::int64_t>(mse_z <= 3.0))
      .set("mean_pass", static_cast<std::int64_t>(mean_z <= 4.0))
      .set("simulate_seconds", seconds);
  out.rows.push_back(std::move(row));
  return out;
}

TaskOutput run_task(const ExperimentPlan& plan, const Task& task) {
  const ProblemInstance instance = generate(spec_for(plan, task));
  switch (plan.experiment) {
    case Experiment::kCompareSolvers: return run_compare(plan, task, instance);
    case Experiment::kValidate: return run_validate(plan, task, instance);
    default: return run_solves(plan, task, instance);
  }
}

Record failure_row(const ExperimentPlan& plan, const Task& task, const std::string& message) {
  Record row;
  row.set("experiment", std::string(to_string(plan.experiment)))
      .set("trial", static_cast<std::int64_t>(task.trial))
      .set("seed", static_cast<std::int64_t>(task.seed))
      .set("sweep_value", task.sweep_value)
      .set("status", std::string("failed"))
      .set("error", message);
  return row;
}

// ---- summary --------------------------------------------------------------

const std::set<std::string, std::less<>> kIdentifierColumns = {"trial", "seed", "sweep_value",
                                                                "d", "m", "budget"};

ResultTable summarize(const std::vector<Record>& rows) {
  // Group key: (sweep value, solver). Groups keep first-seen order.
  std::vector<std::pair<std::pair<double, std::string>, std::vector<const Record*>>> groups;
  for (const Record& row : rows) {
    const FieldValue* status = row.find("status");
    if (status == nullptr || std::get<std::string>(*status) != "ok") continue;
    const FieldValue* solver = row.find("solver");
    const std::pair<double, std::string> key{
        row.number("sweep_value"), solver ? std::get<std::string>(*solver) : std::string()};
    auto it = std::find_if(groups.begin(), groups.end(), [&](const auto& g) {
      const bool same_value = g.first.first == key.first ||
                              (std::isnan(g.first.first) && std::isnan(key.first));
      return same_value && g.first.second == key.second;
    });
    if (it == groups.end()) {
      groups.push_back({key, {}});
      it = std::prev(groups.end());
    }
    it->second.push_back(&row);
  }

  ResultTable table;
  for (const auto& [key, members] : groups) {
    Record out;
    out.set("sweep_value", key.first);
    if (!key.second.empty()) out.set("solver", key.second);
    out.set("trials_ok", static_cast<std::int64_t>(members.size()));
    const Record& first = *members.front();
    out.set("d", first.number("d")).set("m", first.number("m"));
    for (const auto& [name, value] : first.fields()) {
      if (kIdentifierColumns.contains(name) || std::holds_alternative<std::string>(value)) continue;
      std::vector<double> sample;
      for (const Record* member : members) {
        const double v = member->number(name);
        if (!std::isnan(v)) sample.push_back(v);
      }
      const double q1 = quantile(sample, 0.25);
      const double q3 = quantile(sample, 0.75);
      out.set(name + "_median", quantile(sample, 0.5))
          .set(name + "_q1", q1)
          .set(name + "_q3", q3)
          .set(name + "_iqr", q3 - q1);
    }
    table.add(std::move(out));
  }
  return table;
}

std::filesystem::path sibling(const std::filesystem::path& path, const std::string& suffix) {
  std::filesystem::path out = path;
  out.replace_filename(path.stem().string() + suffix);
  return out;
}

}  // namespace

std::string_view to_string(Experiment experiment) {
  switch (experiment) {
    case Experiment::kSolve: return "solve";
    case Experiment::kCompareSolvers: return "compare";
    case Experiment::kRoundingGap: return "rounding-gap";
    case Experiment::kUniformSweep: return "uniform-sweep";
    case Experiment::kSensorScaling: return "sensor-scaling";
    case Experiment::kValidate: return "validate";
  }
  return "unknown";
}

Experiment experiment_from_string(std::string_view name) {
  for (const Experiment e :
       {Experiment::kSolve, Experiment::kCompareSolvers, Experiment::kRoundingGap,
        Experiment::kUniformSweep, Experiment::kSensorScaling, Experiment::kValidate}) {
    if (to_string(e) == name) return e;
  }
  throw Error(ErrorCode::kParse, "unknown experiment '" + std::string(name) + "'");
}

std::string_view to_string(SolverChoice solver) {
  switch (solver) {
    case SolverChoice::kFrankWolfe: return "fw";
    case SolverChoice::kBarrier: return "barrier";
    case SolverChoice::kBoth: return "both";
  }
  return "unknown";
}

SolverChoice solver_from_string(std::string_view name) {
  if (name == "fw") return SolverChoice::kFrankWolfe;
  if (name == "barrier") return SolverChoice::kBarrier;
  if (name == "both") return SolverChoice::kBoth;
  throw Error(ErrorCode::kParse, "solver must be fw, barrier or both, got '" + std::string(name) + "'");
}

void ExperimentPlan::validate() const {
  if (trials < 1) throw Error(ErrorCode::kInvalidArgument, "trials must be >= 1");
  if (threads < 1) throw Error(ErrorCode::kInvalidArgument, "threads must be >= 1");
  if (needs_sweep(experiment) && sweep_values.empty()) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string(to_string(experiment)) + " needs a nonempty sweep_values list");
  }
  for (const double v : sweep_values) {
    if (!std::isfinite(v) || v <= 0.0) {
      throw Error(ErrorCode::kInvalidArgument, "sweep values must be positive and finite");
    }
  }
  if (experiment == Experiment::kValidate && mc_samples < 2) {
    throw Error(ErrorCode::kInvalidArgument, "mc_samples must be >= 2");
  }
  if (experiment == Experiment::kSensorScaling && instance.kind != InstanceKind::kRandomGaussian) {
    throw Error(ErrorCode::kInvalidArgument, "sensor-scaling varies m at fixed d and needs kind "
                                             "random_gaussian");
  }
  if (instance.kind == InstanceKind::kGridLaplacian && instance.d != instance.m) {
    throw Error(ErrorCode::kInvalidArgument, "grid_laplacian instances have m = d");
  }
  instance.validate();
  fw.validate();
  barrier.validate();
}

ExperimentPlan default_plan(Experiment experiment) {
  ExperimentPlan plan;
  plan.experiment = experiment;
  plan.fw.step_rule = StepRule::kAdaptiveLipschitz;
  plan.fw_uniform_start = true;
  switch (experiment) {
    case Experiment::kCompareSolvers:
      plan.solver = SolverChoice::kBoth;
      plan.fw.max_iterations = 5000;
      plan.fw.gap_tolerance = 1e-7;
      break;
    case Experiment::kUniformSweep:
      plan.instance.d = plan.instance.m = 50;
      plan.sweep_values = {2, 3, 4, 5, 7};
      break;
    case Experiment::kSensorScaling:
      plan.instance.kind = InstanceKind::kRandomGaussian;
      plan.instance.d = 10;
      plan.sweep_values = {5, 50, 500};
      plan.solver = SolverChoice::kFrankWolfe;
      break;
    case Experiment::kValidate:
      plan.instance.kind = InstanceKind::kRandomGaussian;
      plan.instance.d = 5;
      plan.instance.m = 8;
      plan.trials = 1;
      break;
    default:
      break;
  }
  return plan;
}

ExperimentPlan parse_plan(std::string_view json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kParse, std::string("plan is not valid JSON: ") + e.what());
  }
  reject_unknown(root, "plan",
                 {"experiment", "instance", "trials", "sweep_values", "solver", "output", "threads",
                  "fw", "barrier", "mc_samples"});
  Experiment experiment = Experiment::kSolve;
  if (root.contains("experiment")) {
    experiment = experiment_from_string(root.at("experiment").get<std::string>());
  }
  ExperimentPlan plan = default_plan(experiment);
  if (root.contains("instance")) parse_instance(root.at("instance"), plan.instance);
  read(root, "trials", plan.trials);
  read(root, "sweep_values", plan.sweep_values);
  if (root.contains("solver")) plan.solver = solver_from_string(root.at("solver").get<std::string>());
  if (root.contains("output")) plan.output_path = root.at("output").get<std::string>();
  read(root, "threads", plan.threads);
  if (root.contains("fw")) parse_fw(root.at("fw"), plan);
  if (root.contains("barrier")) parse_barrier(root.at("barrier"), plan.barrier);
  read(root, "mc_samples", plan.mc_samples);
  return plan;
}

ExperimentPlan load_plan(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open plan " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  ExperimentPlan plan;
  try {
    plan = parse_plan(text.str());
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
  // Relative instance files are taken relative to the plan, not the cwd.
  const std::filesystem::path base = path.parent_path();
  for (std::string* file : {&plan.instance.paths.sensing, &plan.instance.paths.prior,
                            &plan.instance.paths.kappa, &plan.instance.paths.ranges}) {
    if (!file->empty() && std::filesystem::path(*file).is_relative()) {
      *file = (base / *file).string();
    }
  }
  return plan;
}

ExperimentResult run(const ExperimentPlan& plan) {
  plan.validate();

  std::vector<Task> tasks;
  const std::vector<double> values =
      plan.sweep_values.empty() ? std::vector<double>{std::numeric_limits<double>::quiet_NaN()}
                                : plan.sweep_values;
  for (const double value : values) {
    for (int t = 0; t < plan.trials; ++t) {
      tasks.push_back({static_cast<int>(tasks.size()), t, value,
                       plan.instance.seed + static_cast<std::uint64_t>(t)});
    }
  }

  std::vector<TaskOutput> outputs(tasks.size());
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t k = next++; k < tasks.size(); k = next++) {
      try {
        outputs[k] = run_task(plan, tasks[k]);
      } catch (const std::exception& e) {
        outputs[k] = TaskOutput{{failure_row(plan, tasks[k], e.what())}, {}};
      }
    }
  };
  const int workers = std::min<int>(plan.threads, static_cast<int>(tasks.size()));
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  }

  ExperimentResult result;
  std::vector<Record> rows;
  for (TaskOutput& output : outputs) {
    for (Record& row : output.rows) {
      const FieldValue* status = row.find("status");
      (std::get<std::string>(*status) == "ok" ? result.completed : result.failed)++;
      rows.push_back(row);
      result.trials.add(std::move(row));
    }
    for (TraceEntry& trace : output.traces) result.traces.push_back(std::move(trace));
  }
  result.summary = summarize(rows);
  result.exit_status = result.completed == 0 ? 2 : 0;
  return result;
}

void write_outputs(const ExperimentPlan& plan, const ExperimentResult& result) {
  if (plan.output_path.empty()) return;
  save_results(plan.output_path, result.trials);
  save_results(sibling(plan.output_path, ".summary.csv"), result.summary);
  if (result.traces.empty()) return;
  const std::filesystem::path trace_path = sibling(plan.output_path, ".trace.jsonl");
  std::ofstream out(trace_path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + trace_path.string());
  for (const TraceEntry& entry : result.traces) {
    write_trace_jsonl(out, entry.trace, entry.trial, entry.solver);
  }
}

double quantile(std::vector<double> values, double p) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  const double position = p * static_cast<double>(values.size() - 1);
  const auto lower = static_cast<std::size_t>(std::floor(position));
  const std::size_t upper = std::min(lower + 1, values.size() - 1);
  const double fraction = position - static_cast<double>(lower);
  return values[lower] + fraction * (values[upper] - values[lower]);
}

}  // namespace bitalloc
