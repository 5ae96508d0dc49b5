#include "bitalloc/frank_wolfe.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace bitalloc {

std::string_view to_string(Termination termination) {
  switch (termination) {
    case Termination::kGapConverged: return "gap_converged";
    case Termination::kKktConverged: return "kkt_converged";
    case Termination::kMaxIterations: return "max_iterations";
    case Termination::kTimeLimit: return "time_limit";
  }
  return "unknown";
}

void FwConfig::validate() const {
  if (max_iterations < 1) {
    throw Error(ErrorCode::kInvalidArgument, "max_iterations must be >= 1");
  }
  if (!(gap_tolerance > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "gap_tolerance must be positive");
  }
  if (!(time_limit.count() > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "time_limit must be positive");
  }
  if (lipschitz_override && !(*lipschitz_override > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "lipschitz_override must be positive");
  }
}

Eigen::Index lmo_index(const Eigen::VectorXd& gradient) {
  if (gradient.size() == 0) {
    throw Error(ErrorCode::kInvalidArgument, "lmo: empty gradient");
  }
  if (!gradient.allFinite()) {
    throw Error(ErrorCode::kInvalidArgument, "lmo: non-finite gradient");
  }
  // Strict comparison keeps the lowest index on ties.
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < gradient.size(); ++i) {
    if (gradient(i) < gradient(best)) best = i;
  }
  return gradient(best) < 0.0 ? best : -1;
}

BitVector lmo(const Eigen::VectorXd& gradient, double budget) {
  const Eigen::Index index = lmo_index(gradient);
  Eigen::VectorXd vertex = Eigen::VectorXd::Zero(gradient.size());
  if (index >= 0) vertex(index) = budget;
  return BitVector::continuous(std::move(vertex));
}

double fw_gap(const Eigen::VectorXd& bits, const Eigen::VectorXd& gradient, double budget) {
  return bits.dot(gradient) - budget * std::min(0.0, gradient.minCoeff());
}

double fw_gap_via_vertex(const Eigen::VectorXd& bits, const Eigen::VectorXd& gradient,
                         double budget) {
  const BitVector vertex = lmo(gradient, budget);
  return (bits - vertex.bits).dot(gradient);
}

double fw_rate_bound(double h0, double lipschitz, double budget, int iterations_performed) {
  const double numerator = std::max(2.0 * h0, 2.0 * lipschitz * budget * budget);
  return numerator / std::sqrt(static_cast<double>(iterations_performed));
}

namespace {

// b + gamma (s - b) with s = B e_index (or 0 when index < 0).
Eigen::VectorXd fw_update(const Eigen::VectorXd& bits, Eigen::Index index, double budget,
                          double gamma) {
  Eigen::VectorXd next = (1.0 - gamma) * bits;
  if (index >= 0) next(index) += gamma * budget;
  return next;
}

}  // namespace

SolveTrace solve_fw(const ProblemInstance& instance, const FwConfig& config,
                    const std::optional<BitVector>& start) {
  config.validate();
  using Clock = std::chrono::steady_clock;
  const auto started = Clock::now();
  const auto elapsed = [&] { return std::chrono::duration<double>(Clock::now() - started).count(); };

  const double budget = instance.budget();
  const Eigen::Index m = instance.num_sensors();
  const double global_lipschitz = config.lipschitz_override.value_or(lipschitz_constant(instance));
  const double diameter_sq = 2.0 * budget * budget;

  Eigen::VectorXd bits = Eigen::VectorXd::Zero(m);
  if (start) {
    if (start->size() != m) {
      throw Error(ErrorCode::kDimensionMismatch, "start has length " +
                                                     std::to_string(start->size()) +
                                                     ", expected " + std::to_string(m));
    }
    if (!start->is_feasible(budget, 1e-12)) {
      throw Error(ErrorCode::kInfeasible, "start point is outside the budget set");
    }
    bits = start->bits;
  }

  SolveTrace trace;
  trace.lipschitz = global_lipschitz;
  trace.termination = Termination::kMaxIterations;

  const auto evaluate_at = [&](const Eigen::VectorXd& b, int iteration, bool gradient = true) {
    try {
      return gradient ? evaluate(instance, b) : evaluate_objective(instance, b);
    } catch (const Error& e) {
      throw Error(e.code(), std::string(e.what()) + " (frank-wolfe iteration " +
                                std::to_string(iteration) + ")");
    }
  };

  Evaluation current = evaluate_at(bits, 0);
  if (config.on_iterate) config.on_iterate(0, bits);
  const double initial_objective = current.objective;
  double best_objective = current.objective;
  double lipschitz_estimate = 1.0;
  bool returned_current = false;

  for (int t = 0; t < config.max_iterations; ++t) {
    const Eigen::Index vertex = lmo_index(current.gradient);
    const double gap = fw_gap(bits, current.gradient, budget);

    IterationRecord record;
    record.iteration = t;
    record.objective = current.objective;
    record.gap = gap;
    record.vertex = static_cast<int>(vertex);
    trace.min_gap = std::min(trace.min_gap, gap);

    if (gap <= config.gap_tolerance) {
      record.elapsed_seconds = elapsed();
      trace.iterates.push_back(record);
      trace.termination = Termination::kGapConverged;
      returned_current = true;
      break;
    }

    double gamma = 0.0;
    std::optional<Evaluation> accepted;
    if (config.step_rule == StepRule::kShortStep || diameter_sq == 0.0) {
      gamma = diameter_sq == 0.0 ? 0.0 : std::min(gap / (global_lipschitz * diameter_sq), 1.0);
      record.lipschitz_estimate = global_lipschitz;
    } else {
      // Halve, then double until sufficient decrease; never exceed the global L.
      lipschitz_estimate = std::min(0.5 * lipschitz_estimate, global_lipschitz);
      while (true) {
        gamma = std::min(gap / (lipschitz_estimate * diameter_sq), 1.0);
        std::optional<Evaluation> trial;
        try {
          trial = evaluate_at(fw_update(bits, vertex, budget, gamma), t + 1, false);
        } catch (const Error& e) {
          // A long step toward B e_i can push rho_i past what a Cholesky of M
          // survives in double (or past the 4^b guard). F itself is fine
          // there, the step is just too long: treat it as a rejection.
          const bool numeric = e.code() == ErrorCode::kNotPositiveDefinite ||
                               e.code() == ErrorCode::kBitOverflow;
          if (!numeric || lipschitz_estimate >= global_lipschitz) throw;
          lipschitz_estimate = std::min(2.0 * lipschitz_estimate, global_lipschitz);
          continue;
        }
        if (trial->objective <= current.objective - 0.5 * gamma * gap ||
            lipschitz_estimate >= global_lipschitz) {
          accepted = std::move(trial);
          break;
        }
        lipschitz_estimate = std::min(2.0 * lipschitz_estimate, global_lipschitz);
      }
      record.lipschitz_estimate = lipschitz_estimate;
    }
    record.step = gamma;
    record.elapsed_seconds = elapsed();
    trace.iterates.push_back(record);

    bits = fw_update(bits, vertex, budget, gamma);
    if (config.on_iterate) config.on_iterate(t + 1, bits);
    if (accepted) {
      complete_gradient(instance, *accepted);
      current = std::move(*accepted);
    } else {
      current = evaluate_at(bits, t + 1);
    }
    best_objective = std::min(best_objective, current.objective);

    if (elapsed() >= config.time_limit.count()) {
      trace.termination = Termination::kTimeLimit;
      break;
    }
  }

  trace.final_bits = BitVector::continuous(bits);
  trace.final_objective = current.objective;
  if (!returned_current) best_objective = std::min(best_objective, current.objective);
  trace.h0_estimate = initial_objective - best_objective;
  trace.rate_bound =
      fw_rate_bound(trace.h0_estimate, global_lipschitz, budget, trace.iterations());
  trace.elapsed_seconds = elapsed();
  return trace;
}

}  // namespace bitalloc
