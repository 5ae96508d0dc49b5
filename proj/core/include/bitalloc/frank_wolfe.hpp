#pragma once

#include <chrono>
#include <functional>
#include <optional>

#include "bitalloc/problem.hpp"
#include "bitalloc/trace.hpp"

namespace bitalloc {

enum class StepRule {
  kShortStep,          // gamma = min{g / (2 L B^2), 1} with the global L
  kAdaptiveLipschitz,  // backtracking estimate of L, capped at the global L
};

struct FwConfig {
  int max_iterations = 500;
  double gap_tolerance = 1e-6;
  std::chrono::duration<double> time_limit{600.0};
  StepRule step_rule = StepRule::kShortStep;
  std::optional<double> lipschitz_override;
  /// Called with every iterate b^(t), the start included. Tests use it to
  /// check feasibility along the path.
  std::function<void(int, const Eigen::VectorXd&)> on_iterate;

  void validate() const;
};

/// Vertex of {b >= 0, 1^T b <= B} minimizing <gradient, s>: B e_i for the
/// lowest index attaining min_i g_i when that minimum is negative, else 0.
BitVector lmo(const Eigen::VectorXd& gradient, double budget);

/// Index chosen by lmo(), or -1 for the zero vertex.
Eigen::Index lmo_index(const Eigen::VectorXd& gradient);

/// max_{s in B} <b - s, g>, computed in closed form as
/// <b, g> - B min(0, min_i g_i).
double fw_gap(const Eigen::VectorXd& bits, const Eigen::VectorXd& gradient, double budget);

/// Same gap via the explicit inner product with the LMO vertex.
double fw_gap_via_vertex(const Eigen::VectorXd& bits, const Eigen::VectorXd& gradient,
                         double budget);

/// max{2 h0, 2 L B^2} / sqrt(T + 1).
double fw_rate_bound(double h0, double lipschitz, double budget, int iterations_performed);

/// Frank-Wolfe on the relaxed problem. Starts from `start` or the zero
/// vector, records every iterate, and stops on gap <= tolerance, the
/// iteration cap or the wall-clock limit.
SolveTrace solve_fw(const ProblemInstance& instance, const FwConfig& config = {},
                    const std::optional<BitVector>& start = std::nullopt);

}  // namespace bitalloc
