#pragma once

#include <chrono>
#include <functional>
#include <optional>
#include <vector>

#include "bitalloc/problem.hpp"
#include "bitalloc/trace.hpp"

namespace bitalloc {

struct BarrierConfig {
  double mu_initial = 1.0;
  double mu_decrease_factor = 0.1;
  double mu_final = 1e-9;
  /// Inner loop stops once ||grad phi||_inf <= tolerance * max(1, mu), or
  /// when it stalls at a gradient already at the roundoff floor.
  double inner_gradient_tolerance = 1e-8;
  int lbfgs_memory = 10;
  int max_inner_iterations = 2000;
  std::chrono::duration<double> time_limit{600.0};
  /// Called with every accepted inner iterate and the current mu.
  std::function<void(const Eigen::VectorXd&, double)> on_iterate;

  void validate() const;
};

/// Multipliers recovered from the barrier first-order conditions at the
/// final mu: lambda = mu / (B - 1^T b), mu_i = mu / b_i.
struct KktCertificate {
  double lambda = 0.0;
  Eigen::VectorXd mu_bounds;
  double stationarity_residual = 0.0;     // ||grad F + lambda 1 - mu||_inf
  double complementarity_residual = 0.0;  // max_i |mu_i b_i|
};

struct BarrierValue {
  double value = 0.0;
  Eigen::VectorXd gradient;
};

struct BarrierResult {
  SolveTrace trace;
  KktCertificate kkt;
  /// F at the end of each outer (fixed-mu) subproblem.
  std::vector<double> outer_objectives;
  std::vector<double> outer_mu;
};

/// phi(b) = F(b) - mu sum_i ln b_i - mu ln(B - 1^T b) and its gradient.
/// Throws kBoundaryPoint unless b > 0 and 1^T b < B.
BarrierValue barrier_objective(const ProblemInstance& instance, const Eigen::VectorXd& bits,
                               double mu);

/// Multipliers and residuals at an interior point for a given barrier mu.
KktCertificate recover_multipliers(const ProblemInstance& instance, const Eigen::VectorXd& bits,
                                   const Eigen::VectorXd& objective_gradient, double mu);

/// Log-barrier path following with limited-memory quasi-Newton inner solves.
/// The quasi-Newton model approximates only the Hessian of F; the barrier
/// Hessian (diagonal plus rank one) enters exactly.
BarrierResult solve_barrier(const ProblemInstance& instance, const BarrierConfig& config = {},
                            const std::optional<BitVector>& start = std::nullopt);

}  // namespace bitalloc
