#pragma once

#include <cstddef>
#include <optional>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "bitalloc/error.hpp"

namespace bitalloc {

/// Bits above this are rejected: 4^b overflows double precision near b = 512.
inline constexpr double kMaxBitsPerChannel = 256.0;

/// Immutable description of one bit-allocation problem.
///
/// Holds the sensing matrix H (m sensors x d states), the prior covariance
/// C_x, the per-channel precision constants kappa and the total bit budget.
/// Construction validates the standing assumptions (nonzero rows, SPD prior,
/// positive kappa, nonnegative budget) and caches the prior precision
/// C_x^{-1}, the Cholesky factor of C_x and its spectral norm.
class ProblemInstance {
 public:
  /// General SPD prior.
  static ProblemInstance create(Eigen::MatrixXd sensing, Eigen::MatrixXd prior_covariance,
                                Eigen::VectorXd kappa, double budget);

  /// C_x = I shortcut.
  static ProblemInstance with_identity_prior(Eigen::MatrixXd sensing, Eigen::VectorXd kappa,
                                             double budget);

  /// kappa_i = 12 / R_i^2 from per-channel dynamic ranges.
  static Eigen::VectorXd kappa_from_ranges(const Eigen::VectorXd& dynamic_ranges);

  /// Same data, different budget.
  ProblemInstance with_budget(double budget) const;

  const Eigen::MatrixXd& sensing() const noexcept { return sensing_; }
  const Eigen::MatrixXd& prior_covariance() const noexcept { return prior_covariance_; }
  const Eigen::MatrixXd& prior_precision() const noexcept { return prior_precision_; }
  /// Lower-triangular L with L L^T = C_x.
  const Eigen::MatrixXd& prior_factor() const noexcept { return prior_factor_; }
  /// L^{-1}, a square root of the prior precision: L^{-T} L^{-1} = C_x^{-1}.
  const Eigen::MatrixXd& prior_precision_root() const noexcept { return prior_root_; }
  double prior_precision_norm() const noexcept { return prior_precision_norm_; }
  /// ||h_i||^2 per sensor.
  const Eigen::VectorXd& sensing_row_norms() const noexcept { return row_norms_; }
  const Eigen::VectorXd& kappa() const noexcept { return kappa_; }
  double budget() const noexcept { return budget_; }
  double prior_spectral_norm() const noexcept { return prior_norm_; }
  bool has_identity_prior() const noexcept { return identity_prior_; }
  /// Compressed copy of H when at most a quarter of its entries are nonzero
  /// (grid Laplacians), else null. evaluate() uses it for the O(d^2 m) terms.
  const Eigen::SparseMatrix<double>* sparse_sensing() const noexcept {
    return sparse_sensing_.nonZeros() > 0 ? &sparse_sensing_ : nullptr;
  }

  Eigen::Index num_sensors() const noexcept { return sensing_.rows(); }
  Eigen::Index state_dim() const noexcept { return sensing_.cols(); }

 private:
  ProblemInstance() = default;

  Eigen::MatrixXd sensing_;
  Eigen::MatrixXd prior_covariance_;
  Eigen::MatrixXd prior_precision_;
  Eigen::MatrixXd prior_factor_;
  Eigen::MatrixXd prior_root_;
  Eigen::VectorXd row_norms_;
  Eigen::SparseMatrix<double> sparse_sensing_;
  Eigen::VectorXd kappa_;
  double budget_ = 0.0;
  double prior_norm_ = 0.0;
  double prior_precision_norm_ = 0.0;
  bool identity_prior_ = false;
};

/// A candidate allocation. Continuous allocations come out of the relaxed
/// solvers, integral ones out of rounding and the uniform baseline.
struct BitVector {
  Eigen::VectorXd bits;
  bool is_integral = false;

  static BitVector continuous(Eigen::VectorXd bits);
  /// Throws kInvalidArgument unless every entry is a nonnegative integer.
  static BitVector integral(Eigen::VectorXd bits);

  Eigen::Index size() const noexcept { return bits.size(); }
  double total() const { return bits.sum(); }
  /// b >= -tol componentwise and 1^T b <= budget + tol.
  bool is_feasible(double budget, double tol = 1e-9) const;
};

/// Objective, gradient and reusable byproducts at one allocation.
struct Evaluation {
  double objective = 0.0;          // F(b) = tr(C_eps(b))
  Eigen::VectorXd gradient;        // dF/db, strictly negative when rows of H are nonzero
  Eigen::VectorXd precisions;      // rho_i = kappa_i 4^{b_i}
  Eigen::MatrixXd factor;          // lower Cholesky factor L of M(b), L L^T = M
  Eigen::MatrixXd inverse_factor;  // L^{-1}, so C_eps = L^{-T} L^{-1}
  Eigen::MatrixXd covariance_sensing_t;  // C_eps H^T, d x m; empty until the gradient is formed
  /// QR path only: row i is sqrt(rho_i) h_i^T L^{-T}, a row of the orthonormal
  /// factor (m x d). Gives the gradient of heavily loaded channels, where
  /// solving with sqrt(rho_i) h_i would cancel away every digit.
  Eigen::MatrixXd orthonormal_rows;

  bool has_gradient() const noexcept { return gradient.size() > 0; }
};

/// Counts SPD factorizations performed by evaluate(); injected by tests.
inline constexpr double kCholeskyConditionLimit = 1e8;

struct FactorizationCounter {
  std::size_t factorizations = 0;
};

Eigen::VectorXd precision_from_bits(const ProblemInstance& instance, const Eigen::VectorXd& bits);
Eigen::VectorXd precision_from_bits(const ProblemInstance& instance, const BitVector& bits);

/// One factorization of M(b) = C_x^{-1} + H^T diag(rho) H yields the
/// objective tr(M^{-1}) and the full gradient
///   dF/db_i = -(ln 4) rho_i h_i^T C_eps^2 h_i,
/// with the quadratic forms read off the columns of C_eps H^T.
/// Usually a Cholesky of M. When a cheap bound puts cond(M) above
/// kCholeskyConditionLimit, the factor comes from a Householder QR of the
/// square root [C_x^{-1/2}; diag(sqrt rho) H] instead, which does not square
/// the condition number (sensor-rich instances with tens of bits per channel).
Evaluation evaluate(const ProblemInstance& instance, const Eigen::VectorXd& bits,
                    FactorizationCounter* counter = nullptr);
Evaluation evaluate(const ProblemInstance& instance, const BitVector& bits,
                    FactorizationCounter* counter = nullptr);

/// Objective only; the gradient can be added later by complete_gradient()
/// without another factorization. Line searches that reject most trial
/// points skip the O(d^2 m) gradient work this way.
Evaluation evaluate_objective(const ProblemInstance& instance, const Eigen::VectorXd& bits,
                              FactorizationCounter* counter = nullptr);
void complete_gradient(const ProblemInstance& instance, Evaluation& evaluation);

/// C_eps(b) rebuilt from the factor carried by an evaluation.
Eigen::MatrixXd error_covariance(const Evaluation& evaluation);

/// Global Lipschitz constant of grad F on the budget set:
/// (ln 4)^2 ||C_x||_2 (2m + 1).
double lipschitz_constant(const ProblemInstance& instance);

/// Exact Hessian of F in bit space. Forms m x m products, so it is meant for
/// validation on small instances only.
Eigen::MatrixXd hessian_exact(const ProblemInstance& instance, const Eigen::VectorXd& bits);

/// Spectral norm of a symmetric matrix.
double symmetric_spectral_norm(const Eigen::MatrixXd& symmetric);

}  // namespace bitalloc
