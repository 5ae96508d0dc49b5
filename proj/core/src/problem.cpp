#include "bitalloc/problem.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>

namespace bitalloc {

namespace {

const double kLn4 = std::log(4.0);

// Unblocked pass used only after a failed LLT, to name the pivot that broke.
Eigen::Index first_bad_pivot(const Eigen::MatrixXd& spd) {
  const Eigen::Index n = spd.rows();
  Eigen::MatrixXd work = spd;
  for (Eigen::Index j = 0; j < n; ++j) {
    double pivot = work(j, j) - work.row(j).head(j).squaredNorm();
    if (!(pivot > 0.0) || !std::isfinite(pivot)) return j;
    const double root = std::sqrt(pivot);
    work(j, j) = root;
    for (Eigen::Index i = j + 1; i < n; ++i) {
      work(i, j) = (work(i, j) - work.row(i).head(j).dot(work.row(j).head(j))) / root;
    }
  }
  return n;
}

void require_finite(const Eigen::MatrixXd& m, const char* what) {
  if (!m.allFinite()) {
    throw Error(ErrorCode::kInvalidArgument, std::string(what) + " has non-finite entries");
  }
}

// M = C_x^{-1} + H^T diag(rho) H. The dense path fills the lower triangle only,
// which is all the factorization reads.
Eigen::MatrixXd cholesky_factor(const ProblemInstance& instance, const Eigen::VectorXd& rho) {
  Eigen::MatrixXd information = instance.prior_precision();
  if (const auto* sparse = instance.sparse_sensing()) {
    const Eigen::SparseMatrix<double> weighted = rho.asDiagonal() * *sparse;
    information += Eigen::MatrixXd(sparse->transpose() * weighted);
  } else {
    const Eigen::MatrixXd scaled_t = instance.sensing().transpose() * rho.cwiseSqrt().asDiagonal();
    information.selfadjointView<Eigen::Lower>().rankUpdate(scaled_t);
  }
  Eigen::LLT<Eigen::MatrixXd, Eigen::Lower> llt(information);
  if (llt.info() != Eigen::Success) {
    Eigen::MatrixXd full = information.selfadjointView<Eigen::Lower>();
    throw Error(ErrorCode::kNotPositiveDefinite,
                "information matrix factorization failed at pivot " +
                    std::to_string(first_bad_pivot(full)));
  }
  return llt.matrixL();
}

// M = A^T A with A = [C_x^{-1/2}; diag(sqrt rho) H], so A = QR gives M = R^T R.
// Householder QR perturbs A by eps ||A||, against eps ||A||^2 for forming M.
void square_root_factor(const ProblemInstance& instance, Evaluation& out) {
  const Eigen::VectorXd& rho = out.precisions;
  const Eigen::Index d = instance.state_dim();
  const Eigen::Index m = instance.num_sensors();
  Eigen::MatrixXd rows(d + m, d);
  rows.topRows(d) = instance.prior_precision_root();
  rows.bottomRows(m) = rho.cwiseSqrt().asDiagonal() * instance.sensing();
  // Heaviest rows first; without this the reflectors smear the large rows
  // into the small ones.
  const Eigen::VectorXd norms = rows.rowwise().squaredNorm();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(d + m));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return norms(a) > norms(b); });
  Eigen::MatrixXd stacked(d + m, d);
  for (Eigen::Index r = 0; r < d + m; ++r) stacked.row(r) = rows.row(order[static_cast<std::size_t>(r)]);
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(std::move(stacked));
  Eigen::MatrixXd factor = qr.matrixQR().topRows(d).triangularView<Eigen::Upper>().transpose();
  const Eigen::MatrixXd thin_q = qr.householderQ() * Eigen::MatrixXd::Identity(d + m, d);
  out.orthonormal_rows.resize(m, d);
  for (Eigen::Index r = 0; r < d + m; ++r) {
    const Eigen::Index source = order[static_cast<std::size_t>(r)];
    if (source >= d) out.orthonormal_rows.row(source - d) = thin_q.row(r);
  }
  for (Eigen::Index j = 0; j < d; ++j) {
    const double pivot = factor(j, j);
    if (!std::isfinite(pivot) || pivot == 0.0) {
      throw Error(ErrorCode::kNotPositiveDefinite,
                  "information matrix factorization failed at pivot " + std::to_string(j));
    }
    if (pivot < 0.0) {
      factor.col(j) = -factor.col(j);
      out.orthonormal_rows.col(j) = -out.orthonormal_rows.col(j);
    }
  }
  out.factor = std::move(factor);
}

}  // namespace

ProblemInstance ProblemInstance::create(Eigen::MatrixXd sensing, Eigen::MatrixXd prior_covariance,
                                        Eigen::VectorXd kappa, double budget) {
  const Eigen::Index m = sensing.rows();
  const Eigen::Index d = sensing.cols();
  if (m < 1 || d < 1) {
    throw Error(ErrorCode::kInvalidArgument, "sensing matrix must be nonempty");
  }
  if (prior_covariance.rows() != d || prior_covariance.cols() != d) {
    throw Error(ErrorCode::kDimensionMismatch,
                "prior covariance is " + std::to_string(prior_covariance.rows()) + "x" +
                    std::to_string(prior_covariance.cols()) + ", expected " + std::to_string(d) +
                    "x" + std::to_string(d));
  }
  if (kappa.size() != m) {
    throw Error(ErrorCode::kDimensionMismatch, "kappa has length " + std::to_string(kappa.size()) +
                                                   ", expected " + std::to_string(m));
  }
  require_finite(sensing, "sensing matrix");
  require_finite(prior_covariance, "prior covariance");
  require_finite(kappa, "kappa");
  for (Eigen::Index i = 0; i < m; ++i) {
    if (sensing.row(i).squaredNorm() == 0.0) {
      throw Error(ErrorCode::kInvalidArgument, "sensing row " + std::to_string(i) + " is zero");
    }
    if (!(kappa(i) > 0.0)) {
      throw Error(ErrorCode::kInvalidArgument, "kappa[" + std::to_string(i) + "] must be positive");
    }
  }
  if (!(budget >= 0.0) || !std::isfinite(budget)) {
    throw Error(ErrorCode::kInvalidArgument, "budget must be finite and nonnegative");
  }
  if ((prior_covariance - prior_covariance.transpose()).cwiseAbs().maxCoeff() >
      1e-12 * std::max(1.0, prior_covariance.cwiseAbs().maxCoeff())) {
    throw Error(ErrorCode::kInvalidArgument, "prior covariance is not symmetric");
  }

  Eigen::LLT<Eigen::MatrixXd> llt(prior_covariance);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::kNotPositiveDefinite,
                "prior covariance factorization failed at pivot " +
                    std::to_string(first_bad_pivot(prior_covariance)));
  }

  ProblemInstance out;
  out.identity_prior_ = prior_covariance.isIdentity(0.0);
  out.prior_factor_ = llt.matrixL();
  out.prior_root_ = Eigen::MatrixXd::Identity(d, d);
  if (out.identity_prior_) {
    out.prior_precision_ = Eigen::MatrixXd::Identity(d, d);
    out.prior_norm_ = 1.0;
    out.prior_precision_norm_ = 1.0;
  } else {
    out.prior_factor_.triangularView<Eigen::Lower>().solveInPlace(out.prior_root_);
    out.prior_precision_ = llt.solve(Eigen::MatrixXd::Identity(d, d));
    out.prior_precision_ = 0.5 * (out.prior_precision_ + out.prior_precision_.transpose()).eval();
    out.prior_norm_ = symmetric_spectral_norm(prior_covariance);
    out.prior_precision_norm_ = symmetric_spectral_norm(out.prior_precision_);
  }
  out.row_norms_ = sensing.rowwise().squaredNorm();
  const auto nonzeros = (sensing.array() != 0.0).count();
  if (4 * nonzeros <= sensing.size()) out.sparse_sensing_ = sensing.sparseView();
  out.sensing_ = std::move(sensing);
  out.prior_covariance_ = std::move(prior_covariance);
  out.kappa_ = std::move(kappa);
  out.budget_ = budget;
  return out;
}

ProblemInstance ProblemInstance::with_identity_prior(Eigen::MatrixXd sensing, Eigen::VectorXd kappa,
                                                     double budget) {
  const Eigen::Index d = sensing.cols();
  return create(std::move(sensing), Eigen::MatrixXd::Identity(d, d), std::move(kappa), budget);
}

Eigen::VectorXd ProblemInstance::kappa_from_ranges(const Eigen::VectorXd& dynamic_ranges) {
  if (!((dynamic_ranges.array() > 0.0).all()) || !dynamic_ranges.allFinite()) {
    throw Error(ErrorCode::kInvalidArgument, "dynamic ranges must be positive and finite");
  }
  return (12.0 / dynamic_ranges.array().square()).matrix();
}

ProblemInstance ProblemInstance::with_budget(double budget) const {
  if (!(budget >= 0.0) || !std::isfinite(budget)) {
    throw Error(ErrorCode::kInvalidArgument, "budget must be finite and nonnegative");
  }
  ProblemInstance out = *this;
  out.budget_ = budget;
  return out;
}

BitVector BitVector::continuous(Eigen::VectorXd bits) { return BitVector{std::move(bits), false}; }

BitVector BitVector::integral(Eigen::VectorXd bits) {
  for (Eigen::Index i = 0; i < bits.size(); ++i) {
    if (!(bits(i) >= 0.0) || std::floor(bits(i)) != bits(i)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "component " + std::to_string(i) + " is not a nonnegative integer");
    }
  }
  return BitVector{std::move(bits), true};
}

bool BitVector::is_feasible(double budget, double tol) const {
  if (bits.size() == 0) return budget >= -tol;
  return bits.minCoeff() >= -tol && bits.sum() <= budget + tol;
}

Eigen::VectorXd precision_from_bits(const ProblemInstance& instance, const Eigen::VectorXd& bits) {
  if (bits.size() != instance.num_sensors()) {
    throw Error(ErrorCode::kDimensionMismatch, "bit vector has length " +
                                                   std::to_string(bits.size()) + ", expected " +
                                                   std::to_string(instance.num_sensors()));
  }
  Eigen::VectorXd rho(bits.size());
  for (Eigen::Index i = 0; i < bits.size(); ++i) {
    if (!std::isfinite(bits(i))) {
      throw Error(ErrorCode::kInvalidArgument, "bits[" + std::to_string(i) + "] is not finite");
    }
    if (bits(i) > kMaxBitsPerChannel) {
      throw Error(ErrorCode::kBitOverflow, "bits[" + std::to_string(i) + "] = " +
                                               std::to_string(bits(i)) + " exceeds " +
                                               std::to_string(kMaxBitsPerChannel));
    }
    rho(i) = instance.kappa()(i) * std::pow(4.0, bits(i));
  }
  return rho;
}

Eigen::VectorXd precision_from_bits(const ProblemInstance& instance, const BitVector& bits) {
  return precision_from_bits(instance, bits.bits);
}

Evaluation evaluate_objective(const ProblemInstance& instance, const Eigen::VectorXd& bits,
                              FactorizationCounter* counter) {
  const Eigen::MatrixXd& sensing = instance.sensing();
  const Eigen::Index d = instance.state_dim();

  Evaluation out;
  out.precisions = precision_from_bits(instance, bits);

  // lambda_min(M) >= 1/||C_x|| and lambda_max(M) <= ||C_x^{-1}|| + sum rho_i ||h_i||^2.
  const double condition_bound =
      instance.prior_spectral_norm() *
      (instance.prior_precision_norm() + out.precisions.dot(instance.sensing_row_norms()));
  if (counter != nullptr) ++counter->factorizations;
  if (condition_bound > kCholeskyConditionLimit) {
    square_root_factor(instance, out);
  } else {
    out.factor = cholesky_factor(instance, out.precisions);
  }

  // tr(M^{-1}) = ||L^{-1}||_F^2.
  out.inverse_factor = Eigen::MatrixXd::Identity(d, d);
  out.factor.triangularView<Eigen::Lower>().solveInPlace(out.inverse_factor);
  out.objective = out.inverse_factor.squaredNorm();
  return out;
}

void complete_gradient(const ProblemInstance& instance, Evaluation& evaluation) {
  if (evaluation.has_gradient()) return;
  const auto upper = evaluation.inverse_factor.transpose().triangularView<Eigen::Upper>();
  if (evaluation.orthonormal_rows.size() > 0) {
    // Column i is sqrt(rho_i) C_eps h_i = L^{-T} q_i.
    const Eigen::MatrixXd scaled = upper * evaluation.orthonormal_rows.transpose();
    evaluation.gradient = -kLn4 * scaled.colwise().squaredNorm().transpose();
    evaluation.covariance_sensing_t =
        scaled * evaluation.precisions.cwiseSqrt().cwiseInverse().asDiagonal();
    return;
  }
  // C_eps H^T = L^{-T} (L^{-1} H^T); column i is C_eps h_i.
  Eigen::MatrixXd whitened;
  if (const auto* sparse = instance.sparse_sensing()) {
    whitened = evaluation.inverse_factor * sparse->transpose();
  } else {
    whitened = evaluation.inverse_factor.triangularView<Eigen::Lower>() * instance.sensing().transpose();
  }
  evaluation.covariance_sensing_t.noalias() = upper * whitened;
  evaluation.gradient =
      -kLn4 * evaluation.precisions.cwiseProduct(
                  evaluation.covariance_sensing_t.colwise().squaredNorm().transpose());
}

Evaluation evaluate(const ProblemInstance& instance, const Eigen::VectorXd& bits,
                    FactorizationCounter* counter) {
  Evaluation out = evaluate_objective(instance, bits, counter);
  complete_gradient(instance, out);
  return out;
}

Evaluation evaluate(const ProblemInstance& instance, const BitVector& bits,
                    FactorizationCounter* counter) {
  return evaluate(instance, bits.bits, counter);
}

Eigen::MatrixXd error_covariance(const Evaluation& evaluation) {
  const Eigen::Index d = evaluation.factor.rows();
  Eigen::MatrixXd inverse_factor = Eigen::MatrixXd::Identity(d, d);
  evaluation.factor.triangularView<Eigen::Lower>().solveInPlace(inverse_factor);
  Eigen::MatrixXd covariance = inverse_factor.transpose() * inverse_factor;
  return 0.5 * (covariance + covariance.transpose());
}

double lipschitz_constant(const ProblemInstance& instance) {
  const double m = static_cast<double>(instance.num_sensors());
  return kLn4 * kLn4 * instance.prior_spectral_norm() * (2.0 * m + 1.0);
}

Eigen::MatrixXd hessian_exact(const ProblemInstance& instance, const Eigen::VectorXd& bits) {
  const Evaluation eval = evaluate(instance, bits);
  const Eigen::MatrixXd& cov_ht = eval.covariance_sensing_t;   // C_eps H^T
  const Eigen::MatrixXd first = instance.sensing() * cov_ht;    // H C_eps H^T
  const Eigen::MatrixXd second = cov_ht.transpose() * cov_ht;   // H C_eps^2 H^T
  const Eigen::VectorXd& rho = eval.precisions;

  // (ln 4)^2 [ delta_ij rho_i df/drho_i + rho_i rho_j d2f/drho_i drho_j ],
  // with df/drho_i = -(H C^2 H^T)_ii and d2f = 2 (H C H^T)_ij (H C^2 H^T)_ij.
  Eigen::MatrixXd hessian = 2.0 * first.cwiseProduct(second);
  hessian = rho.asDiagonal() * hessian * rho.asDiagonal();
  hessian.diagonal() -= rho.cwiseProduct(second.diagonal());
  hessian *= kLn4 * kLn4;
  return 0.5 * (hessian + hessian.transpose());
}

double symmetric_spectral_norm(const Eigen::MatrixXd& symmetric) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(symmetric, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::kInvalidArgument, "eigenvalue computation did not converge");
  }
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace bitalloc
