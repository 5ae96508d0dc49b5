#include "bitalloc/barrier.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <string>

#include <Eigen/LU>

namespace bitalloc {

void BarrierConfig::validate() const {
  if (!(mu_final > 0.0) || !(mu_final < mu_initial)) {
    throw Error(ErrorCode::kInvalidArgument, "need 0 < mu_final < mu_initial");
  }
  if (!(mu_decrease_factor > 0.0 && mu_decrease_factor < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "mu_decrease_factor must lie in (0, 1)");
  }
  if (!(inner_gradient_tolerance > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "inner_gradient_tolerance must be positive");
  }
  if (lbfgs_memory < 1 || max_inner_iterations < 1) {
    throw Error(ErrorCode::kInvalidArgument, "lbfgs_memory and max_inner_iterations must be >= 1");
  }
  if (!(time_limit.count() > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "time_limit must be positive");
  }
}

namespace {

constexpr double kArmijo = 1e-4;
constexpr double kFractionToBoundary = 0.995;
constexpr int kMaxBacktracks = 60;
// Accepted steps without halving ||grad phi||_inf before the subproblem is
// declared stalled at the roundoff floor.
constexpr int kStallWindow = 25;
constexpr double kMinPairStep = 1e-9;
// Relative size of the rounding error in phi.
constexpr double kPhiNoise = 1e-12;

// Near the end of the path the slack is ~1e-7 and mu / slack carries an
// absolute error of order eps B mu / slack^2, which can exceed a fixed
// tolerance. Below this level progress is not measurable.
bool at_roundoff_floor(double gradient_norm, const Evaluation& eval) {
  return gradient_norm <= 1e-6 * (1.0 + eval.gradient.cwiseAbs().maxCoeff());
}

double slack_of(const ProblemInstance& instance, const Eigen::VectorXd& bits) {
  return instance.budget() - bits.sum();
}

void require_interior(const ProblemInstance& instance, const Eigen::VectorXd& bits) {
  if (bits.size() != instance.num_sensors()) {
    throw Error(ErrorCode::kDimensionMismatch, "bit vector has length " +
                                                   std::to_string(bits.size()) + ", expected " +
                                                   std::to_string(instance.num_sensors()));
  }
  if (!(bits.minCoeff() > 0.0) || !(slack_of(instance, bits) > 0.0)) {
    throw Error(ErrorCode::kBoundaryPoint,
                "barrier needs b > 0 and 1^T b < B (min b = " + std::to_string(bits.minCoeff()) +
                    ", slack = " + std::to_string(slack_of(instance, bits)) + ")");
  }
}

double barrier_value(const Evaluation& eval, const Eigen::VectorXd& bits, double slack,
                     double mu) {
  return eval.objective - mu * (bits.array().log().sum() + std::log(slack));
}

Eigen::VectorXd barrier_gradient(const Evaluation& eval, const Eigen::VectorXd& bits, double slack,
                                 double mu) {
  return eval.gradient - (mu / bits.array()).matrix() +
         Eigen::VectorXd::Constant(bits.size(), mu / slack);
}

// Limited-memory BFGS model of the Hessian of F in compact form
//   B = theta I - W N^{-1} W^T,  W = [theta S, Y],  N = [theta S^T S, L; L^T, -D].
class CompactLbfgs {
 public:
  explicit CompactLbfgs(int memory) : memory_(memory) {}

  void clear() {
    s_.clear();
    y_.clear();
    theta_ = 1.0;
  }

  bool empty() const { return s_.empty(); }

  void push(const Eigen::VectorXd& s, const Eigen::VectorXd& y) {
    const double sy = s.dot(y);
    // Skip pairs without positive curvature (F is nonconvex in b) and pairs
    // from steps so short that y is mostly gradient roundoff.
    if (!(sy > 1e-12 * s.norm() * y.norm()) || !std::isfinite(sy)) return;
    if (s.cwiseAbs().maxCoeff() < kMinPairStep) return;
    if (static_cast<int>(s_.size()) == memory_) {
      s_.pop_front();
      y_.pop_front();
    }
    s_.push_back(s);
    y_.push_back(y);
    theta_ = y.squaredNorm() / sy;
  }

  double theta() const { return theta_; }

  // Solves (B + diag(sigma) + c 1 1^T) p = rhs by Woodbury over
  // V = [1, W] with the small (1 + 2k) system.
  Eigen::VectorXd solve(const Eigen::VectorXd& sigma, double c, const Eigen::VectorXd& rhs) const {
    const Eigen::Index m = rhs.size();
    const Eigen::Index k = static_cast<Eigen::Index>(s_.size());
    const Eigen::VectorXd diag_inv = (theta_ + sigma.array()).inverse().matrix();

    Eigen::MatrixXd v(m, 1 + 2 * k);
    v.col(0).setOnes();
    for (Eigen::Index j = 0; j < k; ++j) {
      v.col(1 + j) = theta_ * s_[j];
      v.col(1 + k + j) = y_[j];
    }

    Eigen::MatrixXd small = v.transpose() * diag_inv.asDiagonal() * v;
    small(0, 0) += 1.0 / c;
    if (k > 0) {
      Eigen::MatrixXd sts(k, k), sty(k, k);
      for (Eigen::Index i = 0; i < k; ++i) {
        for (Eigen::Index j = 0; j < k; ++j) {
          sts(i, j) = s_[i].dot(s_[j]);
          sty(i, j) = s_[i].dot(y_[j]);
        }
      }
      Eigen::MatrixXd lower = sty.triangularView<Eigen::StrictlyLower>();
      // C^{-1} block is -N.
      small.block(1, 1, k, k) -= theta_ * sts;
      small.block(1, 1 + k, k, k) -= lower;
      small.block(1 + k, 1, k, k) -= lower.transpose();
      small.block(1 + k, 1 + k, k, k) += sty.diagonal().asDiagonal();
    }

    const Eigen::VectorXd r = diag_inv.cwiseProduct(rhs);
    const Eigen::VectorXd w = small.fullPivLu().solve(v.transpose() * r);
    return r - diag_inv.cwiseProduct(v * w);
  }

 private:
  int memory_;
  std::deque<Eigen::VectorXd> s_;
  std::deque<Eigen::VectorXd> y_;
  double theta_ = 1.0;
};

}  // namespace

BarrierValue barrier_objective(const ProblemInstance& instance, const Eigen::VectorXd& bits,
                               double mu) {
  require_interior(instance, bits);
  const Evaluation eval = evaluate(instance, bits);
  const double slack = slack_of(instance, bits);
  return BarrierValue{barrier_value(eval, bits, slack, mu),
                      barrier_gradient(eval, bits, slack, mu)};
}

KktCertificate recover_multipliers(const ProblemInstance& instance, const Eigen::VectorXd& bits,
                                   const Eigen::VectorXd& objective_gradient, double mu) {
  require_interior(instance, bits);
  KktCertificate kkt;
  kkt.lambda = mu / slack_of(instance, bits);
  kkt.mu_bounds = (mu / bits.array()).matrix();
  kkt.stationarity_residual =
      (objective_gradient + Eigen::VectorXd::Constant(bits.size(), kkt.lambda) - kkt.mu_bounds)
          .cwiseAbs()
          .maxCoeff();
  kkt.complementarity_residual = kkt.mu_bounds.cwiseProduct(bits).cwiseAbs().maxCoeff();
  return kkt;
}

BarrierResult solve_barrier(const ProblemInstance& instance, const BarrierConfig& config,
                            const std::optional<BitVector>& start) {
  config.validate();
  using Clock = std::chrono::steady_clock;
  const auto started = Clock::now();
  const auto elapsed = [&] { return std::chrono::duration<double>(Clock::now() - started).count(); };

  const Eigen::Index m = instance.num_sensors();
  const double budget = instance.budget();
  if (!(budget > 0.0)) {
    throw Error(ErrorCode::kBoundaryPoint, "barrier solver needs a positive budget");
  }

  Eigen::VectorXd bits =
      start ? start->bits
            : Eigen::VectorXd::Constant(m, budget / static_cast<double>(m) * (1.0 - 1e-6));
  require_interior(instance, bits);

  BarrierResult result;
  SolveTrace& trace = result.trace;
  trace.lipschitz = lipschitz_constant(instance);

  const auto evaluate_at = [&](const Eigen::VectorXd& b, int iteration) {
    try {
      return evaluate(instance, b);
    } catch (const Error& e) {
      throw Error(e.code(), std::string(e.what()) + " (barrier iteration " +
                                std::to_string(iteration) + ")");
    }
  };

  CompactLbfgs model(config.lbfgs_memory);
  Evaluation current = evaluate_at(bits, 0);
  double mu = config.mu_initial;
  int iteration = 0;
  bool last_subproblem_converged = false;
  bool out_of_time = false;

  while (true) {
    const double tolerance = config.inner_gradient_tolerance * std::max(1.0, mu);
    last_subproblem_converged = false;
    double best_norm = std::numeric_limits<double>::infinity();
    int stalled = 0;

    for (int inner = 0; inner < config.max_inner_iterations; ++inner) {
      double slack = slack_of(instance, bits);
      const Eigen::VectorXd gradient = barrier_gradient(current, bits, slack, mu);
      const double gradient_norm = gradient.cwiseAbs().maxCoeff();
      if (gradient_norm <= tolerance) {
        last_subproblem_converged = true;
        break;
      }
      if (gradient_norm <= 0.5 * best_norm) {
        best_norm = gradient_norm;
        stalled = 0;
      } else if (++stalled >= kStallWindow) {
        if (at_roundoff_floor(gradient_norm, current)) {
          last_subproblem_converged = true;
          break;
        }
        // Stalled above the floor: the curvature pairs are misleading.
        model.clear();
        stalled = 0;
        best_norm = gradient_norm;
      }
      if (elapsed() >= config.time_limit.count()) {
        out_of_time = true;
        break;
      }

      const double phi = barrier_value(current, bits, slack, mu);
      const Eigen::VectorXd sigma = (mu / bits.array().square()).matrix();
      const double rank_one = mu / (slack * slack);

      Eigen::VectorXd direction = -model.solve(sigma, rank_one, gradient);
      if (!direction.allFinite() || !(direction.dot(gradient) < 0.0)) {
        model.clear();
        direction = -model.solve(sigma, rank_one, gradient);
      }

      bool accepted = false;
      double step = 0.0;
      Eigen::VectorXd trial_bits;
      std::optional<Evaluation> trial_eval;
      for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
        // Fraction-to-boundary cap keeps b > 0 and the slack positive.
        double step_max = 1.0;
        for (Eigen::Index i = 0; i < m; ++i) {
          if (direction(i) < 0.0) {
            step_max = std::min(step_max, -kFractionToBoundary * bits(i) / direction(i));
          }
        }
        const double slack_rate = direction.sum();
        if (slack_rate > 0.0) {
          step_max = std::min(step_max, kFractionToBoundary * slack / slack_rate);
        }

        const double slope = direction.dot(gradient);
        step = step_max;
        for (int backtrack = 0; backtrack < kMaxBacktracks; ++backtrack, step *= 0.5) {
          trial_bits = bits + step * direction;
          const double trial_slack = slack_of(instance, trial_bits);
          if (!(trial_bits.minCoeff() > 0.0) || !(trial_slack > 0.0)) continue;
          Evaluation eval = evaluate_at(trial_bits, iteration + 1);
          const double trial_phi = barrier_value(eval, trial_bits, trial_slack, mu);
          bool decrease = trial_phi <= phi + kArmijo * step * slope;
          if (!decrease && std::abs(trial_phi - phi) <= kPhiNoise * (1.0 + std::abs(phi))) {
            // The change in phi is below its evaluation noise; fall back to
            // the gradient norm as the merit function.
            decrease = barrier_gradient(eval, trial_bits, trial_slack, mu).cwiseAbs().maxCoeff() <
                       gradient_norm;
          }
          if (decrease) {
            trial_eval = std::move(eval);
            accepted = true;
            break;
          }
        }
        if (!accepted && !model.empty()) {
          model.clear();
          direction = -model.solve(sigma, rank_one, gradient);
        } else {
          break;
        }
      }

      if (!accepted) {
        // phi no longer resolves the decrease.
        if (at_roundoff_floor(gradient_norm, current)) {
          last_subproblem_converged = true;
          break;
        }
        throw Error(ErrorCode::kLineSearchFailure,
                    "no feasible decrease at barrier iteration " + std::to_string(iteration) +
                        " (mu = " + std::to_string(mu) +
                        ", ||grad||_inf = " + std::to_string(gradient_norm) +
                        ", F = " + std::to_string(current.objective) + ")");
      }

      model.push(trial_bits - bits, trial_eval->gradient - current.gradient);
      bits = std::move(trial_bits);
      current = std::move(*trial_eval);
      ++iteration;
      if (config.on_iterate) config.on_iterate(bits, mu);

      IterationRecord record;
      record.iteration = iteration;
      record.objective = current.objective;
      record.gap = barrier_gradient(current, bits, slack_of(instance, bits), mu).cwiseAbs().maxCoeff();
      record.step = step;
      record.elapsed_seconds = elapsed();
      record.barrier_mu = mu;
      trace.iterates.push_back(record);
    }

    result.outer_objectives.push_back(current.objective);
    result.outer_mu.push_back(mu);
    if (out_of_time || mu <= config.mu_final * (1.0 + 1e-12)) break;
    mu = std::max(mu * config.mu_decrease_factor, config.mu_final);
  }

  result.kkt = recover_multipliers(instance, bits, current.gradient, mu);
  trace.final_bits = BitVector::continuous(bits);
  trace.final_objective = current.objective;
  trace.termination = out_of_time                  ? Termination::kTimeLimit
                      : last_subproblem_converged ? Termination::kKktConverged
                                                  : Termination::kMaxIterations;
  for (const IterationRecord& r : trace.iterates) trace.min_gap = std::min(trace.min_gap, r.gap);
  trace.elapsed_seconds = elapsed();
  return result;
}

}  // namespace bitalloc
