#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "bitalloc/barrier.hpp"
#include "bitalloc/frank_wolfe.hpp"
#include "bitalloc/instances.hpp"
#include "test_support.hpp"

namespace {

using bitalloc::BarrierConfig;
using bitalloc::ProblemInstance;
using bitalloc::testing::random_instance;

ProblemInstance scalar_instance() {
  return ProblemInstance::with_identity_prior(Eigen::MatrixXd::Ones(1, 1),
                                              Eigen::VectorXd::Ones(1), 2.0);
}

TEST(BarrierObjective, ScalarHandComputation) {
  const auto value = bitalloc::barrier_objective(scalar_instance(), Eigen::VectorXd::Ones(1), 1.0);
  EXPECT_NEAR(value.value, 0.2, 1e-15);
}

TEST(BarrierObjective, VanishingMuRecoversObjective) {
  std::mt19937_64 rng(2);
  const auto instance = random_instance(rng, 4, 6, 12.0);
  const Eigen::VectorXd b = Eigen::VectorXd::Constant(6, 1.5);
  const double f = bitalloc::evaluate(instance, b).objective;
  EXPECT_NEAR(bitalloc::barrier_objective(instance, b, 1e-14).value, f, 1e-12);
}

TEST(BarrierObjective, GradientMatchesCentralDifferences) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 5; ++trial) {
    const Eigen::Index m = 4 + trial;
    const auto instance = random_instance(rng, 3 + trial, m, 2.0 * m);
    const Eigen::VectorXd b = bitalloc::testing::random_feasible(rng, m, 1.8 * m, 3.0);
    const double mu = 0.1 * (trial + 1);
    const auto value = bitalloc::barrier_objective(instance, b, mu);
    for (Eigen::Index i = 0; i < m; ++i) {
      Eigen::VectorXd up = b, down = b;
      up(i) += 1e-5;
      down(i) -= 1e-5;
      const double fd = (bitalloc::barrier_objective(instance, up, mu).value -
                         bitalloc::barrier_objective(instance, down, mu).value) / 2e-5;
      EXPECT_LE(std::abs(fd - value.gradient(i)), 1e-6 * std::max(1.0, std::abs(fd)));
    }
  }
}

TEST(BarrierObjective, BoundaryIsRejected) {
  const auto instance = scalar_instance();
  for (const double b : {0.0, 2.0, -0.1, 2.5}) {
    try {
      bitalloc::barrier_objective(instance, Eigen::VectorXd::Constant(1, b), 1.0);
      FAIL() << "b = " << b;
    } catch (const bitalloc::Error& e) {
      EXPECT_EQ(e.code(), bitalloc::ErrorCode::kBoundaryPoint);
    }
  }
}

TEST(SolveBarrier, ScalarSaturatesBudget) {
  const auto result = bitalloc::solve_barrier(scalar_instance());
  EXPECT_NEAR(result.trace.final_bits.bits(0), 2.0, 1e-6);
  EXPECT_NEAR(result.trace.final_objective, 1.0 / 17.0, 1e-7);
  EXPECT_EQ(result.trace.termination, bitalloc::Termination::kKktConverged);
}

TEST(SolveBarrier, KktInteriorityAndOuterMonotonicity) {
  std::mt19937_64 rng(40);
  for (int trial = 0; trial < 5; ++trial) {
    const Eigen::Index d = 4 + 2 * trial, m = 6 + 3 * trial;
    const auto instance = random_instance(rng, d, m, 2.0 * m, trial % 2 == 0);
    BarrierConfig config;
    bool interior = true;
    config.on_iterate = [&](const Eigen::VectorXd& b, double) {
      interior = interior && (b.array() > 0.0).all() && b.sum() < instance.budget();
    };
    const auto result = bitalloc::solve_barrier(instance, config);
    ASSERT_EQ(result.trace.termination, bitalloc::Termination::kKktConverged) << trial;
    EXPECT_TRUE(interior);

    const auto& kkt = result.kkt;
    const double grad_norm =
        bitalloc::evaluate(instance, result.trace.final_bits).gradient.cwiseAbs().maxCoeff();
    EXPECT_GE(kkt.lambda, 0.0);
    EXPECT_TRUE((kkt.mu_bounds.array() >= 0.0).all());
    EXPECT_LE(kkt.stationarity_residual, 1e-5 * (1.0 + grad_norm));
    EXPECT_LE(kkt.complementarity_residual, 1e-6);
    EXPECT_LE(instance.budget() - result.trace.final_bits.total(), 1e-6 * instance.budget());

    for (std::size_t k = 1; k < result.outer_objectives.size(); ++k) {
      EXPECT_LE(result.outer_objectives[k], result.outer_objectives[k - 1] + 1e-10);
    }
  }
}

// F is not convex. On random Gaussian instances the two solvers can stop at
// different stationary points (seen: 1% apart with different supports), so
// agreement is checked on grid instances.
TEST(SolveBarrier, AgreesWithFrankWolfe) {
  bitalloc::InstanceSpec spec;
  spec.d = spec.m = 13;
  spec.seed = 41;
  const auto instance = bitalloc::generate(spec);
  const auto barrier = bitalloc::solve_barrier(instance);
  bitalloc::FwConfig config;
  config.step_rule = bitalloc::StepRule::kAdaptiveLipschitz;
  config.max_iterations = 20000;
  config.gap_tolerance = 1e-6;
  const auto fw = bitalloc::solve_fw(
      instance, config, bitalloc::BitVector::continuous(Eigen::VectorXd::Constant(13, 2.0)));
  EXPECT_TRUE(fw.certificate_holds());
  EXPECT_LE(std::abs(fw.final_objective - barrier.trace.final_objective) /
                barrier.trace.final_objective,
            1e-3);
  // The barrier optimum is at least as good up to its tolerance.
  EXPECT_LE(barrier.trace.final_objective, fw.final_objective * (1.0 + 1e-6));
}

TEST(SolveBarrier, RejectsBadStartAndConfig) {
  const auto instance = scalar_instance();
  EXPECT_THROW(bitalloc::solve_barrier(instance, {},
                                       bitalloc::BitVector::continuous(Eigen::VectorXd::Constant(1, 2.0))),
               bitalloc::Error);
  BarrierConfig bad;
  bad.mu_decrease_factor = 1.5;
  EXPECT_THROW(bitalloc::solve_barrier(instance, bad), bitalloc::Error);
}

TEST(SolveBarrier, TimeLimitIsReported) {
  std::mt19937_64 rng(42);
  const auto instance = random_instance(rng, 40, 80, 160.0);
  BarrierConfig config;
  config.time_limit = std::chrono::duration<double>(1e-3);
  EXPECT_EQ(bitalloc::solve_barrier(instance, config).trace.termination,
            bitalloc::Termination::kTimeLimit);
}

TEST(Multipliers, RecoveredFromBarrierConditions) {
  const auto instance = scalar_instance();
  const Eigen::VectorXd b = Eigen::VectorXd::Constant(1, 1.5);
  const auto eval = bitalloc::evaluate(instance, b);
  const auto kkt = bitalloc::recover_multipliers(instance, b, eval.gradient, 0.01);
  EXPECT_NEAR(kkt.lambda, 0.01 / 0.5, 1e-15);
  EXPECT_NEAR(kkt.mu_bounds(0), 0.01 / 1.5, 1e-15);
  EXPECT_NEAR(kkt.complementarity_residual, 0.01, 1e-15);
}

}  // namespace
