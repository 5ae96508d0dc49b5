#include <cmath>
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "bitalloc/frank_wolfe.hpp"
#include "bitalloc/instances.hpp"
#include "test_support.hpp"

namespace {

using bitalloc::BitVector;
using bitalloc::FwConfig;
using bitalloc::ProblemInstance;
using bitalloc::StepRule;
using bitalloc::testing::random_instance;

ProblemInstance scalar_instance() {
  return ProblemInstance::with_identity_prior(Eigen::MatrixXd::Ones(1, 1),
                                              Eigen::VectorXd::Ones(1), 2.0);
}

BitVector uniform_start(const ProblemInstance& instance) {
  return BitVector::continuous(Eigen::VectorXd::Constant(
      instance.num_sensors(), instance.budget() / static_cast<double>(instance.num_sensors())));
}

// Brute force over {0, B e_1, ..., B e_m}.
double best_vertex_value(const Eigen::VectorXd& g, double budget) {
  double best = 0.0;
  for (Eigen::Index i = 0; i < g.size(); ++i) best = std::min(best, budget * g(i));
  return best;
}

void expect_certificate(const bitalloc::SolveTrace& trace) {
  EXPECT_TRUE(trace.certificate_holds())
      << "min gap " << trace.min_gap << " bound " << trace.rate_bound;
  for (const auto& it : trace.iterates) EXPECT_GE(it.gap, -1e-12);
}

TEST(Lmo, Examples) {
  EXPECT_EQ(bitalloc::lmo(Eigen::Vector3d(-3, -1, -2), 4.0).bits, Eigen::Vector3d(4, 0, 0));
  EXPECT_EQ(bitalloc::lmo(Eigen::Vector2d(0.5, 0.2), 4.0).bits, Eigen::Vector2d(0, 0));
  EXPECT_EQ(bitalloc::lmo(Eigen::Vector2d(-2, -2), 1.0).bits, Eigen::Vector2d(1, 0));
  EXPECT_EQ(bitalloc::lmo_index(Eigen::Vector2d(0.5, 0.2)), -1);
  EXPECT_THROW(bitalloc::lmo(Eigen::VectorXd(), 1.0), bitalloc::Error);
}

TEST(Lmo, AttainsBruteForceMinimum) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> normal;
  std::uniform_int_distribution<int> size(1, 50);
  for (int k = 0; k < 500; ++k) {
    Eigen::VectorXd g(size(rng));
    for (Eigen::Index i = 0; i < g.size(); ++i) g(i) = normal(rng) + (k % 3 == 0 ? 1.5 : 0.0);
    const double budget = 1.0 + k % 7;
    const BitVector s = bitalloc::lmo(g, budget);
    EXPECT_DOUBLE_EQ(s.bits.dot(g), best_vertex_value(g, budget));
  }
}

TEST(Gap, Examples) {
  EXPECT_DOUBLE_EQ(bitalloc::fw_gap(Eigen::Vector2d(0, 0), Eigen::Vector2d(-3, -1), 4.0), 12.0);
  // At the vertex B e_1 with a constant gradient the gap is zero.
  EXPECT_DOUBLE_EQ(bitalloc::fw_gap(Eigen::Vector2d(3, 0), Eigen::Vector2d(-2, -2), 3.0), 0.0);
}

TEST(Gap, ClosedFormMatchesVertexProduct) {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> normal;
  for (int k = 0; k < 200; ++k) {
    Eigen::VectorXd g(8), b(8);
    for (int i = 0; i < 8; ++i) {
      g(i) = normal(rng);
      b(i) = std::abs(normal(rng));
    }
    EXPECT_NEAR(bitalloc::fw_gap(b, g, 10.0), bitalloc::fw_gap_via_vertex(b, g, 10.0), 1e-12);
  }
}

TEST(SolveFw, ScalarApproachesSaturation) {
  FwConfig config;
  config.max_iterations = 20000;
  config.gap_tolerance = 1e-9;
  const auto slow = bitalloc::solve_fw(scalar_instance(), config);
  EXPECT_GT(slow.final_bits.bits(0), 1.9);
  EXPECT_LE(slow.final_bits.bits(0), 2.0);
  expect_certificate(slow);

  config.step_rule = StepRule::kAdaptiveLipschitz;
  const auto fast = bitalloc::solve_fw(scalar_instance(), config);
  EXPECT_NEAR(fast.final_bits.bits(0), 2.0, 1e-6);
  EXPECT_NEAR(fast.final_objective, 1.0 / 17.0, 1e-7);
  expect_certificate(fast);
}

TEST(SolveFw, IteratesStayFeasibleAndSlackContracts) {
  std::mt19937_64 rng(31);
  const auto instance = random_instance(rng, 5, 9, 18.0);
  FwConfig config;
  config.max_iterations = 300;
  double worst = -std::numeric_limits<double>::infinity();
  config.on_iterate = [&](int, const Eigen::VectorXd& b) {
    worst = std::max({worst, -b.minCoeff(), b.sum() - instance.budget()});
  };
  const auto trace = bitalloc::solve_fw(instance, config);
  EXPECT_LE(worst, 1e-12);
  expect_certificate(trace);

  // From 0, every vertex is saturating, so slack(T) = B prod(1 - gamma_t).
  double contraction = 1.0;
  for (const auto& it : trace.iterates) contraction *= 1.0 - it.step;
  EXPECT_LE(instance.budget() - trace.final_bits.total(),
            instance.budget() * contraction * (1.0 + 1e-9) + 1e-12);
}

TEST(SolveFw, AdaptiveDescendsAndRespectsGlobalL) {
  std::mt19937_64 rng(32);
  for (int trial = 0; trial < 4; ++trial) {
    const auto instance = random_instance(rng, 4 + trial, 6 + 2 * trial, 12.0 + 4 * trial);
    FwConfig config;
    config.step_rule = StepRule::kAdaptiveLipschitz;
    config.max_iterations = 400;
    const auto trace = bitalloc::solve_fw(instance, config);
    const double global = bitalloc::lipschitz_constant(instance);
    for (std::size_t t = 0; t < trace.iterates.size(); ++t) {
      const auto& it = trace.iterates[t];
      EXPECT_LE(it.lipschitz_estimate, global);
      if (t + 1 < trace.iterates.size()) {
        const auto& next = trace.iterates[t + 1];
        EXPECT_LE(next.objective, it.objective + 1e-15);
        // Sufficient decrease, unless the estimate was capped at L.
        if (it.lipschitz_estimate < global) {
          EXPECT_LE(next.objective, it.objective - 0.5 * it.step * it.gap + 1e-15);
        }
      }
    }
    expect_certificate(trace);
  }
}

// B = 1000: early trial steps put hundreds of bits on one channel, where the
// Cholesky of M breaks down. Those trials must be rejected, not fatal.
TEST(SolveFw, AdaptiveSurvivesHugeTrialSteps) {
  std::mt19937_64 rng(36);
  const auto instance = random_instance(rng, 10, 500, 1000.0, true);
  FwConfig config;
  config.step_rule = StepRule::kAdaptiveLipschitz;
  config.max_iterations = 300;
  config.gap_tolerance = 1e-12;
  bitalloc::SolveTrace trace;
  ASSERT_NO_THROW(trace = bitalloc::solve_fw(instance, config, uniform_start(instance)));
  EXPECT_LT(trace.final_objective, trace.iterates.front().objective);
  EXPECT_NEAR(trace.final_bits.total(), instance.budget(), 1e-9);
  expect_certificate(trace);
}

TEST(SolveFw, WarmStartAndStopping) {
  bitalloc::InstanceSpec spec;
  spec.d = spec.m = 13;
  spec.seed = 33;
  const auto instance = bitalloc::generate(spec);
  FwConfig config;
  config.step_rule = StepRule::kAdaptiveLipschitz;
  config.max_iterations = 50000;
  config.gap_tolerance = 1e-5;
  const auto trace = bitalloc::solve_fw(instance, config, uniform_start(instance));
  EXPECT_EQ(trace.termination, bitalloc::Termination::kGapConverged);
  EXPECT_LE(trace.iterates.back().gap, 1e-5);
  EXPECT_NEAR(trace.final_bits.total(), instance.budget(), 1e-9);
  expect_certificate(trace);

  config.max_iterations = 3;
  config.gap_tolerance = 1e-14;
  EXPECT_EQ(bitalloc::solve_fw(instance, config).termination,
            bitalloc::Termination::kMaxIterations);
}

TEST(SolveFw, TimeLimitIsReported) {
  std::mt19937_64 rng(34);
  const auto instance = random_instance(rng, 30, 60, 120.0);
  FwConfig config;
  config.max_iterations = 1000000;
  config.gap_tolerance = 1e-14;
  config.time_limit = std::chrono::duration<double>(0.05);
  const auto trace = bitalloc::solve_fw(instance, config);
  EXPECT_EQ(trace.termination, bitalloc::Termination::kTimeLimit);
  expect_certificate(trace);
}

TEST(SolveFw, RejectsBadInputs) {
  const auto instance = scalar_instance();
  EXPECT_THROW(bitalloc::solve_fw(instance, {}, BitVector::continuous(Eigen::Vector2d(0, 0))),
               bitalloc::Error);
  EXPECT_THROW(bitalloc::solve_fw(instance, {}, BitVector::continuous(Eigen::VectorXd::Constant(1, 3.0))),
               bitalloc::Error);
  FwConfig bad;
  bad.max_iterations = 0;
  EXPECT_THROW(bitalloc::solve_fw(instance, bad), bitalloc::Error);
}

TEST(SolveFw, Deterministic) {
  std::mt19937_64 rng(35);
  const auto instance = random_instance(rng, 5, 8, 16.0);
  FwConfig config;
  config.step_rule = StepRule::kAdaptiveLipschitz;
  const auto a = bitalloc::solve_fw(instance, config);
  const auto b = bitalloc::solve_fw(instance, config);
  EXPECT_EQ(a.final_bits.bits, b.final_bits.bits);
  ASSERT_EQ(a.iterates.size(), b.iterates.size());
  for (std::size_t t = 0; t < a.iterates.size(); ++t) {
    EXPECT_EQ(a.iterates[t].objective, b.iterates[t].objective);
    EXPECT_EQ(a.iterates[t].step, b.iterates[t].step);
  }
}

}  // namespace
