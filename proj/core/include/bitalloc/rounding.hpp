#pragma once

#include <cstdint>
#include <limits>

#include "bitalloc/problem.hpp"

namespace bitalloc {

/// Output of largest-remainder rounding plus its distance and objective
/// guarantees. gap_bound / gap_actual stay NaN until rounding_report() fills
/// them against an instance.
struct RoundingReport {
  BitVector rounded_bits;
  Eigen::VectorXd remainder_vector;  // r = b - floor(b), in [0, 1)
  std::int64_t residual_budget = 0;  // R_rem
  double distance_squared = 0.0;     // ||b_hat - b||^2
  double distance_bound = 0.0;       // sum_i r_i (1 - r_i)
  double gap_bound = std::numeric_limits<double>::quiet_NaN();
  double simplified_gap_bound = std::numeric_limits<double>::quiet_NaN();
  double gap_actual = std::numeric_limits<double>::quiet_NaN();
};

/// Budget slack tolerated in the continuous input, relative to max(1, B).
/// Matches the barrier's saturation target B - 1^T b <= 1e-6 B; its terminal
/// slack is about mu_final / lambda and grows as the gradients shrink.
inline constexpr double kRoundingBudgetTolerance = 1e-6;

/// Floors every coordinate and rounds up the R_rem coordinates with the
/// largest fractional parts (ties to the lowest index). The budget must be an
/// integer and b must be budget-saturated to within
/// kRoundingBudgetTolerance * max(1, B).
RoundingReport round_largest_remainder(const BitVector& continuous, double budget);

/// Brute force over all xi in {0,1}^m with 1^T xi = R_rem: true iff `rounded`
/// attains the minimum distance to `continuous`. Refuses m > 20.
bool verify_nearest_point(const BitVector& continuous, const BitVector& rounded);

struct GapBounds {
  double gap_bound = 0.0;         // (L/2) sum_i r_i (1 - r_i)
  double simplified_bound = 0.0;  // (L/2) min{R_rem, m/4}
};

GapBounds rounding_gap_bound(const BitVector& continuous, double budget, double lipschitz);

/// Rounds, then evaluates F at both points and fills the gap fields with the
/// instance's global Lipschitz constant.
RoundingReport rounding_report(const ProblemInstance& instance, const BitVector& continuous);

}  // namespace bitalloc
