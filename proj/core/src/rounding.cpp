#include "bitalloc/rounding.hpp"

#include <algorithm>
#include <bit>
#include <limits>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

namespace bitalloc {

namespace {

std::int64_t integral_budget(double budget) {
  const double nearest = std::round(budget);
  if (!(budget >= 0.0) || std::abs(budget - nearest) > 1e-9) {
    throw Error(ErrorCode::kInvalidArgument,
                "rounding needs a nonnegative integer budget, got " + std::to_string(budget));
  }
  return static_cast<std::int64_t>(nearest);
}

struct Split {
  Eigen::VectorXd floors;
  Eigen::VectorXd remainders;
  std::int64_t floor_total = 0;
};

Split split(const Eigen::VectorXd& bits) {
  Split out;
  out.floors.resize(bits.size());
  out.remainders.resize(bits.size());
  for (Eigen::Index i = 0; i < bits.size(); ++i) {
    const double value = std::max(bits(i), 0.0);
    const double floored = std::floor(value);
    out.floors(i) = floored;
    out.remainders(i) = value - floored;
    out.floor_total += static_cast<std::int64_t>(floored);
  }
  return out;
}

void check_input(const Eigen::VectorXd& bits, double budget) {
  for (Eigen::Index i = 0; i < bits.size(); ++i) {
    if (!std::isfinite(bits(i)) || bits(i) < -1e-12) {
      throw Error(ErrorCode::kInvalidArgument,
                  "component " + std::to_string(i) + " is negative or non-finite");
    }
  }
  const double total = bits.sum();
  if (std::abs(total - budget) > kRoundingBudgetTolerance * std::max(1.0, budget)) {
    throw Error(ErrorCode::kInfeasible, "continuous allocation sums to " + std::to_string(total) +
                                            ", expected the saturated budget " +
                                            std::to_string(budget));
  }
}

}  // namespace

RoundingReport round_largest_remainder(const BitVector& continuous, double budget) {
  const std::int64_t total_bits = integral_budget(budget);
  check_input(continuous.bits, budget);
  const Eigen::Index m = continuous.size();

  Split parts = split(continuous.bits);
  const std::int64_t residual = total_bits - parts.floor_total;
  const auto positive = std::count_if(parts.remainders.data(), parts.remainders.data() + m,
                                      [](double r) { return r > 0.0; });
  if (residual < 0 || residual > positive) {
    throw Error(ErrorCode::kInfeasible, "residual budget " + std::to_string(residual) +
                                            " cannot be placed on " + std::to_string(positive) +
                                            " fractional coordinates");
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return parts.remainders(a) > parts.remainders(b);
  });

  Eigen::VectorXd rounded = parts.floors;
  for (std::int64_t k = 0; k < residual; ++k) rounded(order[static_cast<std::size_t>(k)]) += 1.0;

  RoundingReport report;
  report.residual_budget = residual;
  report.distance_squared = (rounded - continuous.bits).squaredNorm();
  report.distance_bound =
      parts.remainders.cwiseProduct((1.0 - parts.remainders.array()).matrix()).sum();
  report.remainder_vector = std::move(parts.remainders);
  report.rounded_bits = BitVector::integral(std::move(rounded));
  return report;
}

bool verify_nearest_point(const BitVector& continuous, const BitVector& rounded) {
  const Eigen::Index m = continuous.size();
  if (m > 20) {
    throw Error(ErrorCode::kTooLarge,
                "brute-force nearest-point check limited to m <= 20, got " + std::to_string(m));
  }
  if (rounded.size() != m) {
    throw Error(ErrorCode::kDimensionMismatch, "rounded allocation length differs");
  }
  const Split parts = split(continuous.bits);
  const Eigen::VectorXd increments = rounded.bits - parts.floors;
  int residual = 0;
  for (Eigen::Index i = 0; i < m; ++i) {
    if (increments(i) != 0.0 && increments(i) != 1.0) return false;
    residual += increments(i) == 1.0 ? 1 : 0;
  }

  const double candidate = (rounded.bits - continuous.bits).squaredNorm();
  double best = std::numeric_limits<double>::infinity();
  const std::uint32_t subsets = 1u << static_cast<unsigned>(m);
  for (std::uint32_t mask = 0; mask < subsets; ++mask) {
    if (std::popcount(mask) != residual) continue;
    double distance = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
      const double xi = (mask >> i) & 1u ? 1.0 : 0.0;
      const double diff = xi - parts.remainders(i);
      distance += diff * diff;
    }
    best = std::min(best, distance);
  }
  return candidate <= best + 1e-12;
}

GapBounds rounding_gap_bound(const BitVector& continuous, double budget, double lipschitz) {
  const Split parts = split(continuous.bits);
  const double spread = parts.remainders.cwiseProduct((1.0 - parts.remainders.array()).matrix()).sum();
  const double residual =
      std::max(0.0, std::round(budget - static_cast<double>(parts.floor_total)));
  const double quarter_m = static_cast<double>(continuous.size()) / 4.0;
  return GapBounds{0.5 * lipschitz * spread, 0.5 * lipschitz * std::min(residual, quarter_m)};
}

RoundingReport rounding_report(const ProblemInstance& instance, const BitVector& continuous) {
  RoundingReport report = round_largest_remainder(continuous, instance.budget());
  const GapBounds bounds =
      rounding_gap_bound(continuous, instance.budget(), lipschitz_constant(instance));
  report.gap_bound = bounds.gap_bound;
  report.simplified_gap_bound = bounds.simplified_bound;
  report.gap_actual =
      evaluate(instance, report.rounded_bits).objective - evaluate(instance, continuous).objective;
  return report;
}

}  // namespace bitalloc
