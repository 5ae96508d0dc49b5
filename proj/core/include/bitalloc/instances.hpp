#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "bitalloc/problem.hpp"

namespace bitalloc {

enum class InstanceKind { kRandomGaussian, kGridLaplacian, kFromFiles };

std::string_view to_string(InstanceKind kind);
InstanceKind instance_kind_from_string(std::string_view name);

struct KappaRange {
  double low = 0.8;
  double high = 1.2;
};

/// File inputs for InstanceKind::kFromFiles. Only `sensing` is required;
/// the prior defaults to the identity and kappa is sampled unless either a
/// kappa vector or per-channel dynamic ranges (kappa = 12 / R^2) are given.
struct InstancePaths {
  std::string sensing;
  std::string prior;
  std::string kappa;
  std::string ranges;
};

struct InstanceSpec {
  InstanceKind kind = InstanceKind::kGridLaplacian;
  Eigen::Index d = 13;
  Eigen::Index m = 13;
  KappaRange kappa;
  /// B = floor(c * m) unless `budget` is set.
  double budget_per_sensor = 2.0;
  std::optional<double> budget;
  std::uint64_t seed = 0;
  InstancePaths paths;

  void validate() const;
};

/// Builds an instance. Random kinds draw everything from one mt19937_64
/// stream seeded with spec.seed, so equal specs give identical instances.
ProblemInstance generate(const InstanceSpec& spec);

/// Weighted Laplacian of a random connected graph on d + 1 nodes (average
/// degree about 3, weights uniform on [1, 10]) with node 0 removed.
Eigen::MatrixXd grounded_laplacian(Eigen::Index d, std::uint64_t seed);

/// floor(B / m) on every channel.
BitVector uniform_allocation(const ProblemInstance& instance);

}  // namespace bitalloc
