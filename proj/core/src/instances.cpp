#include "bitalloc/instances.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "bitalloc/matrix_io.hpp"

namespace bitalloc {

namespace {

constexpr int kMaxTopologyAttempts = 16;
constexpr Eigen::Index kTreeWindow = 5;
constexpr Eigen::Index kLoopReach = 7;

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
    return x;
  }

  void unite(std::size_t a, std::size_t b) { parent_[find(a)] = find(b); }

 private:
  std::vector<std::size_t> parent_;
};

struct Edge {
  Eigen::Index u;
  Eigen::Index v;
  double weight;
};

// Random tree with short-range attachments plus local loops: sparse and
// long-diameter, like a transmission network.
std::vector<Edge> random_topology(Eigen::Index nodes, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> weight(1.0, 10.0);
  std::vector<Edge> edges;
  std::set<std::pair<Eigen::Index, Eigen::Index>> seen;
  const auto add = [&](Eigen::Index a, Eigen::Index b) {
    const auto key = std::minmax(a, b);
    if (a == b || !seen.insert({key.first, key.second}).second) return;
    edges.push_back({key.first, key.second, weight(rng)});
  };

  for (Eigen::Index k = 1; k < nodes; ++k) {
    std::uniform_int_distribution<Eigen::Index> parent(std::max<Eigen::Index>(0, k - kTreeWindow),
                                                       k - 1);
    add(parent(rng), k);
  }

  const auto target = static_cast<std::size_t>(std::ceil(1.5 * static_cast<double>(nodes)));
  std::uniform_int_distribution<Eigen::Index> node(0, nodes - 1);
  std::uniform_int_distribution<Eigen::Index> reach(2, kLoopReach);
  for (Eigen::Index attempt = 0; attempt < 100 * nodes && edges.size() < target; ++attempt) {
    const Eigen::Index u = node(rng);
    const Eigen::Index v = u + reach(rng);
    if (v < nodes) add(u, v);
  }
  return edges;
}

bool connected(Eigen::Index nodes, const std::vector<Edge>& edges) {
  DisjointSets sets(static_cast<std::size_t>(nodes));
  for (const Edge& e : edges) sets.unite(static_cast<std::size_t>(e.u), static_cast<std::size_t>(e.v));
  const std::size_t root = sets.find(0);
  for (Eigen::Index k = 1; k < nodes; ++k) {
    if (sets.find(static_cast<std::size_t>(k)) != root) return false;
  }
  return true;
}

Eigen::VectorXd sample_kappa(Eigen::Index m, const KappaRange& range, std::mt19937_64& rng) {
  Eigen::VectorXd kappa(m);
  if (range.low == range.high) return kappa.setConstant(range.low);
  std::uniform_real_distribution<double> dist(range.low, range.high);
  for (Eigen::Index i = 0; i < m; ++i) kappa(i) = dist(rng);
  return kappa;
}

}  // namespace

std::string_view to_string(InstanceKind kind) {
  switch (kind) {
    case InstanceKind::kRandomGaussian: return "random_gaussian";
    case InstanceKind::kGridLaplacian: return "grid_laplacian";
    case InstanceKind::kFromFiles: return "from_files";
  }
  return "unknown";
}

InstanceKind instance_kind_from_string(std::string_view name) {
  if (name == "random_gaussian") return InstanceKind::kRandomGaussian;
  if (name == "grid_laplacian") return InstanceKind::kGridLaplacian;
  if (name == "from_files") return InstanceKind::kFromFiles;
  throw Error(ErrorCode::kParse, "unknown instance kind '" + std::string(name) +
                                     "' (expected random_gaussian, grid_laplacian or from_files)");
}

void InstanceSpec::validate() const {
  if (kind != InstanceKind::kFromFiles && (d < 1 || m < 1)) {
    throw Error(ErrorCode::kInvalidArgument, "instance dimensions d and m must be >= 1");
  }
  if (!(kappa.low > 0.0) || !(kappa.low <= kappa.high)) {
    throw Error(ErrorCode::kInvalidArgument, "kappa range needs 0 < low <= high");
  }
  if (!(budget_per_sensor >= 0.0) || !std::isfinite(budget_per_sensor)) {
    throw Error(ErrorCode::kInvalidArgument, "budget_per_sensor must be finite and >= 0");
  }
  if (budget && (!(*budget >= 0.0) || !std::isfinite(*budget))) {
    throw Error(ErrorCode::kInvalidArgument, "budget must be finite and >= 0");
  }
  if (kind == InstanceKind::kFromFiles && paths.sensing.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "from_files instances need paths.sensing");
  }
}

Eigen::MatrixXd grounded_laplacian(Eigen::Index d, std::uint64_t seed) {
  if (d < 1) throw Error(ErrorCode::kInvalidArgument, "grounded laplacian needs d >= 1");
  const Eigen::Index nodes = d + 1;
  std::mt19937_64 rng(seed);
  for (int attempt = 0; attempt < kMaxTopologyAttempts; ++attempt) {
    const std::vector<Edge> edges = random_topology(nodes, rng);
    if (!connected(nodes, edges)) continue;
    Eigen::MatrixXd laplacian = Eigen::MatrixXd::Zero(nodes, nodes);
    for (const Edge& e : edges) {
      laplacian(e.u, e.u) += e.weight;
      laplacian(e.v, e.v) += e.weight;
      laplacian(e.u, e.v) -= e.weight;
      laplacian(e.v, e.u) -= e.weight;
    }
    return laplacian.bottomRightCorner(d, d);
  }
  throw Error(ErrorCode::kInvalidArgument, "could not draw a connected topology after " +
                                               std::to_string(kMaxTopologyAttempts) + " attempts");
}

ProblemInstance generate(const InstanceSpec& spec) {
  spec.validate();

  Eigen::MatrixXd sensing;
  Eigen::MatrixXd prior;
  Eigen::VectorXd kappa;
  std::mt19937_64 rng(spec.seed);

  switch (spec.kind) {
    case InstanceKind::kRandomGaussian: {
      std::normal_distribution<double> normal(0.0, 1.0);
      sensing.resize(spec.m, spec.d);
      for (Eigen::Index i = 0; i < spec.m; ++i) {
        for (Eigen::Index j = 0; j < spec.d; ++j) sensing(i, j) = normal(rng);
      }
      kappa = sample_kappa(spec.m, spec.kappa, rng);
      break;
    }
    case InstanceKind::kGridLaplacian: {
      sensing = grounded_laplacian(spec.d, spec.seed);
      std::seed_seq kappa_seed{static_cast<std::uint32_t>(spec.seed),
                               static_cast<std::uint32_t>(spec.seed >> 32), 0x6b617070u};
      std::mt19937_64 kappa_rng(kappa_seed);
      kappa = sample_kappa(sensing.rows(), spec.kappa, kappa_rng);
      break;
    }
    case InstanceKind::kFromFiles: {
      sensing = load_matrix(spec.paths.sensing);
      if (!spec.paths.prior.empty()) {
        prior = load_matrix(spec.paths.prior);
        if (prior.rows() != prior.cols()) {
          throw Error(ErrorCode::kDimensionMismatch,
                      "prior covariance in " + spec.paths.prior + " is not square (" +
                          std::to_string(prior.rows()) + "x" + std::to_string(prior.cols()) + ")");
        }
      }
      if (!spec.paths.kappa.empty()) {
        kappa = load_vector(spec.paths.kappa);
      } else if (!spec.paths.ranges.empty()) {
        kappa = ProblemInstance::kappa_from_ranges(load_vector(spec.paths.ranges));
      } else {
        kappa = sample_kappa(sensing.rows(), spec.kappa, rng);
      }
      break;
    }
  }

  const auto m = static_cast<double>(sensing.rows());
  const double budget = spec.budget.value_or(std::floor(spec.budget_per_sensor * m + 1e-9));
  if (prior.size() == 0) {
    return ProblemInstance::with_identity_prior(std::move(sensing), std::move(kappa), budget);
  }
  return ProblemInstance::create(std::move(sensing), std::move(prior), std::move(kappa), budget);
}

BitVector uniform_allocation(const ProblemInstance& instance) {
  const double per_channel =
      std::floor(instance.budget() / static_cast<double>(instance.num_sensors()) + 1e-12);
  return BitVector::integral(Eigen::VectorXd::Constant(instance.num_sensors(), per_channel));
}

}  // namespace bitalloc
