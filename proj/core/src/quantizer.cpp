#include "bitalloc/quantizer.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Cholesky>

namespace bitalloc {

namespace {

constexpr std::int64_t kBlockSize = 4096;

struct BlockSums {
  double squared_error = 0.0;
  double squared_error_sq = 0.0;
  Eigen::VectorXd channel_error;
  Eigen::VectorXd channel_error_sq;
  std::vector<double> normalized;
};

}  // namespace

QuantizerBank QuantizerBank::for_allocation(const ProblemInstance& instance,
                                            const Eigen::VectorXd& bits, DitherMode mode,
                                            std::uint64_t seed) {
  const Eigen::VectorXd rho = precision_from_bits(instance, bits);
  QuantizerBank bank;
  // Delta_i = R_i / 2^{b_i} with R_i = sqrt(12 / kappa_i), i.e. sqrt(12 / rho_i).
  bank.bin_widths = (12.0 / rho.array()).sqrt().matrix();
  bank.dither_mode = mode;
  bank.rng_seed = seed;
  return bank;
}

double quantize(double value, double bin_width, double dither, DitherMode mode) {
  if (!(bin_width > 0.0) || !(std::abs(dither) <= 0.5 * bin_width)) {
    throw Error(ErrorCode::kInvalidArgument, "quantize needs Delta > 0 and |tau| <= Delta / 2");
  }
  const double level = bin_width * (std::floor((value + dither) / bin_width) + 0.5);
  return mode == DitherMode::kSubtractive ? level - dither : level;
}

MonteCarloReport simulate_lmmse(const ProblemInstance& instance, const BitVector& bits,
                                std::int64_t sample_count, const QuantizerBank& bank) {
  const Eigen::Index m = instance.num_sensors();
  const Eigen::Index d = instance.state_dim();
  if (sample_count < 1) {
    throw Error(ErrorCode::kInvalidArgument, "sample_count must be >= 1");
  }
  if (bank.bin_widths.size() != m) {
    throw Error(ErrorCode::kDimensionMismatch, "quantizer bank has " +
                                                   std::to_string(bank.bin_widths.size()) +
                                                   " channels, expected " + std::to_string(m));
  }
  if (!(bank.bin_widths.array() > 0.0).all() || !bank.bin_widths.allFinite()) {
    throw Error(ErrorCode::kInvalidArgument, "bin widths must be positive and finite");
  }
  if (bits.size() != m || !(bits.bits.array() >= 0.0).all()) {
    throw Error(ErrorCode::kInvalidArgument, "bits must be a nonnegative length-m vector");
  }

  const Eigen::MatrixXd& sensing = instance.sensing();
  const Eigen::MatrixXd& prior = instance.prior_covariance();

  // LMMSE gain K = C_x H^T (H C_x H^T + D)^{-1}.
  Eigen::MatrixXd innovation = sensing * prior * sensing.transpose();
  innovation.diagonal() += (bank.bin_widths.array().square() / 12.0).matrix();
  Eigen::LLT<Eigen::MatrixXd> llt(innovation);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::kNotPositiveDefinite, "H C_x H^T + D is not positive definite");
  }
  const Eigen::MatrixXd gain = llt.solve(sensing * prior).transpose();

  MonteCarloReport report;
  report.sample_count = sample_count;
  report.analytic_mse = evaluate(instance, bits).objective;

  const std::int64_t blocks = (sample_count + kBlockSize - 1) / kBlockSize;
  BlockSums total;
  total.channel_error = Eigen::VectorXd::Zero(m);
  total.channel_error_sq = Eigen::VectorXd::Zero(m);
  total.normalized.reserve(static_cast<std::size_t>(sample_count * m));

  for (std::int64_t block = 0; block < blocks; ++block) {
    const std::int64_t count = std::min(kBlockSize, sample_count - block * kBlockSize);
    std::seed_seq seq{static_cast<std::uint32_t>(bank.rng_seed),
                      static_cast<std::uint32_t>(bank.rng_seed >> 32),
                      static_cast<std::uint32_t>(block),
                      static_cast<std::uint32_t>(static_cast<std::uint64_t>(block) >> 32)};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unit(-0.5, 0.5);

    Eigen::MatrixXd standard(d, count);
    for (Eigen::Index j = 0; j < count; ++j) {
      for (Eigen::Index k = 0; k < d; ++k) standard(k, j) = normal(rng);
    }
    const Eigen::MatrixXd states = instance.prior_factor() * standard;
    const Eigen::MatrixXd clean = sensing * states;

    Eigen::MatrixXd measured(m, count);
    for (Eigen::Index j = 0; j < count; ++j) {
      for (Eigen::Index i = 0; i < m; ++i) {
        const double width = bank.bin_widths(i);
        const double dither = width * unit(rng);
        measured(i, j) = quantize(clean(i, j), width, dither, bank.dither_mode);
      }
    }

    const Eigen::MatrixXd errors = measured - clean;
    const Eigen::MatrixXd estimates = gain * measured;
    const Eigen::VectorXd sample_mse = (estimates - states).colwise().squaredNorm().transpose();
    total.squared_error += sample_mse.sum();
    total.squared_error_sq += sample_mse.squaredNorm();
    total.channel_error += errors.rowwise().sum();
    total.channel_error_sq += errors.array().square().rowwise().sum().matrix();
    for (Eigen::Index j = 0; j < count; ++j) {
      for (Eigen::Index i = 0; i < m; ++i) {
        total.normalized.push_back(errors(i, j) / bank.bin_widths(i) + 0.5);
      }
    }
  }

  const double n = static_cast<double>(sample_count);
  report.empirical_mse = total.squared_error / n;
  const double mse_variance =
      sample_count > 1
          ? std::max(0.0, (total.squared_error_sq - n * report.empirical_mse * report.empirical_mse) /
                              (n - 1.0))
          : 0.0;
  report.standard_error = std::sqrt(mse_variance / n);

  report.empirical_error_mean = total.channel_error / n;
  report.error_mean_standard_error.resize(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double mean = report.empirical_error_mean(i);
    const double variance =
        sample_count > 1 ? std::max(0.0, (total.channel_error_sq(i) - n * mean * mean) / (n - 1.0))
                         : 0.0;
    report.error_mean_standard_error(i) = std::sqrt(variance / n);
  }

  std::sort(total.normalized.begin(), total.normalized.end());
  const double pooled = static_cast<double>(total.normalized.size());
  double ks = 0.0;
  for (std::size_t k = 0; k < total.normalized.size(); ++k) {
    const double u = std::clamp(total.normalized[k], 0.0, 1.0);
    ks = std::max({ks, static_cast<double>(k + 1) / pooled - u, u - static_cast<double>(k) / pooled});
  }
  report.uniformity_ks_distance = ks;
  return report;
}

}  // namespace bitalloc
