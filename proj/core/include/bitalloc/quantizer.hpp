#pragma once

#include <cstdint>

#include "bitalloc/problem.hpp"

namespace bitalloc {

enum class DitherMode {
  kNonSubtractive,  // Q(v) = Delta (floor((v + tau) / Delta) + 1/2)
  kSubtractive,     // same, with tau removed after quantization
};

/// Per-channel uniform quantizers with bin widths Delta_i = R_i / 2^{b_i}.
struct QuantizerBank {
  Eigen::VectorXd bin_widths;
  DitherMode dither_mode = DitherMode::kNonSubtractive;
  std::uint64_t rng_seed = 0;

  /// R_i = sqrt(12 / kappa_i), so Delta_i^2 / 12 = 1 / rho_i.
  static QuantizerBank for_allocation(const ProblemInstance& instance, const Eigen::VectorXd& bits,
                                      DitherMode mode, std::uint64_t seed);
};

struct MonteCarloReport {
  std::int64_t sample_count = 0;
  double empirical_mse = 0.0;
  double analytic_mse = 0.0;
  double standard_error = 0.0;
  Eigen::VectorXd empirical_error_mean;      // per channel, mean of y_i - <h_i, x>
  Eigen::VectorXd error_mean_standard_error;  // per channel
  /// Kolmogorov-Smirnov distance of the normalized errors e_i / Delta_i + 1/2
  /// (pooled over channels) from Uniform(0, 1).
  double uniformity_ks_distance = 0.0;
};

/// Mid-rise dithered quantizer. Requires Delta > 0 and |tau| <= Delta / 2.
double quantize(double value, double bin_width, double dither, DitherMode mode);

/// Draws x ~ N(0, C_x), quantizes every <h_i, x> with independent uniform
/// dither, forms the LMMSE estimate C_x H^T (H C_x H^T + D)^{-1} y with
/// D = diag(Delta_i^2 / 12) and compares the empirical MSE with tr(C_eps(b)).
///
/// Samples are drawn in fixed-size blocks, each with its own stream seeded
/// from (rng_seed, block index), so results depend only on the seed.
MonteCarloReport simulate_lmmse(const ProblemInstance& instance, const BitVector& bits,
                                std::int64_t sample_count, const QuantizerBank& bank);

}  // namespace bitalloc
