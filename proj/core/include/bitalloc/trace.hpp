#pragma once

#include <limits>
#include <string_view>
#include <vector>

#include "bitalloc/problem.hpp"

namespace bitalloc {

enum class Termination {
  kGapConverged,    // FW gap <= tolerance
  kKktConverged,    // barrier reached mu_final with inner convergence
  kMaxIterations,
  kTimeLimit,
};

std::string_view to_string(Termination termination);

/// One solver iteration. Frank-Wolfe fills `gap` with the FW gap and
/// `vertex` with the LMO index; the barrier solver fills `gap` with the
/// infinity norm of the barrier gradient and leaves `vertex` at -1.
struct IterationRecord {
  int iteration = 0;
  double objective = 0.0;
  double gap = 0.0;
  double step = 0.0;
  int vertex = -1;
  double elapsed_seconds = 0.0;
  double lipschitz_estimate = std::numeric_limits<double>::quiet_NaN();
  double barrier_mu = std::numeric_limits<double>::quiet_NaN();
};

struct SolveTrace {
  std::vector<IterationRecord> iterates;
  BitVector final_bits;
  double final_objective = 0.0;
  Termination termination = Termination::kMaxIterations;
  double elapsed_seconds = 0.0;

  // Frank-Wolfe convergence certificate: the smallest gap seen, and the
  // rate bound max{2 h0, 2 L B^2} / sqrt(T + 1) evaluated with the
  // computable h0 estimate F(b0) - min_t F(b_t).
  double min_gap = std::numeric_limits<double>::infinity();
  double h0_estimate = 0.0;
  double rate_bound = std::numeric_limits<double>::infinity();
  double lipschitz = 0.0;

  int iterations() const noexcept { return static_cast<int>(iterates.size()); }
  bool certificate_holds() const noexcept { return min_gap <= rate_bound; }
};

}  // namespace bitalloc
