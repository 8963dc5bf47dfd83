#pragma once

#include <Eigen/Core>

#include "spbopt/rng.hpp"

namespace spbopt {

// Space-filling design: n points in [0,1)^d, one row per point.
struct DesignMatrix {
  Eigen::MatrixXd points;

  Eigen::Index n() const { return points.rows(); }
  Eigen::Index d() const { return points.cols(); }
};

// Largest dimension served by the deterministic sequences below
// (Sobol direction-number table / Halton prime table size).
inline constexpr int kMaxSequenceDim = 64;

// Latin hypercube design: every column places exactly one point in each of
// the n equal-width strata; within-stratum offsets are uniform and the
// column permutations are independent.
DesignMatrix latin_hypercube(int n, int d, Rng& rng);

// Design quality in (0,1]: (min pairwise Euclidean distance) /
// (max pairwise Euclidean distance). Higher is better; duplicated points
// give 0. Requires n >= 2.
double ratio_criterion(const DesignMatrix& design);

// Draws n_restarts independent Latin hypercubes and keeps the one with the
// highest ratio_criterion (ties keep the first).
DesignMatrix lhs_ratio(int n, int d, Rng& rng, int n_restarts = 100);

enum class Sequence {
  kSobol,       // Gray-code Sobol with Joe-Kuo direction numbers
  kHalton,      // bases = first d primes, indices 1..n
  kHammersley,  // first coordinate i/n, remaining coordinates Halton
};

// First n points of a deterministic low-discrepancy sequence.
// d must be <= kMaxSequenceDim.
DesignMatrix low_discrepancy(Sequence kind, int n, int d);

}  // namespace spbopt
