#pragma once

#include <Eigen/Core>
#include <cmath>
#include <functional>

#include "spbopt/gp.hpp"
#include "spbopt/rng.hpp"

namespace spbopt {

struct TrustRegionConfig {
  double length_init = 0.8;
  double length_min = 0.0078125;  // 0.5^7
  double length_max = 1.6;
  int succ_tol = 3;
  int fail_tol = 4;
  double success_rel_tol = 1e-3;  // relative improvement that counts as success
  int cand_per_dim = 100;
  int cand_cap = 5000;
};

// Hyper-rectangle around the incumbent. `length` is the scalar base side
// length; per-dimension side lengths are derived from the GP lengthscales
// when proposing. At most one streak counter is nonzero.
struct TrustRegion {
  Eigen::VectorXd center;
  Eigen::VectorXd lengths;
  double length = 0.8;
  int succ_count = 0;
  int fail_count = 0;
};

// Signed region score: >= 0 means inside. +inf accepts everything.
using RegionMargin = std::function<double(const Eigen::VectorXd&)>;

TrustRegion init_trust_region(int dim, const Eigen::VectorXd& incumbent,
                              const TrustRegionConfig& config = {});

// Side lengths = length * lengthscales / geomean(lengthscales); pass
// nullptr to skip the lengthscale weighting.
Eigen::VectorXd side_lengths(const TrustRegion& tr, const GpModel* gp,
                             const TrustRegionConfig& config = {});

// Proposes B points: draws min(100 d, 5000) candidates in the trust-region
// box (stratified uniform draws, each perturbing a random coordinate subset
// of the center with probability min(1, 20/d)), keeps those inside the
// region — topping up with the rejected candidates closest to the region
// boundary when fewer than B survive — and picks the per-sample argmins of
// B joint posterior draws, resolving duplicates by next-best.
Eigen::MatrixXd propose_batch(TrustRegion& tr, const GpModel& gp,
                              const RegionMargin& region, int batch, Rng& rng,
                              const TrustRegionConfig& config = {});

struct TrustRegionUpdate {
  bool success = false;
  bool expanded = false;
  bool halved = false;
  bool collapsed = false;  // halving pushed length below length_min
  double length_before = 0.0;
  double length_mid = 0.0;  // after streak handling, before decay
  double length_after = 0.0;
};

// Streak bookkeeping first (doubling at succ_tol, halving at fail_tol),
// then the unconditional decay multiplier once t > K/2. Decay may shrink
// the length past length_min; only halving flags a collapse.
TrustRegionUpdate update_trust_region(TrustRegion& tr, double batch_min,
                                      double incumbent_y,
                                      const Eigen::VectorXd& batch_best_u,
                                      int t, int K, double decay,
                                      const TrustRegionConfig& config = {});

}  // namespace spbopt
