#include "spbopt/trust_region.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "spbopt/sampling.hpp"

namespace spbopt {

TrustRegion init_trust_region(int dim, const Eigen::VectorXd& incumbent,
                              const TrustRegionConfig& config) {
  if (dim < 1 || incumbent.size() != dim) {
    throw std::invalid_argument("init_trust_region: bad dimension");
  }
  if (incumbent.minCoeff() < 0.0 || incumbent.maxCoeff() > 1.0) {
    throw std::invalid_argument("init_trust_region: incumbent outside cube");
  }
  TrustRegion tr;
  tr.center = incumbent;
  tr.length = config.length_init;
  tr.lengths = Eigen::VectorXd::Constant(dim, config.length_init);
  return tr;
}

Eigen::VectorXd side_lengths(const TrustRegion& tr, const GpModel* gp,
                             const TrustRegionConfig&) {
  const auto dim = tr.center.size();
  if (gp == nullptr) return Eigen::VectorXd::Constant(dim, tr.length);
  const Eigen::VectorXd& ls = gp->params().lengthscales;
  const double log_gm = ls.array().log().mean();
  const Eigen::VectorXd weights = (ls.array().log() - log_gm).exp();
  return tr.length * weights;
}

Eigen::MatrixXd propose_batch(TrustRegion& tr, const GpModel& gp,
                              const RegionMargin& region, int batch, Rng& rng,
                              const TrustRegionConfig& config) {
  const int d = static_cast<int>(tr.center.size());
  if (batch < 1) throw std::invalid_argument("propose_batch: batch must be >= 1");
  if (gp.dim() != d) throw std::invalid_argument("propose_batch: gp dimension mismatch");

  tr.lengths = side_lengths(tr, &gp, config);
  const Eigen::VectorXd lo =
      (tr.center - 0.5 * tr.lengths).cwiseMax(0.0);
  const Eigen::VectorXd hi =
      (tr.center + 0.5 * tr.lengths).cwiseMin(1.0);

  const int n_cand = std::min(config.cand_per_dim * d, config.cand_cap);
  const DesignMatrix strata = latin_hypercube(n_cand, d, rng);
  const double perturb_prob = std::min(1.0, 20.0 / d);

  Eigen::MatrixXd cand(n_cand, d);
  for (int i = 0; i < n_cand; ++i) {
    cand.row(i) = tr.center.transpose();
    int perturbed = 0;
    for (int j = 0; j < d; ++j) {
      if (rng.uniform() < perturb_prob) {
        cand(i, j) = lo[j] + strata.points(i, j) * (hi[j] - lo[j]);
        ++perturbed;
      }
    }
    if (perturbed == 0) {
      const int j = static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(d)));
      cand(i, j) = lo[j] + strata.points(i, j) * (hi[j] - lo[j]);
    }
  }

  std::vector<int> pool;
  std::vector<std::pair<double, int>> rejected;  // (-margin, index)
  pool.reserve(static_cast<std::size_t>(n_cand));
  for (int i = 0; i < n_cand; ++i) {
    const double margin = region(cand.row(i).transpose());
    if (margin >= 0.0) {
      pool.push_back(i);
    } else {
      rejected.emplace_back(-margin, i);
    }
  }
  if (static_cast<int>(pool.size()) < batch) {
    // Top up with the rejected candidates closest to the region boundary.
    std::sort(rejected.begin(), rejected.end());
    for (const auto& [neg_margin, idx] : rejected) {
      pool.push_back(idx);
      if (static_cast<int>(pool.size()) == batch) break;
    }
  }

  const int m = static_cast<int>(pool.size());
  Eigen::MatrixXd pool_X(m, d);
  for (int i = 0; i < m; ++i) pool_X.row(i) = cand.row(pool[static_cast<std::size_t>(i)]);

  const Eigen::MatrixXd samples = gp.sample_posterior(pool_X, batch, rng);

  std::vector<bool> taken(static_cast<std::size_t>(m), false);
  Eigen::MatrixXd result(batch, d);
  for (int s = 0; s < batch; ++s) {
    int best = -1;
    for (int i = 0; i < m; ++i) {
      if (taken[static_cast<std::size_t>(i)]) continue;
      if (best < 0 || samples(s, i) < samples(s, best)) best = i;
    }
    if (best < 0) {
      // More draws than distinct candidates; reuse the per-sample argmin.
      best = 0;
      for (int i = 1; i < m; ++i) {
        if (samples(s, i) < samples(s, best)) best = i;
      }
    } else {
      taken[static_cast<std::size_t>(best)] = true;
    }
    result.row(s) = pool_X.row(best);
  }
  return result;
}

TrustRegionUpdate update_trust_region(TrustRegion& tr, double batch_min,
                                      double incumbent_y,
                                      const Eigen::VectorXd& batch_best_u,
                                      int t, int K, double decay,
                                      const TrustRegionConfig& config) {
  TrustRegionUpdate update;
  update.length_before = tr.length;

  // Any finite value improves on an empty incumbent.
  update.success =
      std::isfinite(incumbent_y)
          ? batch_min <
                incumbent_y - config.success_rel_tol * std::abs(incumbent_y)
          : batch_min < incumbent_y;
  if (update.success) {
    tr.succ_count += 1;
    tr.fail_count = 0;
  } else {
    tr.fail_count += 1;
    tr.succ_count = 0;
  }

  if (tr.succ_count >= config.succ_tol) {
    tr.length = std::min(2.0 * tr.length, config.length_max);
    tr.succ_count = 0;
    tr.fail_count = 0;
    update.expanded = true;
  } else if (tr.fail_count >= config.fail_tol) {
    tr.length *= 0.5;
    tr.succ_count = 0;
    tr.fail_count = 0;
    update.halved = true;
    update.collapsed = tr.length < config.length_min;
  }
  update.length_mid = tr.length;

  if (2 * t > K) tr.length *= decay;
  update.length_after = tr.length;

  if (update.success) tr.center = batch_best_u;
  return update;
}

}  // namespace spbopt
