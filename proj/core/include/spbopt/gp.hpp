#pragma once

#include <Eigen/Core>
#include <optional>
#include <stdexcept>
#include <utility>

#include "spbopt/rng.hpp"

namespace spbopt {

class GpError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised when K + sigma_n^2 I is numerically non-PSD.
class CholeskyError : public GpError {
 public:
  using GpError::GpError;
};

// Matern-5/2 ARD kernel hyper-parameters.
struct GpParams {
  Eigen::VectorXd lengthscales;
  double signal_var = 1.0;
  double noise_var = 1e-3;
};

// Fit settings. Bounds apply on the standardized-target scale.
struct GpConfig {
  double lengthscale_lo = 0.005;
  double lengthscale_hi = 2.0;
  double signal_lo = 0.05;
  double signal_hi = 20.0;
  double noise_lo = 1e-6;
  double noise_hi = 0.1;
  int n_restarts = 3;   // random starts in addition to the warm start
  int max_iters = 50;   // ascent iterations per start
  bool optimize = true;  // false: keep the warm-start parameters as-is
  std::optional<GpParams> warm_start;
};

// Gaussian process regressor on unit-cube inputs. Targets are standardized
// internally (zero mean, unit variance); predictions are returned in the
// original units. Immutable after fit.
class GpModel {
 public:
  const Eigen::MatrixXd& X() const { return X_; }
  int n() const { return static_cast<int>(X_.rows()); }
  int dim() const { return static_cast<int>(X_.cols()); }
  const GpParams& params() const { return params_; }
  double y_mean() const { return y_mean_; }
  double y_scale() const { return y_scale_; }
  double lml() const { return lml_; }

  // Posterior over the latent function at query rows (original y units).
  // cov is symmetrized and eigenvalue-clamped at zero, so it is PSD.
  void posterior(const Eigen::MatrixXd& Xq, Eigen::VectorXd* mean,
                 Eigen::MatrixXd* cov) const;

  // Joint posterior draws: s rows, one query column each. Uses a Cholesky
  // factor with jitter escalation and falls back to an eigenvalue-clamped
  // factor, so degenerate covariances are handled.
  Eigen::MatrixXd sample_posterior(const Eigen::MatrixXd& Xq, int s,
                                   Rng& rng) const;

  friend GpModel fit_gp(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                        const GpConfig& config, Rng& rng);

 private:
  GpModel() = default;
  void posterior_raw(const Eigen::MatrixXd& Xq, Eigen::VectorXd* mean,
                     Eigen::MatrixXd* cov) const;

  Eigen::MatrixXd X_;
  Eigen::VectorXd y_std_;
  double y_mean_ = 0.0;
  double y_scale_ = 1.0;
  GpParams params_;
  Eigen::MatrixXd chol_;   // lower factor of K + noise I (+ jitter if needed)
  Eigen::VectorXd alpha_;  // (K + noise I)^-1 y_std
  double lml_ = 0.0;
};

// Maximizes the log marginal likelihood over the config bounds with a
// projected-gradient ascent from the warm start (or a default) plus
// config.n_restarts random starts. Deterministic given the rng stream.
GpModel fit_gp(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
               const GpConfig& config, Rng& rng);

// Log marginal likelihood of y under the kernel at `params` and its
// analytic gradient with respect to [log l_1..d, log sigma_f^2,
// log sigma_n^2]. Throws CholeskyError when K + noise I is not PSD.
std::pair<double, Eigen::VectorXd> log_marginal_likelihood(
    const GpParams& params, const Eigen::MatrixXd& X, const Eigen::VectorXd& y);

// Matern-5/2 ARD kernel matrix between row sets A and B (no noise term).
Eigen::MatrixXd matern52_kernel(const GpParams& params, const Eigen::MatrixXd& A,
                                const Eigen::MatrixXd& B);

// F with F F^T ~= cov: Cholesky with escalating jitter, falling back to an
// eigendecomposition with negative eigenvalues clamped to zero.
Eigen::MatrixXd psd_factor(const Eigen::MatrixXd& cov);

// s independent draws from N(mean, cov), one per row.
Eigen::MatrixXd sample_mvn(const Eigen::VectorXd& mean,
                           const Eigen::MatrixXd& cov, int s, Rng& rng);

}  // namespace spbopt
