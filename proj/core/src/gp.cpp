#include "spbopt/gp.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace spbopt {
namespace {

constexpr double kSqrt5 = 2.2360679774997896964091736687747;
constexpr double kLogTwoPi = 1.8378770664093454835606594728112;

Eigen::MatrixXd scaled_sq_dist(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                               const Eigen::VectorXd& lengthscales) {
  const Eigen::MatrixXd As = A.array().rowwise() /
                             lengthscales.transpose().array();
  if (&A == &B) {
    // Self-kernel: evaluate each pair once so K is symmetric bitwise and
    // free of the cancellation in the norm-expansion shortcut.
    const auto n = As.rows();
    Eigen::MatrixXd sq(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      sq(i, i) = 0.0;
      for (Eigen::Index j = i + 1; j < n; ++j) {
        sq(i, j) = sq(j, i) = (As.row(i) - As.row(j)).squaredNorm();
      }
    }
    return sq;
  }
  const Eigen::MatrixXd Bs = B.array().rowwise() /
                             lengthscales.transpose().array();
  Eigen::MatrixXd sq = (-2.0 * As * Bs.transpose()).colwise() +
                       As.rowwise().squaredNorm();
  sq.rowwise() += Bs.rowwise().squaredNorm().transpose();
  return sq.cwiseMax(0.0);
}

// Lower Cholesky factor of K, escalating jitter 1e-10 .. 1e-4 (x10 steps)
// relative to the mean diagonal. Throws CholeskyError if every level fails.
Eigen::MatrixXd cholesky_with_jitter(const Eigen::MatrixXd& K) {
  const double scale = std::max(K.diagonal().mean(), 1e-300);
  double jitter = 0.0;
  for (int attempt = 0; attempt <= 7; ++attempt) {
    Eigen::MatrixXd Kj = K;
    if (jitter > 0.0) Kj.diagonal().array() += jitter * scale;
    Eigen::LLT<Eigen::MatrixXd> llt(Kj);
    if (llt.info() == Eigen::Success) {
      return llt.matrixL();
    }
    jitter = attempt == 0 ? 1e-10 : jitter * 10.0;
  }
  throw CholeskyError("kernel matrix not positive definite after max jitter");
}

struct Standardized {
  Eigen::VectorXd y;
  double mean = 0.0;
  double scale = 1.0;
  bool degenerate = false;
};

Standardized standardize(const Eigen::VectorXd& y) {
  Standardized out;
  out.mean = y.mean();
  const double var = (y.array() - out.mean).square().mean();
  const double sd = std::sqrt(var);
  if (sd < 1e-12) {
    out.scale = 1.0;
    out.degenerate = true;
    out.y = Eigen::VectorXd::Zero(y.size());
  } else {
    out.scale = sd;
    out.y = (y.array() - out.mean) / sd;
  }
  return out;
}

struct Bounds {
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;
};

Bounds log_bounds(const GpConfig& config, int d) {
  Bounds b;
  b.lo.resize(d + 2);
  b.hi.resize(d + 2);
  b.lo.head(d).setConstant(std::log(config.lengthscale_lo));
  b.hi.head(d).setConstant(std::log(config.lengthscale_hi));
  b.lo[d] = std::log(config.signal_lo);
  b.hi[d] = std::log(config.signal_hi);
  b.lo[d + 1] = std::log(config.noise_lo);
  b.hi[d + 1] = std::log(config.noise_hi);
  return b;
}

GpParams params_from_log(const Eigen::VectorXd& theta, int d) {
  GpParams p;
  p.lengthscales = theta.head(d).array().exp();
  p.signal_var = std::exp(theta[d]);
  p.noise_var = std::exp(theta[d + 1]);
  return p;
}

Eigen::VectorXd log_from_params(const GpParams& p) {
  const int d = static_cast<int>(p.lengthscales.size());
  Eigen::VectorXd theta(d + 2);
  theta.head(d) = p.lengthscales.array().log();
  theta[d] = std::log(p.signal_var);
  theta[d + 1] = std::log(p.noise_var);
  return theta;
}

double lml_value_only(const Eigen::VectorXd& theta, const Eigen::MatrixXd& X,
                      const Eigen::VectorXd& y) {
  const int d = static_cast<int>(X.cols());
  const GpParams p = params_from_log(theta, d);
  Eigen::MatrixXd K = matern52_kernel(p, X, X);
  K.diagonal().array() += p.noise_var;
  Eigen::LLT<Eigen::MatrixXd> llt(K);
  if (llt.info() != Eigen::Success) {
    return -std::numeric_limits<double>::infinity();
  }
  const Eigen::MatrixXd L = llt.matrixL();
  const Eigen::VectorXd alpha = llt.solve(y);
  return -0.5 * y.dot(alpha) - L.diagonal().array().log().sum() -
         0.5 * static_cast<double>(y.size()) * kLogTwoPi;
}

// One projected-gradient ascent run; returns the best (value, theta) seen.
std::pair<double, Eigen::VectorXd> ascend(Eigen::VectorXd theta,
                                          const Eigen::MatrixXd& X,
                                          const Eigen::VectorXd& y,
                                          const Bounds& bounds, int max_iters) {
  const int d = static_cast<int>(X.cols());
  auto clamp = [&](Eigen::VectorXd t) {
    return t.cwiseMax(bounds.lo).cwiseMin(bounds.hi).eval();
  };
  theta = clamp(std::move(theta));

  double value;
  Eigen::VectorXd grad;
  try {
    std::tie(value, grad) =
        log_marginal_likelihood(params_from_log(theta, d), X, y);
  } catch (const CholeskyError&) {
    return {-std::numeric_limits<double>::infinity(), theta};
  }

  double step = 0.1;
  for (int iter = 0; iter < max_iters; ++iter) {
    Eigen::VectorXd candidate;
    double cand_value = -std::numeric_limits<double>::infinity();
    bool accepted = false;
    for (int backtrack = 0; backtrack < 25; ++backtrack) {
      candidate = clamp(theta + step * grad);
      if ((candidate - theta).lpNorm<Eigen::Infinity>() < 1e-10) break;
      cand_value = lml_value_only(candidate, X, y);
      if (cand_value > value + 1e-12) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;

    const double move = (candidate - theta).lpNorm<Eigen::Infinity>();
    theta = std::move(candidate);
    value = cand_value;
    try {
      std::tie(value, grad) =
          log_marginal_likelihood(params_from_log(theta, d), X, y);
    } catch (const CholeskyError&) {
      break;
    }
    step = std::min(step * 2.0, 1.0);
    if (move < 1e-7) break;
  }
  return {value, theta};
}

}  // namespace

Eigen::MatrixXd matern52_kernel(const GpParams& params, const Eigen::MatrixXd& A,
                                const Eigen::MatrixXd& B) {
  const Eigen::ArrayXXd r =
      scaled_sq_dist(A, B, params.lengthscales).array().sqrt();
  return params.signal_var *
         ((1.0 + kSqrt5 * r + (5.0 / 3.0) * r.square()) * (-kSqrt5 * r).exp());
}

std::pair<double, Eigen::VectorXd> log_marginal_likelihood(
    const GpParams& params, const Eigen::MatrixXd& X,
    const Eigen::VectorXd& y) {
  const int n = static_cast<int>(X.rows());
  const int d = static_cast<int>(X.cols());
  if (params.lengthscales.size() != d) {
    throw GpError("log_marginal_likelihood: lengthscale dimension mismatch");
  }

  const Eigen::ArrayXXd r =
      scaled_sq_dist(X, X, params.lengthscales).array().sqrt();
  const Eigen::ArrayXXd expo = (-kSqrt5 * r).exp();
  const Eigen::MatrixXd K_signal =
      params.signal_var * ((1.0 + kSqrt5 * r + (5.0 / 3.0) * r.square()) * expo);

  Eigen::MatrixXd K = K_signal;
  K.diagonal().array() += params.noise_var;

  Eigen::LLT<Eigen::MatrixXd> llt(K);
  if (llt.info() != Eigen::Success) {
    throw CholeskyError("log_marginal_likelihood: kernel matrix not PSD");
  }
  const Eigen::MatrixXd L = llt.matrixL();
  const Eigen::VectorXd alpha = llt.solve(y);

  const double value = -0.5 * y.dot(alpha) -
                       L.diagonal().array().log().sum() - 0.5 * n * kLogTwoPi;

  // W = alpha alpha^T - K^-1; dLML/dtheta_j = 0.5 tr(W dK/dtheta_j)
  Eigen::MatrixXd W = -llt.solve(Eigen::MatrixXd::Identity(n, n));
  W.noalias() += alpha * alpha.transpose();

  Eigen::VectorXd grad(d + 2);
  // dK/dlog(l_j) = (5/3) sigma_f^2 (1 + sqrt5 r) exp(-sqrt5 r) * D_j / l_j^2
  const Eigen::ArrayXXd envelope =
      (5.0 / 3.0) * params.signal_var * (1.0 + kSqrt5 * r) * expo;
  for (int j = 0; j < d; ++j) {
    const Eigen::ArrayXXd diff_sq =
        (X.col(j).replicate(1, n) - X.col(j).transpose().replicate(n, 1))
            .array()
            .square();
    const double lj_sq = params.lengthscales[j] * params.lengthscales[j];
    grad[j] = 0.5 * (W.array() * envelope * diff_sq / lj_sq).sum();
  }
  grad[d] = 0.5 * (W.array() * K_signal.array()).sum();
  grad[d + 1] = 0.5 * params.noise_var * W.trace();
  return {value, std::move(grad)};
}

GpModel fit_gp(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
               const GpConfig& config, Rng& rng) {
  const int n = static_cast<int>(X.rows());
  const int d = static_cast<int>(X.cols());
  if (n < 2) throw GpError("fit_gp: need at least 2 observations");
  if (y.size() != n) throw GpError("fit_gp: X/y size mismatch");
  if (!X.allFinite() || !y.allFinite()) {
    throw GpError("fit_gp: inputs must be finite");
  }
  if (X.minCoeff() < 0.0 || X.maxCoeff() > 1.0) {
    throw GpError("fit_gp: rows must lie in the unit cube");
  }

  GpModel model;
  model.X_ = X;
  const Standardized std_y = standardize(y);
  model.y_std_ = std_y.y;
  model.y_mean_ = std_y.mean;
  model.y_scale_ = std_y.scale;

  const Bounds bounds = log_bounds(config, d);

  if (std_y.degenerate) {
    // Constant targets: pin everything at the bottom of the box, skip ML-II.
    model.params_.lengthscales = Eigen::VectorXd::Constant(d, 0.5);
    model.params_.signal_var = config.signal_lo;
    model.params_.noise_var = config.noise_lo;
  } else {
    GpParams start;
    if (config.warm_start && config.warm_start->lengthscales.size() == d) {
      start = *config.warm_start;
    } else {
      start.lengthscales = Eigen::VectorXd::Constant(d, 0.5);
      start.signal_var = 1.0;
      start.noise_var = 1e-3;
    }

    Eigen::VectorXd best_theta = log_from_params(start)
                                     .cwiseMax(bounds.lo)
                                     .cwiseMin(bounds.hi);
    if (!config.optimize) {
      model.params_ = params_from_log(best_theta, d);
    } else {
      double best_value = -std::numeric_limits<double>::infinity();
      std::vector<Eigen::VectorXd> starts;
      starts.push_back(best_theta);
      for (int restart = 0; restart < config.n_restarts; ++restart) {
        Eigen::VectorXd t(d + 2);
        for (int j = 0; j < d + 2; ++j) {
          t[j] = rng.uniform(bounds.lo[j], bounds.hi[j]);
        }
        starts.push_back(std::move(t));
      }
      for (const Eigen::VectorXd& s : starts) {
        auto [value, theta] =
            ascend(s, X, model.y_std_, bounds, config.max_iters);
        if (value > best_value) {
          best_value = value;
          best_theta = theta;
        }
      }
      if (!std::isfinite(best_value)) {
        throw GpError("fit_gp: no feasible hyper-parameters found");
      }
      model.params_ = params_from_log(best_theta, d);
    }
  }

  Eigen::MatrixXd K = matern52_kernel(model.params_, X, X);
  K.diagonal().array() += model.params_.noise_var;
  model.chol_ = cholesky_with_jitter(K);
  model.alpha_ = model.chol_.transpose().triangularView<Eigen::Upper>().solve(
      model.chol_.triangularView<Eigen::Lower>().solve(model.y_std_));
  model.lml_ = -0.5 * model.y_std_.dot(model.alpha_) -
               model.chol_.diagonal().array().log().sum() -
               0.5 * n * kLogTwoPi;
  return model;
}

void GpModel::posterior_raw(const Eigen::MatrixXd& Xq, Eigen::VectorXd* mean,
                            Eigen::MatrixXd* cov) const {
  if (Xq.cols() != X_.cols()) {
    throw GpError("posterior: query dimension mismatch");
  }
  const Eigen::MatrixXd K_cross = matern52_kernel(params_, X_, Xq);
  if (mean) {
    *mean = (y_mean_ +
             (y_scale_ * (K_cross.transpose() * alpha_).array()))
                .matrix();
  }
  if (cov) {
    const Eigen::MatrixXd V =
        chol_.triangularView<Eigen::Lower>().solve(K_cross);
    Eigen::MatrixXd C = matern52_kernel(params_, Xq, Xq);
    C.noalias() -= V.transpose() * V;
    *cov = 0.5 * (C + C.transpose()) * (y_scale_ * y_scale_);
  }
}

void GpModel::posterior(const Eigen::MatrixXd& Xq, Eigen::VectorXd* mean,
                        Eigen::MatrixXd* cov) const {
  posterior_raw(Xq, mean, cov);
  if (cov) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(*cov);
    const Eigen::VectorXd clamped = eig.eigenvalues().cwiseMax(0.0);
    *cov = eig.eigenvectors() * clamped.asDiagonal() *
           eig.eigenvectors().transpose();
    *cov = 0.5 * (*cov + cov->transpose());
  }
}

Eigen::MatrixXd GpModel::sample_posterior(const Eigen::MatrixXd& Xq, int s,
                                          Rng& rng) const {
  if (s < 1) throw GpError("sample_posterior: need s >= 1");
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
  posterior_raw(Xq, &mean, &cov);
  return sample_mvn(mean, cov, s, rng);
}

Eigen::MatrixXd psd_factor(const Eigen::MatrixXd& cov) {
  const int m = static_cast<int>(cov.rows());
  const double scale = std::max(cov.diagonal().cwiseAbs().maxCoeff(), 0.0);
  if (scale == 0.0) return Eigen::MatrixXd::Zero(m, m);

  double jitter = 0.0;
  for (int attempt = 0; attempt <= 6; ++attempt) {
    Eigen::MatrixXd Cj = cov;
    if (jitter > 0.0) Cj.diagonal().array() += jitter * scale;
    Eigen::LLT<Eigen::MatrixXd> llt(Cj);
    if (llt.info() == Eigen::Success) return llt.matrixL();
    jitter = attempt == 0 ? 1e-12 : jitter * 100.0;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  const Eigen::VectorXd sqrt_vals =
      eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * sqrt_vals.asDiagonal();
}

Eigen::MatrixXd sample_mvn(const Eigen::VectorXd& mean,
                           const Eigen::MatrixXd& cov, int s, Rng& rng) {
  const int m = static_cast<int>(mean.size());
  const Eigen::MatrixXd factor = psd_factor(cov);
  Eigen::MatrixXd samples(s, m);
  Eigen::VectorXd z(m);
  for (int i = 0; i < s; ++i) {
    for (int j = 0; j < m; ++j) z[j] = rng.normal();
    samples.row(i) = (mean + factor * z).transpose();
  }
  return samples;
}

}  // namespace spbopt
