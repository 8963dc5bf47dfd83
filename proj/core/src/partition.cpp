#include "spbopt/partition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace spbopt {
namespace {

double kernel_eval(const SplitModel& model, const Eigen::VectorXd& a,
                   const Eigen::VectorXd& b) {
  switch (model.kernel) {
    case SvmKernel::kLinear:
      return a.dot(b);
    case SvmKernel::kPoly:
      return std::pow(model.gamma * a.dot(b) + model.coef0, model.degree);
    case SvmKernel::kRbf:
      return std::exp(-model.gamma * (a - b).squaredNorm());
  }
  throw PartitionError("unknown SVM kernel");
}

// Sequential minimal optimization on the soft-margin dual. Deterministic:
// fixed sweep order, second index chosen by max |E1 - E2| with lowest-index
// tie break.
class SmoSolver {
 public:
  SmoSolver(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
            const SplitModel& model, double tol, int max_passes)
      : y_(y),
        n_(static_cast<int>(X.rows())),
        C_(model.C),
        tol_(tol),
        max_passes_(max_passes) {
    Q_.resize(n_, n_);
    for (int i = 0; i < n_; ++i) {
      for (int j = i; j < n_; ++j) {
        Q_(i, j) = Q_(j, i) = kernel_eval(model, X.row(i), X.row(j));
      }
    }
    alpha_ = Eigen::VectorXd::Zero(n_);
    errors_ = -y_;  // f = 0 everywhere at the start
  }

  void solve() {
    bool examine_all = true;
    int passes = 0;
    while (passes < max_passes_) {
      int changed = 0;
      for (int i = 0; i < n_; ++i) {
        if (examine_all || is_free(i)) changed += examine(i);
      }
      ++passes;
      if (examine_all) {
        if (changed == 0) break;
        examine_all = false;
      } else if (changed == 0) {
        examine_all = true;
      }
    }
  }

  const Eigen::VectorXd& alpha() const { return alpha_; }
  double bias() const { return b_; }

 private:
  bool is_free(int i) const {
    return alpha_[i] > 1e-12 * C_ && alpha_[i] < C_ * (1.0 - 1e-12);
  }

  int examine(int i2) {
    const double y2 = y_[i2];
    const double a2 = alpha_[i2];
    const double r2 = errors_[i2] * y2;
    const bool violates =
        (r2 < -tol_ && a2 < C_) || (r2 > tol_ && a2 > 0.0);
    if (!violates) return 0;

    // Best heuristic partner: maximize |E1 - E2| over free multipliers.
    int best = -1;
    double best_gap = -1.0;
    for (int i = 0; i < n_; ++i) {
      if (i == i2 || !is_free(i)) continue;
      const double gap = std::abs(errors_[i] - errors_[i2]);
      if (gap > best_gap) {
        best_gap = gap;
        best = i;
      }
    }
    if (best >= 0 && take_step(best, i2)) return 1;
    for (int i = 0; i < n_; ++i) {
      if (i != i2 && is_free(i) && take_step(i, i2)) return 1;
    }
    for (int i = 0; i < n_; ++i) {
      if (i != i2 && !is_free(i) && take_step(i, i2)) return 1;
    }
    return 0;
  }

  bool take_step(int i1, int i2) {
    if (i1 == i2) return false;
    const double a1 = alpha_[i1], a2 = alpha_[i2];
    const double y1 = y_[i1], y2 = y_[i2];
    const double E1 = errors_[i1], E2 = errors_[i2];

    double L, H;
    if (y1 != y2) {
      L = std::max(0.0, a2 - a1);
      H = std::min(C_, C_ + a2 - a1);
    } else {
      L = std::max(0.0, a1 + a2 - C_);
      H = std::min(C_, a1 + a2);
    }
    if (L >= H) return false;

    const double eta = Q_(i1, i1) + Q_(i2, i2) - 2.0 * Q_(i1, i2);
    if (eta <= 1e-12) return false;  // flat direction, skip the pair

    double a2_new = a2 + y2 * (E1 - E2) / eta;
    a2_new = std::clamp(a2_new, L, H);
    if (a2_new < 1e-8 * C_) a2_new = 0.0;
    if (a2_new > (1.0 - 1e-8) * C_) a2_new = C_;
    if (std::abs(a2_new - a2) < 1e-12 * (a2_new + a2 + 1e-12)) return false;

    const double a1_new = a1 + y1 * y2 * (a2 - a2_new);
    const double d1 = y1 * (a1_new - a1);
    const double d2 = y2 * (a2_new - a2);

    const double b1 = b_ - E1 - d1 * Q_(i1, i1) - d2 * Q_(i1, i2);
    const double b2 = b_ - E2 - d1 * Q_(i1, i2) - d2 * Q_(i2, i2);
    double b_new;
    if (a1_new > 0.0 && a1_new < C_) {
      b_new = b1;
    } else if (a2_new > 0.0 && a2_new < C_) {
      b_new = b2;
    } else {
      b_new = 0.5 * (b1 + b2);
    }
    const double db = b_new - b_;

    alpha_[i1] = a1_new;
    alpha_[i2] = a2_new;
    b_ = b_new;
    for (int j = 0; j < n_; ++j) {
      errors_[j] += d1 * Q_(i1, j) + d2 * Q_(i2, j) + db;
    }
    return true;
  }

  Eigen::MatrixXd Q_;
  Eigen::VectorXd y_;
  Eigen::VectorXd alpha_;
  Eigen::VectorXd errors_;
  int n_;
  double C_;
  double b_ = 0.0;
  double tol_;
  int max_passes_;
};

double scale_gamma(const Eigen::MatrixXd& X) {
  const double var = (X.array() - X.mean()).square().mean();
  const double denom = static_cast<double>(X.cols()) * var;
  return denom > 1e-12 ? 1.0 / denom : 1.0 / static_cast<double>(X.cols());
}

}  // namespace

std::vector<Side> kmeans2_1d(const Eigen::VectorXd& values) {
  const int n = static_cast<int>(values.size());
  if (n < 2) throw PartitionError("kmeans2_1d: need at least 2 values");
  double lo = values.minCoeff();
  double hi = values.maxCoeff();
  if (lo == hi) {
    throw DegenerateClusterError("kmeans2_1d: all values identical");
  }

  std::vector<Side> labels(static_cast<std::size_t>(n), Side::kHigh);
  for (int pass = 0; pass < 100; ++pass) {
    bool changed = false;
    double low_sum = 0.0, high_sum = 0.0;
    int low_n = 0, high_n = 0;
    for (int i = 0; i < n; ++i) {
      // Equidistant points join the low cluster.
      const Side side = std::abs(values[i] - lo) <= std::abs(values[i] - hi)
                            ? Side::kLow
                            : Side::kHigh;
      if (labels[static_cast<std::size_t>(i)] != side) {
        labels[static_cast<std::size_t>(i)] = side;
        changed = true;
      }
      if (side == Side::kLow) {
        low_sum += values[i];
        ++low_n;
      } else {
        high_sum += values[i];
        ++high_n;
      }
    }
    if (!changed) break;
    // Centers seeded at min/max keep both clusters non-empty.
    lo = low_sum / low_n;
    hi = high_sum / high_n;
  }
  return labels;
}

SplitModel fit_split_model(const Eigen::MatrixXd& X,
                           const std::vector<Side>& labels,
                           const SplitParams& params) {
  const int n = static_cast<int>(X.rows());
  if (n < 2 || labels.size() != static_cast<std::size_t>(n)) {
    throw PartitionError("fit_split_model: need n >= 2 matching labels");
  }
  const auto low_count = std::count(labels.begin(), labels.end(), Side::kLow);
  if (low_count == 0 || low_count == n) {
    throw PartitionError("fit_split_model: both classes must be present");
  }

  // Canonical row order makes the trained model independent of how the
  // caller happened to order the points.
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    for (Eigen::Index c = 0; c < X.cols(); ++c) {
      if (X(a, c) != X(b, c)) return X(a, c) < X(b, c);
    }
    return labels[static_cast<std::size_t>(a)] < labels[static_cast<std::size_t>(b)];
  });
  Eigen::MatrixXd Xc(n, X.cols());
  std::vector<Side> lc(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    Xc.row(i) = X.row(order[static_cast<std::size_t>(i)]);
    lc[static_cast<std::size_t>(i)] = labels[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])];
  }

  SplitModel model;
  model.kind = params.kind;

  if (params.kind == SplitKind::kKnn) {
    int k = std::min(params.knn_k, n);
    if (k % 2 == 0) k = std::max(1, k - 1);
    model.k = k;
    model.train_X = Xc;
    model.train_labels = lc;
  } else {
    if (params.C <= 0.0) throw PartitionError("fit_split_model: C must be > 0");
    model.kernel = params.kernel;
    model.C = params.C;
    model.degree = params.poly_degree;
    model.coef0 = params.poly_coef0;
    model.gamma = params.kernel_gamma > 0.0 ? params.kernel_gamma : scale_gamma(Xc);

    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
      y[i] = lc[static_cast<std::size_t>(i)] == Side::kLow ? 1.0 : -1.0;
    }
    SmoSolver solver(Xc, y, model, params.smo_tol, params.smo_max_passes);
    solver.solve();

    const Eigen::VectorXd& alpha = solver.alpha();
    std::vector<int> sv;
    for (int i = 0; i < n; ++i) {
      if (alpha[i] > 0.0) sv.push_back(i);
    }
    model.support_X.resize(static_cast<Eigen::Index>(sv.size()), X.cols());
    model.dual_coef.resize(static_cast<Eigen::Index>(sv.size()));
    for (std::size_t s = 0; s < sv.size(); ++s) {
      model.support_X.row(static_cast<Eigen::Index>(s)) = Xc.row(sv[s]);
      model.dual_coef[static_cast<Eigen::Index>(s)] = alpha[sv[s]] * y[sv[s]];
    }
    model.bias = solver.bias();
  }

  int correct = 0;
  for (int i = 0; i < n; ++i) {
    if (model.predict(X.row(i)) == labels[static_cast<std::size_t>(i)]) {
      ++correct;
    }
  }
  model.training_accuracy = static_cast<double>(correct) / n;
  return model;
}

double SplitModel::decision_value(const Eigen::VectorXd& u) const {
  if (kind == SplitKind::kSvm) {
    if (u.size() != support_X.cols()) {
      throw PartitionError("predict: dimension mismatch");
    }
    double value = bias;
    for (Eigen::Index s = 0; s < support_X.rows(); ++s) {
      value += dual_coef[s] * kernel_eval(*this, support_X.row(s), u);
    }
    return value;
  }

  if (u.size() != train_X.cols()) {
    throw PartitionError("predict: dimension mismatch");
  }
  const int n = static_cast<int>(train_X.rows());
  std::vector<std::pair<double, int>> dist(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    dist[static_cast<std::size_t>(i)] = {(train_X.row(i).transpose() - u).squaredNorm(), i};
  }
  const auto kth = dist.begin() + k;
  std::nth_element(dist.begin(), kth - 1, dist.end());  // ties: lower index
  std::sort(dist.begin(), kth);
  int votes = 0;
  for (int i = 0; i < k; ++i) {
    votes += train_labels[static_cast<std::size_t>(dist[static_cast<std::size_t>(i)].second)] == Side::kLow ? 1 : -1;
  }
  return static_cast<double>(votes) / k;
}

Side SplitModel::predict(const Eigen::VectorXd& u) const {
  return decision_value(u) >= 0.0 ? Side::kLow : Side::kHigh;
}

Side predict_side(const SplitModel& model, const Eigen::VectorXd& u) {
  return model.predict(u);
}

PartitionPath build_partition(const Eigen::MatrixXd& X,
                              const Eigen::VectorXd& y,
                              const PartitionConfig& config) {
  const int n = static_cast<int>(X.rows());
  if (y.size() != n) throw PartitionError("build_partition: X/y size mismatch");

  PartitionPath path;
  std::vector<int> survivors(static_cast<std::size_t>(n));
  std::iota(survivors.begin(), survivors.end(), 0);

  while (path.depth() < config.max_depth) {
    if (static_cast<int>(survivors.size()) < std::max(config.min_leaf, 2)) break;

    Eigen::VectorXd ys(static_cast<Eigen::Index>(survivors.size()));
    Eigen::MatrixXd Xs(static_cast<Eigen::Index>(survivors.size()), X.cols());
    for (std::size_t i = 0; i < survivors.size(); ++i) {
      ys[static_cast<Eigen::Index>(i)] = y[survivors[i]];
      Xs.row(static_cast<Eigen::Index>(i)) = X.row(survivors[i]);
    }
    if (ys.minCoeff() == ys.maxCoeff()) break;  // degenerate clusters

    const std::vector<Side> labels = kmeans2_1d(ys);
    const SplitModel model = fit_split_model(Xs, labels, config.split);

    std::vector<int> low;
    for (const int idx : survivors) {
      if (model.predict(X.row(idx)) == Side::kLow) low.push_back(idx);
    }
    if (low.empty() || low.size() == survivors.size()) break;  // single class
    if (static_cast<int>(low.size()) < config.min_leaf) break;

    path.splits.push_back(model);
    survivors = std::move(low);
  }

  path.leaf_points = std::move(survivors);
  return path;
}

bool in_region(const PartitionPath& path, const Eigen::VectorXd& u) {
  for (const SplitModel& split : path.splits) {
    if (split.predict(u) != Side::kLow) return false;
  }
  return true;
}

double region_margin(const PartitionPath& path, const Eigen::VectorXd& u) {
  double margin = std::numeric_limits<double>::infinity();
  for (const SplitModel& split : path.splits) {
    margin = std::min(margin, split.decision_value(u));
  }
  return margin;
}

}  // namespace spbopt
