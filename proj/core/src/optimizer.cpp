#include "spbopt/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <nlohmann/json.hpp>

namespace spbopt {
namespace {

constexpr double kImputedWorst = 1e10;

SpboptConfig spbopt2_base() {
  SpboptConfig cfg;
  cfg.sampler = SamplerKind::kLhsRatio;
  cfg.n_init = 24;
  cfg.split.kind = SplitKind::kSvm;
  cfg.split.kernel = SvmKernel::kPoly;
  cfg.split.C = 745.322745;
  cfg.decay = 0.499;
  return cfg;
}

}  // namespace

SpboptConfig preset_config(const std::string& name) {
  if (name == "spbopt1") {
    SpboptConfig cfg = spbopt2_base();
    cfg.n_init = 8;
    cfg.split.kernel = SvmKernel::kRbf;
    cfg.split.C = 0.002762;
    cfg.decay = 0.700;
    return cfg;
  }
  if (name == "spbopt2") return spbopt2_base();
  if (name == "spbopt3") {
    SpboptConfig cfg = spbopt2_base();
    cfg.split.kernel = SvmKernel::kRbf;
    cfg.split.C = 145.415497;
    cfg.decay = 0.416;
    return cfg;
  }
  if (name == "spbopt4") {
    SpboptConfig cfg = spbopt2_base();
    cfg.split.kernel = SvmKernel::kRbf;
    cfg.split.C = 165.066908;
    cfg.decay = 0.549;
    return cfg;
  }
  if (name == "spbopt5") {
    SpboptConfig cfg = spbopt2_base();
    cfg.split.kernel = SvmKernel::kRbf;
    cfg.split.C = 76.7041709;
    cfg.decay = 0.677;
    return cfg;
  }
  if (name == "turbo_lite") {
    SpboptConfig cfg = spbopt2_base();
    cfg.min_leaf = kPartitionDisabled;
    return cfg;
  }
  throw ConfigError("unknown preset '" + name + "'");
}

SpboptConfig config_from_json_text(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");

  SpboptConfig cfg = spbopt2_base();
  for (const auto& [key, value] : doc.items()) {
    if (key == "sampler") {
      const std::string s = value.get<std::string>();
      if (s == "lhs") cfg.sampler = SamplerKind::kLhs;
      else if (s == "lhs_ratio") cfg.sampler = SamplerKind::kLhsRatio;
      else if (s == "sobol") cfg.sampler = SamplerKind::kSobol;
      else if (s == "halton") cfg.sampler = SamplerKind::kHalton;
      else throw ConfigError("unknown sampler '" + s + "'");
    } else if (key == "n_init") {
      cfg.n_init = value.get<int>();
    } else if (key == "split_kind") {
      const std::string s = value.get<std::string>();
      if (s == "svm") cfg.split.kind = SplitKind::kSvm;
      else if (s == "knn") cfg.split.kind = SplitKind::kKnn;
      else throw ConfigError("unknown split_kind '" + s + "'");
    } else if (key == "split_kernel") {
      const std::string s = value.get<std::string>();
      if (s == "linear") cfg.split.kernel = SvmKernel::kLinear;
      else if (s == "poly") cfg.split.kernel = SvmKernel::kPoly;
      else if (s == "rbf") cfg.split.kernel = SvmKernel::kRbf;
      else throw ConfigError("unknown split_kernel '" + s + "'");
    } else if (key == "split_C") {
      cfg.split.C = value.get<double>();
    } else if (key == "decay") {
      cfg.decay = value.get<double>();
    } else if (key == "n_rebuild") {
      cfg.n_rebuild = value.get<int>();
    } else if (key == "n_reset") {
      cfg.n_reset = value.get<int>();
    } else if (key == "max_depth") {
      cfg.max_depth = value.get<int>();
    } else if (key == "min_leaf") {
      cfg.min_leaf = value.get<int>();
    } else if (key == "seed") {
      cfg.seed = value.get<std::uint64_t>();
    } else {
      throw ConfigError("unknown config key '" + key + "'");
    }
  }
  return cfg;
}

SpboptOptimizer::SpboptOptimizer(SpaceDefinition space, SpboptConfig config)
    : space_(std::move(space)),
      config_(std::move(config)),
      rng_design_(config_.seed, 1),
      rng_propose_(config_.seed, 2),
      rng_gp_(config_.seed, 3) {
  dim_ = space_.encoded_dim();
  if (config_.B < 1 || config_.K < 1) {
    throw ConfigError("K and B must be >= 1");
  }
  if (config_.n_init < 2 || config_.n_init > config_.K * config_.B) {
    throw ConfigError("n_init must be in [2, K*B]");
  }
  if (!(config_.decay > 0.0 && config_.decay <= 1.0)) {
    throw ConfigError("decay must be in (0, 1]");
  }
  if (config_.n_rebuild < 1 || config_.n_reset < 1) {
    throw ConfigError("n_rebuild and n_reset must be >= 1");
  }
  if (config_.max_depth < 0 || config_.min_leaf < 2) {
    throw ConfigError("max_depth must be >= 0 and min_leaf >= 2");
  }
  if (config_.split.C <= 0.0) throw ConfigError("split_C must be > 0");

  best_history_.push_back(std::numeric_limits<double>::infinity());
  queue_initial_design(config_.n_init);
}

Eigen::MatrixXd SpboptOptimizer::generate_design(int n) {
  switch (config_.sampler) {
    case SamplerKind::kLhs:
      return latin_hypercube(n, dim_, rng_design_).points;
    case SamplerKind::kLhsRatio:
      if (n < 2) return latin_hypercube(n, dim_, rng_design_).points;
      return lhs_ratio(n, dim_, rng_design_, config_.lhs_restarts).points;
    case SamplerKind::kSobol:
    case SamplerKind::kHalton: {
      const Sequence kind = config_.sampler == SamplerKind::kSobol
                                ? Sequence::kSobol
                                : Sequence::kHalton;
      const DesignMatrix all = low_discrepancy(kind, seq_used_ + n, dim_);
      seq_used_ += n;
      return all.points.bottomRows(n);
    }
  }
  throw ConfigError("unknown sampler");
}

void SpboptOptimizer::queue_initial_design(int n) {
  const Eigen::MatrixXd design = generate_design(n);
  for (int i = 0; i < n; ++i) {
    init_queue_.push_back(design.row(i).transpose());
  }
}

std::vector<int> SpboptOptimizer::region_indices() const {
  std::vector<int> indices;
  for (int i = 0; i < static_cast<int>(dataset_.size()); ++i) {
    if (!partition_ ||
        in_region(*partition_, dataset_[static_cast<std::size_t>(i)].u)) {
      indices.push_back(i);
    }
  }
  return indices;
}

Eigen::VectorXd SpboptOptimizer::region_incumbent(
    const std::vector<int>& indices) const {
  int best = indices.front();
  for (const int i : indices) {
    if (dataset_[static_cast<std::size_t>(i)].y <
        dataset_[static_cast<std::size_t>(best)].y) {
      best = i;
    }
  }
  return dataset_[static_cast<std::size_t>(best)].u;
}

void SpboptOptimizer::rebuild(IterationRecord& rec) {
  rec.rebuilt = true;

  PartitionConfig pcfg;
  pcfg.max_depth = config_.max_depth;
  pcfg.min_leaf = config_.min_leaf;
  pcfg.split = config_.split;

  const int n = static_cast<int>(dataset_.size());
  Eigen::MatrixXd X(n, dim_);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    X.row(i) = dataset_[static_cast<std::size_t>(i)].u.transpose();
    y[i] = dataset_[static_cast<std::size_t>(i)].y;
  }
  partition_ = build_partition(X, y, pcfg);

  refit_gp();
  trust_ = init_trust_region(dim_, region_incumbent(region_indices()),
                             config_.tr);
}

// TODO: reuse the previous Cholesky factor when only appending in-region
// points between rebuilds; every iteration currently refits from scratch.
void SpboptOptimizer::refit_gp() {
  std::vector<int> indices = region_indices();
  if (indices.size() < 2) {
    indices.resize(dataset_.size());
    for (std::size_t i = 0; i < dataset_.size(); ++i) {
      indices[i] = static_cast<int>(i);
    }
  }
  const int n = static_cast<int>(indices.size());
  Eigen::MatrixXd X(n, dim_);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    X.row(i) = dataset_[static_cast<std::size_t>(indices[static_cast<std::size_t>(i)])].u.transpose();
    y[i] = dataset_[static_cast<std::size_t>(indices[static_cast<std::size_t>(i)])].y;
  }
  GpConfig gp_cfg = config_.gp;
  gp_cfg.warm_start = last_gp_params_;
  gp_ = fit_gp(X, y, gp_cfg, rng_gp_);
  last_gp_params_ = gp_->params();
}

void SpboptOptimizer::dedup_batch(Eigen::MatrixXd& batch_u,
                                  std::vector<Assignment>& batch_x,
                                  bool optimizing) {
  const int B = static_cast<int>(batch_x.size());
  for (int i = 1; i < B; ++i) {
    for (int attempt = 0; attempt < 16; ++attempt) {
      bool duplicate = false;
      for (int j = 0; j < i; ++j) {
        if (batch_x[static_cast<std::size_t>(i)] == batch_x[static_cast<std::size_t>(j)]) {
          duplicate = true;
          break;
        }
      }
      if (!duplicate) break;
      Eigen::VectorXd u(dim_);
      if (optimizing && trust_) {
        const Eigen::VectorXd lo =
            (trust_->center - 0.5 * trust_->lengths).cwiseMax(0.0);
        const Eigen::VectorXd hi =
            (trust_->center + 0.5 * trust_->lengths).cwiseMin(1.0);
        for (int j = 0; j < dim_; ++j) {
          u[j] = rng_propose_.uniform(lo[j], hi[j]);
        }
      } else {
        for (int j = 0; j < dim_; ++j) u[j] = rng_design_.uniform();
      }
      batch_u.row(i) = u.transpose();
      batch_x[static_cast<std::size_t>(i)] = space_.unwarp(u);
    }
  }
}

std::vector<Assignment> SpboptOptimizer::suggest() {
  if (!pending_x_.empty()) {
    throw ProtocolError("suggest called with an unobserved batch pending");
  }
  const int B = config_.B;
  Eigen::MatrixXd batch_u(B, dim_);

  if (phase_ == Phase::kInitializing) {
    int taken = 0;
    while (taken < B && !init_queue_.empty()) {
      batch_u.row(taken) = init_queue_.front().transpose();
      init_queue_.pop_front();
      ++taken;
    }
    if (taken < B) {
      // Design exhausted mid-batch: top up with extra sampler points.
      const int pad = B - taken;
      Eigen::MatrixXd extra;
      if (config_.sampler == SamplerKind::kSobol ||
          config_.sampler == SamplerKind::kHalton) {
        extra = generate_design(pad);
      } else {
        extra = latin_hypercube(pad, dim_, rng_design_).points;
      }
      batch_u.bottomRows(pad) = extra;
    }
  } else {
    const PartitionPath& path = *partition_;
    RegionMargin margin = [&path](const Eigen::VectorXd& u) {
      return region_margin(path, u);
    };
    batch_u = propose_batch(*trust_, *gp_, margin, B, rng_propose_, config_.tr);
  }

  std::vector<Assignment> batch_x;
  batch_x.reserve(static_cast<std::size_t>(B));
  for (int i = 0; i < B; ++i) {
    batch_x.push_back(space_.unwarp(batch_u.row(i).transpose()));
  }
  dedup_batch(batch_u, batch_x, phase_ == Phase::kOptimizing);

  pending_u_.clear();
  for (int i = 0; i < B; ++i) {
    pending_u_.push_back(batch_u.row(i).transpose());
  }
  pending_x_ = batch_x;
  return pending_x_;
}

void SpboptOptimizer::observe(const std::vector<Assignment>& points,
                              const std::vector<double>& values) {
  if (pending_x_.empty()) {
    throw ProtocolError("observe called with no pending batch");
  }
  if (points.size() != pending_x_.size() || values.size() != points.size()) {
    throw ProtocolError("observe: batch size mismatch");
  }
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (points[i] != pending_x_[i]) {
      throw ProtocolError("observe: points do not match the pending batch");
    }
  }

  const double prev_best_epoch = [&] {
    double best = std::numeric_limits<double>::infinity();
    for (const Observation& obs : dataset_) best = std::min(best, obs.y);
    return best;
  }();

  double batch_min = std::numeric_limits<double>::infinity();
  Eigen::VectorXd batch_best_u;
  for (std::size_t i = 0; i < values.size(); ++i) {
    double y = values[i];
    if (!std::isfinite(y)) {
      y = worst_y_ever_ > -std::numeric_limits<double>::infinity()
              ? worst_y_ever_
              : kImputedWorst;
    }
    dataset_.push_back({pending_u_[i], pending_x_[i], y});
    worst_y_ever_ = std::max(worst_y_ever_, y);
    if (y < best_y_ever_) {
      best_y_ever_ = y;
      best_x_ever_ = pending_x_[i];
    }
    if (y < batch_min) {
      batch_min = y;
      batch_best_u = pending_u_[i];
    }
  }
  pending_u_.clear();
  pending_x_.clear();

  t_ += 1;
  IterationRecord rec;
  rec.t = t_;
  rec.phase = phase_;
  rec.batch_min = batch_min;

  if (phase_ == Phase::kInitializing) {
    if (init_queue_.empty()) {
      phase_ = Phase::kOptimizing;
      t_init_ = t_;
      rebuild(rec);
    }
  } else {
    if ((t_ - t_init_) % config_.n_rebuild == 0) {
      rebuild(rec);
    } else {
      refit_gp();
    }
  }

  if (trust_) {
    const TrustRegionUpdate update =
        update_trust_region(*trust_, batch_min, prev_best_epoch, batch_best_u,
                            t_, config_.K, config_.decay, config_.tr);
    rec.tr_updated = true;
    rec.streak_event = update.expanded || update.halved;
    rec.length_before = update.length_before;
    rec.length_mid = update.length_mid;
    rec.length_after = update.length_after;
    if (update.collapsed) {
      trust_ = init_trust_region(dim_, region_incumbent(region_indices()),
                                 config_.tr);
      rec.tr_reinit = true;
    }
  }

  best_history_.push_back(best_y_ever_);
  rec.best_y = best_y_ever_;
  rec.reset = maybe_reset();
  log_.push_back(rec);
}

bool SpboptOptimizer::maybe_reset() {
  if (t_ == 0 || t_ % config_.n_reset != 0) return false;
  const int baseline_t = std::max(t_ - config_.n_reset, 1);
  const double baseline = best_history_[static_cast<std::size_t>(baseline_t)];
  const double current = best_history_[static_cast<std::size_t>(t_)];
  if (current != baseline) return false;

  reset_count_ += 1;
  dataset_.clear();
  partition_.reset();
  trust_.reset();
  gp_.reset();
  init_queue_.clear();
  phase_ = Phase::kInitializing;

  rng_design_ = Rng(config_.seed, 1000 + static_cast<std::uint64_t>(reset_count_));
  const int remaining_budget = (config_.K - t_) * config_.B - config_.B;
  const int n_init = std::max(config_.B, std::min(config_.n_init, remaining_budget));
  queue_initial_design(std::max(n_init, 2));
  return true;
}

}  // namespace spbopt
