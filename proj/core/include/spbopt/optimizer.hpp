#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <deque>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "spbopt/gp.hpp"
#include "spbopt/partition.hpp"
#include "spbopt/rng.hpp"
#include "spbopt/sampling.hpp"
#include "spbopt/space.hpp"
#include "spbopt/trust_region.hpp"

namespace spbopt {

class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class SamplerKind { kLhs, kLhsRatio, kSobol, kHalton };

// min_leaf at or above this disables partitioning (the path stays empty and
// the trust region sees the whole space).
inline constexpr int kPartitionDisabled = 1 << 30;

struct SpboptConfig {
  SamplerKind sampler = SamplerKind::kLhsRatio;
  int n_init = 24;
  SplitParams split;
  double decay = 1.0;
  int n_rebuild = 4;
  int n_reset = 8;
  int max_depth = 5;
  int min_leaf = 8;
  int K = 16;
  int B = 8;
  std::uint64_t seed = 0;
  int lhs_restarts = 100;
  GpConfig gp;
  TrustRegionConfig tr;
};

// Named preset: spbopt1..spbopt5 (the shipped candidate configurations)
// or turbo_lite (spbopt2 with partitioning disabled). Throws ConfigError
// for unknown names.
SpboptConfig preset_config(const std::string& name);

// Parses {"sampler": "...", "n_init": ..., "split_kind": "svm|knn",
// "split_kernel": "linear|poly|rbf", "split_C": ..., "decay": ...,
// "n_rebuild": ..., "n_reset": ..., "max_depth": ..., "min_leaf": ...,
// "seed": ...}. Missing keys keep the spbopt2 preset values.
SpboptConfig config_from_json_text(const std::string& text);

enum class Phase { kInitializing, kOptimizing };

// Per-iteration instrumentation, appended by observe().
struct IterationRecord {
  int t = 0;
  Phase phase = Phase::kInitializing;
  bool rebuilt = false;
  bool reset = false;
  bool tr_updated = false;
  bool streak_event = false;   // trust region doubled or halved
  bool tr_reinit = false;      // collapse forced a fresh trust region
  double length_before = 0.0;  // trust-region base length around the update
  double length_mid = 0.0;
  double length_after = 0.0;
  double batch_min = 0.0;
  double best_y = 0.0;  // global incumbent after this iteration
};

// Batch suggest/observe optimizer: space-filling initialization, learned
// space partition rebuilt every n_rebuild iterations, trust-region local
// search inside the selected region, and a full reset on stagnation every
// n_reset iterations. One instance per logical owner; calls alternate
// strictly between suggest and observe.
class SpboptOptimizer {
 public:
  SpboptOptimizer(SpaceDefinition space, SpboptConfig config);

  // Next batch of config.B original-space points.
  std::vector<Assignment> suggest();

  // Records objective values for the pending batch and runs the
  // end-of-iteration pipeline (rebuild/refit, trust-region update, reset
  // check). Non-finite values are replaced by the worst value seen so far
  // (or 1e10 when none).
  void observe(const std::vector<Assignment>& points,
               const std::vector<double>& values);

  // Stagnation check; fires only when t is a multiple of n_reset and the
  // incumbent did not improve over the window. Called by observe.
  bool maybe_reset();

  const SpaceDefinition& space() const { return space_; }
  const SpboptConfig& config() const { return config_; }
  int iteration() const { return t_; }
  Phase phase() const { return phase_; }
  bool has_pending() const { return !pending_x_.empty(); }
  const std::vector<Observation>& dataset() const { return dataset_; }
  double best_y() const { return best_y_ever_; }
  const std::optional<Assignment>& best_x() const { return best_x_ever_; }
  const std::vector<IterationRecord>& iteration_log() const { return log_; }
  const std::optional<PartitionPath>& partition() const { return partition_; }
  const std::optional<TrustRegion>& trust_region() const { return trust_; }
  const std::optional<GpModel>& gp() const { return gp_; }

 private:
  Eigen::MatrixXd generate_design(int n);
  void queue_initial_design(int n);
  void rebuild(IterationRecord& rec);
  void refit_gp();
  std::vector<int> region_indices() const;
  Eigen::VectorXd region_incumbent(const std::vector<int>& indices) const;
  void dedup_batch(Eigen::MatrixXd& batch_u, std::vector<Assignment>& batch_x,
                   bool optimizing);

  SpaceDefinition space_;
  SpboptConfig config_;
  int dim_ = 0;

  Rng rng_design_;
  Rng rng_propose_;
  Rng rng_gp_;
  int seq_used_ = 0;  // consumed prefix of the deterministic sequences
  int reset_count_ = 0;

  Phase phase_ = Phase::kInitializing;
  int t_ = 0;
  int t_init_ = 0;  // iteration at which the current initialization finished

  std::deque<Eigen::VectorXd> init_queue_;
  std::vector<Eigen::VectorXd> pending_u_;
  std::vector<Assignment> pending_x_;

  std::vector<Observation> dataset_;  // cleared on reset
  std::optional<PartitionPath> partition_;
  std::optional<TrustRegion> trust_;
  std::optional<GpModel> gp_;
  std::optional<GpParams> last_gp_params_;

  double best_y_ever_ = std::numeric_limits<double>::infinity();
  std::optional<Assignment> best_x_ever_;
  double worst_y_ever_ = -std::numeric_limits<double>::infinity();
  std::vector<double> best_history_;  // [t] = incumbent after iteration t

  std::vector<IterationRecord> log_;
};

}  // namespace spbopt
