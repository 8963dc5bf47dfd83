#pragma once

#include <Eigen/Core>
#include <stdexcept>
#include <vector>

namespace spbopt {

enum class Side { kLow, kHigh };
enum class SplitKind { kSvm, kKnn };
enum class SvmKernel { kLinear, kPoly, kRbf };

class PartitionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// All values identical: 2-means cannot separate, the caller stops splitting.
class DegenerateClusterError : public PartitionError {
 public:
  using PartitionError::PartitionError;
};

struct SplitParams {
  SplitKind kind = SplitKind::kSvm;
  SvmKernel kernel = SvmKernel::kRbf;
  double C = 1.0;
  int poly_degree = 3;
  double poly_coef0 = 1.0;
  double kernel_gamma = 0.0;  // rbf/poly; <= 0 selects the 1/(d * Var(X)) scale heuristic
  int knn_k = 5;
  double smo_tol = 1e-3;
  int smo_max_passes = 10000;
};

// Trained binary split. SVMs keep support vectors, dual coefficients
// (alpha_i * y_i with low mapped to +1) and the bias; kNN keeps the
// training set. decision_value >= 0 predicts kLow.
struct SplitModel {
  SplitKind kind = SplitKind::kSvm;
  SvmKernel kernel = SvmKernel::kRbf;
  double C = 1.0;
  double gamma = 1.0;
  double coef0 = 1.0;
  int degree = 3;
  Eigen::MatrixXd support_X;
  Eigen::VectorXd dual_coef;
  double bias = 0.0;

  int k = 5;
  Eigen::MatrixXd train_X;
  std::vector<Side> train_labels;

  double training_accuracy = 0.0;

  // Signed low-ness score: SVM decision function, or the normalized kNN
  // vote balance (votes_low - votes_high) / k.
  double decision_value(const Eigen::VectorXd& u) const;
  Side predict(const Eigen::VectorXd& u) const;
};

// Root-to-leaf conjunction of splits; leaf_points are the dataset indices
// predicted into the final low region.
struct PartitionPath {
  std::vector<SplitModel> splits;
  std::vector<int> leaf_points;

  int depth() const { return static_cast<int>(splits.size()); }
};

struct PartitionConfig {
  int max_depth = 5;
  int min_leaf = 8;
  SplitParams split;
};

// 2-means on scalar objective values, centers seeded at min and max.
// Returns kLow for the cluster with the lower mean. Throws
// DegenerateClusterError when all values are identical.
std::vector<Side> kmeans2_1d(const Eigen::VectorXd& values);

// Trains the configured split model on unit-cube inputs with the given
// labels. Both classes must be present.
SplitModel fit_split_model(const Eigen::MatrixXd& X,
                           const std::vector<Side>& labels,
                           const SplitParams& params);

Side predict_side(const SplitModel& model, const Eigen::VectorXd& u);

// Recursively labels points by kmeans2_1d, trains a split, and descends
// into the predicted-low side. Stops at max_depth, when the low side
// would shrink below min_leaf, when the values degenerate, or when the
// split predicts a single class. Fewer than min_leaf points at the root
// give an empty path (region = whole space).
PartitionPath build_partition(const Eigen::MatrixXd& X,
                              const Eigen::VectorXd& y,
                              const PartitionConfig& config);

// True iff every split along the path predicts kLow (empty path: true).
bool in_region(const PartitionPath& path, const Eigen::VectorXd& u);

// min over splits of decision_value; >= 0 iff in_region. Empty path: +inf.
double region_margin(const PartitionPath& path, const Eigen::VectorXd& u);

}  // namespace spbopt
