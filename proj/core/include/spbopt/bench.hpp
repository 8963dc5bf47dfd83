#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "spbopt/objectives.hpp"
#include "spbopt/optimizer.hpp"
#include "spbopt/space.hpp"

namespace spbopt {

class BenchError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Normalized score 100 * (f_max - f_a) / (f_max - f_min). No clipping:
// values outside [0, 100] are possible when the bounds are exceeded.
double score(double f_a, double f_min, double f_max);

// One experiment: the ordered evaluation trace, the per-iteration
// incumbent curve and the normalized score.
struct RunRecord {
  std::string objective;
  std::string method;
  std::uint64_t seed = 0;
  std::vector<std::pair<Assignment, double>> trace;
  std::vector<double> incumbents;
  double score = 0.0;
};

// A batch optimizer under test: suggest() proposes B points, observe()
// returns their objective values. Calls alternate strictly.
class Method {
 public:
  virtual ~Method() = default;
  virtual std::vector<Assignment> suggest() = 0;
  virtual void observe(const std::vector<Assignment>& points,
                       const std::vector<double>& values) = 0;
};

using MethodFactory =
    std::function<std::unique_ptr<Method>(const SpaceDefinition&, std::uint64_t seed)>;

// Factory by name: "random", "turbo_lite" or a spbopt preset. K and B are
// baked into the produced optimizers.
MethodFactory make_method(const std::string& name, int K, int B);

// Factory around an explicit config (seed is overridden per run).
MethodFactory make_spbopt_method(SpboptConfig config);

// Drives the suggest/observe loop for exactly K iterations of B points.
// Protocol violations (wrong batch size, out-of-bounds points) raise
// BenchError. Fully deterministic given the seed.
RunRecord run_experiment(const Objective& objective, const MethodFactory& factory,
                         int K, int B, std::uint64_t seed);

// Runs every (objective, method, seed) triple, optionally on several
// threads; the result order is deterministic regardless of scheduling.
std::vector<RunRecord> run_many(
    const std::vector<Objective>& objectives,
    const std::vector<std::pair<std::string, MethodFactory>>& methods, int K,
    int B, int n_seeds, std::uint64_t seed0, int threads = 1);

// One-sided ("greater": positive differences dominate) and two-sided
// Wilcoxon signed-rank p-values. Zero differences are dropped; an all-zero
// vector gives p = 1. Exact enumeration up to 25 nonzero pairs, normal
// approximation with tie correction above.
struct WilcoxonResult {
  double statistic = 0.0;  // W+ over the nonzero differences
  int n_nonzero = 0;
  double p_greater = 1.0;
  double p_two_sided = 1.0;
};
WilcoxonResult wilcoxon_signed_rank(const std::vector<double>& diffs);

// Aggregated scores: per-method mean and sample (n-1) standard deviation,
// per-(method, objective) score lists, and pairwise one-sided Wilcoxon
// p-values on scores paired by (objective, seed). Comparing methods with
// mismatched (objective, seed) coverage is an error.
struct ScoreReport {
  struct Stats {
    double mean = 0.0;
    double stddev = 0.0;
    int count = 0;
  };
  std::map<std::string, Stats> method_stats;
  // method -> objective -> scores ordered by seed
  std::map<std::string, std::map<std::string, std::vector<double>>> scores;
  // p_greater[a][b]: one-sided p-value that method a scores above method b
  std::map<std::string, std::map<std::string, double>> p_greater;
};
ScoreReport aggregate(const std::vector<RunRecord>& records);

// Stable serialization (fixed key order, shortest round-trip numbers).
std::string run_record_to_json(const RunRecord& record);
RunRecord run_record_from_json(const std::string& text);

// CSV summary with header method,objective,seed,score, rows sorted by
// (method, objective, seed). Byte-stable under fixed inputs.
std::string summary_csv(std::vector<RunRecord> records);

// Human-readable score table with Wilcoxon pairs.
std::string format_report(const ScoreReport& report);

}  // namespace spbopt
