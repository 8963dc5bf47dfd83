#include "spbopt/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iomanip>
#include <limits>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

namespace spbopt {
namespace {

class RandomSearch final : public Method {
 public:
  RandomSearch(const SpaceDefinition& space, int batch, std::uint64_t seed)
      : space_(space), batch_(batch), rng_(seed, 5) {}

  std::vector<Assignment> suggest() override {
    if (pending_) throw ProtocolError("suggest called twice without observe");
    pending_ = true;
    std::vector<Assignment> out;
    out.reserve(static_cast<std::size_t>(batch_));
    Eigen::VectorXd u(space_.encoded_dim());
    for (int i = 0; i < batch_; ++i) {
      for (int j = 0; j < u.size(); ++j) u[j] = rng_.uniform();
      out.push_back(space_.unwarp(u));
    }
    return out;
  }

  void observe(const std::vector<Assignment>&,
               const std::vector<double>&) override {
    if (!pending_) throw ProtocolError("observe called with no pending batch");
    pending_ = false;
  }

 private:
  const SpaceDefinition& space_;
  int batch_;
  Rng rng_;
  bool pending_ = false;
};

class SpboptMethod final : public Method {
 public:
  SpboptMethod(const SpaceDefinition& space, SpboptConfig config)
      : optimizer_(space, std::move(config)) {}

  std::vector<Assignment> suggest() override { return optimizer_.suggest(); }
  void observe(const std::vector<Assignment>& points,
               const std::vector<double>& values) override {
    optimizer_.observe(points, values);
  }

 private:
  SpboptOptimizer optimizer_;
};

nlohmann::ordered_json value_to_json(const ParamValue& value) {
  if (std::holds_alternative<double>(value)) return std::get<double>(value);
  if (std::holds_alternative<std::int64_t>(value)) {
    return std::get<std::int64_t>(value);
  }
  if (std::holds_alternative<std::string>(value)) {
    return std::get<std::string>(value);
  }
  return std::get<bool>(value);
}

ParamValue value_from_json(const nlohmann::ordered_json& j) {
  if (j.is_boolean()) return j.get<bool>();
  if (j.is_string()) return j.get<std::string>();
  if (j.is_number_integer()) return j.get<std::int64_t>();
  return j.get<double>();
}

std::string format_number(double v) { return nlohmann::json(v).dump(); }

}  // namespace

double score(double f_a, double f_min, double f_max) {
  if (!(f_min < f_max)) throw BenchError("score: need f_min < f_max");
  if (!std::isfinite(f_a)) throw BenchError("score: f_a must be finite");
  return 100.0 * (f_max - f_a) / (f_max - f_min);
}

MethodFactory make_method(const std::string& name, int K, int B) {
  if (name == "random") {
    return [B](const SpaceDefinition& space, std::uint64_t seed) {
      return std::make_unique<RandomSearch>(space, B, seed);
    };
  }
  SpboptConfig cfg = preset_config(name);
  cfg.K = K;
  cfg.B = B;
  return make_spbopt_method(std::move(cfg));
}

MethodFactory make_spbopt_method(SpboptConfig config) {
  return [config](const SpaceDefinition& space, std::uint64_t seed) {
    SpboptConfig cfg = config;
    cfg.seed = seed;
    return std::make_unique<SpboptMethod>(space, std::move(cfg));
  };
}

RunRecord run_experiment(const Objective& objective, const MethodFactory& factory,
                         int K, int B, std::uint64_t seed) {
  RunRecord record;
  record.objective = objective.name;
  record.method = "";
  record.seed = seed;

  std::unique_ptr<Method> method = factory(objective.space, seed);
  Rng noise_rng(seed, 77);

  double incumbent = std::numeric_limits<double>::infinity();
  for (int k = 0; k < K; ++k) {
    std::vector<Assignment> points;
    try {
      points = method->suggest();
    } catch (const std::exception& e) {
      throw BenchError(std::string("suggest failed at iteration ") +
                       std::to_string(k + 1) + ": " + e.what());
    }
    if (static_cast<int>(points.size()) != B) {
      throw BenchError("protocol violation: suggest returned " +
                       std::to_string(points.size()) + " points, expected " +
                       std::to_string(B));
    }
    std::vector<double> values;
    values.reserve(points.size());
    for (const Assignment& x : points) {
      try {
        (void)objective.space.warp(x);  // bounds / type validation
      } catch (const SpaceError& e) {
        throw BenchError(std::string("protocol violation: ") + e.what());
      }
      double y = objective.eval(x);
      if (objective.noise_sigma > 0.0) {
        y += objective.noise_sigma * noise_rng.normal();
      }
      values.push_back(y);
      record.trace.emplace_back(x, y);
      incumbent = std::min(incumbent, y);
    }
    method->observe(points, values);
    record.incumbents.push_back(incumbent);
  }

  record.score = score(incumbent, objective.f_min, objective.f_max);
  return record;
}

std::vector<RunRecord> run_many(
    const std::vector<Objective>& objectives,
    const std::vector<std::pair<std::string, MethodFactory>>& methods, int K,
    int B, int n_seeds, std::uint64_t seed0, int threads) {
  struct Triple {
    int objective;
    int method;
    int seed;
  };
  std::vector<Triple> triples;
  for (int m = 0; m < static_cast<int>(methods.size()); ++m) {
    for (int o = 0; o < static_cast<int>(objectives.size()); ++o) {
      for (int s = 0; s < n_seeds; ++s) triples.push_back({o, m, s});
    }
  }

  std::vector<RunRecord> records(triples.size());
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::string error_message;
  std::mutex error_mutex;

  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= triples.size() || failed.load()) break;
      const Triple& tr = triples[i];
      try {
        RunRecord rec = run_experiment(
            objectives[static_cast<std::size_t>(tr.objective)],
            methods[static_cast<std::size_t>(tr.method)].second, K, B,
            seed0 + static_cast<std::uint64_t>(tr.seed));
        rec.method = methods[static_cast<std::size_t>(tr.method)].first;
        records[i] = std::move(rec);
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(error_mutex);
        error_message = e.what();
        failed.store(true);
      }
    }
  };

  const int n_threads = std::max(1, threads);
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (std::thread& th : pool) th.join();
  }
  if (failed.load()) throw BenchError("experiment failed: " + error_message);
  return records;
}

WilcoxonResult wilcoxon_signed_rank(const std::vector<double>& diffs) {
  WilcoxonResult result;

  std::vector<double> nonzero;
  for (const double d : diffs) {
    if (d != 0.0) nonzero.push_back(d);
  }
  const int n = static_cast<int>(nonzero.size());
  result.n_nonzero = n;
  if (n == 0) return result;  // no evidence either way

  // Midranks of |d|.
  std::vector<int> order(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return std::abs(nonzero[static_cast<std::size_t>(a)]) <
           std::abs(nonzero[static_cast<std::size_t>(b)]);
  });
  std::vector<double> ranks(static_cast<std::size_t>(n));
  std::vector<int> tie_sizes;
  for (int i = 0; i < n;) {
    int j = i;
    while (j < n && std::abs(nonzero[static_cast<std::size_t>(order[static_cast<std::size_t>(j)])]) ==
                        std::abs(nonzero[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])])) {
      ++j;
    }
    const double midrank = 0.5 * static_cast<double>(i + 1 + j);
    for (int k = i; k < j; ++k) {
      ranks[static_cast<std::size_t>(order[static_cast<std::size_t>(k)])] = midrank;
    }
    tie_sizes.push_back(j - i);
    i = j;
  }

  double w_plus = 0.0;
  for (int i = 0; i < n; ++i) {
    if (nonzero[static_cast<std::size_t>(i)] > 0.0) {
      w_plus += ranks[static_cast<std::size_t>(i)];
    }
  }
  result.statistic = w_plus;

  if (n <= 25) {
    // Exact conditional null: enumerate sign assignments with a subset-sum
    // table over doubled ranks (midranks are half-integral).
    std::vector<long long> r2(static_cast<std::size_t>(n));
    long long total = 0;
    for (int i = 0; i < n; ++i) {
      r2[static_cast<std::size_t>(i)] = std::llround(2.0 * ranks[static_cast<std::size_t>(i)]);
      total += r2[static_cast<std::size_t>(i)];
    }
    std::vector<double> counts(static_cast<std::size_t>(total + 1), 0.0);
    counts[0] = 1.0;
    for (int i = 0; i < n; ++i) {
      for (long long s = total; s >= r2[static_cast<std::size_t>(i)]; --s) {
        counts[static_cast<std::size_t>(s)] +=
            counts[static_cast<std::size_t>(s - r2[static_cast<std::size_t>(i)])];
      }
    }
    const double denom = std::pow(2.0, n);
    const long long w2 = std::llround(2.0 * w_plus);
    double ge = 0.0, le = 0.0;
    for (long long s = 0; s <= total; ++s) {
      if (s >= w2) ge += counts[static_cast<std::size_t>(s)];
      if (s <= w2) le += counts[static_cast<std::size_t>(s)];
    }
    result.p_greater = ge / denom;
    result.p_two_sided = std::min(1.0, 2.0 * std::min(ge, le) / denom);
  } else {
    const double nn = static_cast<double>(n);
    const double mu = nn * (nn + 1.0) / 4.0;
    double var = nn * (nn + 1.0) * (2.0 * nn + 1.0) / 24.0;
    for (const int t : tie_sizes) {
      const double td = static_cast<double>(t);
      var -= (td * td * td - td) / 48.0;
    }
    const double z = (w_plus - mu) / std::sqrt(var);
    result.p_greater = 0.5 * std::erfc(z / std::sqrt(2.0));
    const double za = std::abs(z);
    result.p_two_sided = std::min(1.0, std::erfc(za / std::sqrt(2.0)));
  }
  return result;
}

ScoreReport aggregate(const std::vector<RunRecord>& records) {
  if (records.empty()) throw BenchError("aggregate: no records");

  ScoreReport report;
  // method -> (objective, seed) -> score
  std::map<std::string, std::map<std::pair<std::string, std::uint64_t>, double>>
      keyed;
  for (const RunRecord& rec : records) {
    keyed[rec.method][{rec.objective, rec.seed}] = rec.score;
    report.scores[rec.method][rec.objective].push_back(rec.score);
  }
  for (auto& [method, by_objective] : report.scores) {
    (void)method;
    for (auto& [objective, scores] : by_objective) {
      (void)objective;
      std::sort(scores.begin(), scores.end());
    }
  }

  for (const auto& [method, by_key] : keyed) {
    ScoreReport::Stats stats;
    stats.count = static_cast<int>(by_key.size());
    double sum = 0.0;
    for (const auto& [key, s] : by_key) sum += s;
    stats.mean = sum / stats.count;
    if (stats.count > 1) {
      double ss = 0.0;
      for (const auto& [key, s] : by_key) {
        ss += (s - stats.mean) * (s - stats.mean);
      }
      stats.stddev = std::sqrt(ss / (stats.count - 1));  // sample convention
    }
    report.method_stats[method] = stats;
  }

  for (const auto& [a, a_scores] : keyed) {
    for (const auto& [b, b_scores] : keyed) {
      if (a == b) continue;
      if (a_scores.size() != b_scores.size()) {
        throw BenchError("aggregate: methods '" + a + "' and '" + b +
                         "' are not paired");
      }
      std::vector<double> diffs;
      diffs.reserve(a_scores.size());
      for (const auto& [key, sa] : a_scores) {
        const auto it = b_scores.find(key);
        if (it == b_scores.end()) {
          throw BenchError("aggregate: methods '" + a + "' and '" + b +
                           "' are not paired");
        }
        diffs.push_back(sa - it->second);
      }
      report.p_greater[a][b] = wilcoxon_signed_rank(diffs).p_greater;
    }
  }
  return report;
}

std::string run_record_to_json(const RunRecord& record) {
  nlohmann::ordered_json doc;
  doc["objective"] = record.objective;
  doc["method"] = record.method;
  doc["seed"] = record.seed;
  nlohmann::ordered_json trace = nlohmann::ordered_json::array();
  for (const auto& [x, y] : record.trace) {
    nlohmann::ordered_json point;
    nlohmann::ordered_json xj;
    for (const auto& [name, value] : x) xj[name] = value_to_json(value);
    point["x"] = std::move(xj);
    point["y"] = y;
    trace.push_back(std::move(point));
  }
  doc["trace"] = std::move(trace);
  doc["incumbents"] = record.incumbents;
  doc["score"] = record.score;
  return doc.dump(2) + "\n";
}

RunRecord run_record_from_json(const std::string& text) {
  nlohmann::ordered_json doc;
  try {
    doc = nlohmann::ordered_json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw BenchError(std::string("run record is not valid JSON: ") + e.what());
  }
  RunRecord record;
  record.objective = doc.at("objective").get<std::string>();
  record.method = doc.at("method").get<std::string>();
  record.seed = doc.at("seed").get<std::uint64_t>();
  for (const auto& point : doc.at("trace")) {
    Assignment x;
    for (const auto& [name, value] : point.at("x").items()) {
      x[name] = value_from_json(value);
    }
    record.trace.emplace_back(std::move(x), point.at("y").get<double>());
  }
  record.incumbents = doc.at("incumbents").get<std::vector<double>>();
  record.score = doc.at("score").get<double>();
  return record;
}

std::string summary_csv(std::vector<RunRecord> records) {
  std::sort(records.begin(), records.end(),
            [](const RunRecord& a, const RunRecord& b) {
              return std::tie(a.method, a.objective, a.seed) <
                     std::tie(b.method, b.objective, b.seed);
            });
  std::string csv = "method,objective,seed,score\n";
  for (const RunRecord& rec : records) {
    csv += rec.method + "," + rec.objective + "," + std::to_string(rec.seed) +
           "," + format_number(rec.score) + "\n";
  }
  return csv;
}

std::string format_report(const ScoreReport& report) {
  std::ostringstream out;
  out << std::left << std::setw(14) << "method" << std::right << std::setw(10)
      << "mean" << std::setw(10) << "stddev" << std::setw(8) << "runs"
      << "\n";
  for (const auto& [method, stats] : report.method_stats) {
    out << std::left << std::setw(14) << method << std::right << std::fixed
        << std::setprecision(3) << std::setw(10) << stats.mean << std::setw(10)
        << stats.stddev << std::setw(8) << stats.count << "\n";
  }

  std::set<std::string> objectives;
  for (const auto& [method, by_objective] : report.scores) {
    for (const auto& [objective, scores] : by_objective) {
      (void)scores;
      objectives.insert(objective);
    }
  }
  if (objectives.size() > 1) {
    out << "\nper-objective means:\n";
    out << std::left << std::setw(14) << "objective";
    for (const auto& [method, stats] : report.method_stats) {
      (void)stats;
      out << std::right << std::setw(12) << method;
    }
    out << "\n";
    for (const std::string& objective : objectives) {
      out << std::left << std::setw(14) << objective;
      for (const auto& [method, stats] : report.method_stats) {
        (void)stats;
        const auto& by_objective = report.scores.at(method);
        const auto it = by_objective.find(objective);
        if (it == by_objective.end() || it->second.empty()) {
          out << std::right << std::setw(12) << "-";
        } else {
          double sum = 0.0;
          for (const double s : it->second) sum += s;
          out << std::right << std::fixed << std::setprecision(3)
              << std::setw(12) << sum / it->second.size();
        }
      }
      out << "\n";
    }
  }

  if (!report.p_greater.empty()) {
    out << "\nwilcoxon signed-rank, one-sided p(row > column):\n";
    for (const auto& [a, row] : report.p_greater) {
      for (const auto& [b, p] : row) {
        out << "  " << a << " > " << b << ": p = " << std::scientific
            << std::setprecision(3) << p << "\n";
      }
    }
  }
  return out.str();
}

}  // namespace spbopt
