#include "spbopt/bench.hpp"

#include <cmath>
#include <set>

#include "doctest.h"

using namespace spbopt;

TEST_CASE("score endpoints and midpoint are exact") {
  CHECK(score(2.0, 2.0, 10.0) == 100.0);
  CHECK(score(10.0, 2.0, 10.0) == 0.0);
  CHECK(score(6.0, 2.0, 10.0) == 50.0);
  CHECK_THROWS_AS(score(1.0, 5.0, 5.0), BenchError);
  CHECK_THROWS_AS(score(1.0, 7.0, 5.0), BenchError);
  CHECK_THROWS_AS(score(std::numeric_limits<double>::quiet_NaN(), 0.0, 1.0),
                  BenchError);
}

TEST_CASE("score is invariant under positive affine transforms") {
  Rng rng(6);
  for (int trial = 0; trial < 100; ++trial) {
    const double f_min = rng.normal() * 10.0;
    const double f_max = f_min + rng.uniform(0.1, 50.0);
    const double f_a = rng.uniform(f_min, f_max);
    const double a = rng.uniform(0.1, 10.0);
    const double b = rng.normal() * 20.0;
    const double base = score(f_a, f_min, f_max);
    const double scaled = score(a * f_a + b, a * f_min + b, a * f_max + b);
    CHECK(std::abs(base - scaled) <= 1e-12 * std::max(1.0, std::abs(base)));
  }
}

TEST_CASE("estimate_bounds recovers the branin minimum") {
  Objective branin = suite_objective("branin2");
  // dense-grid oracle: a coarse 10^6-point sweep plus one refinement pass
  // around the best coarse cell
  auto grid_search = [&branin](double x1_lo, double x1_hi, double x2_lo,
                               double x2_hi, int side) {
    double best = std::numeric_limits<double>::infinity();
    double bx1 = 0.0, bx2 = 0.0;
    for (int i = 0; i < side; ++i) {
      for (int j = 0; j < side; ++j) {
        Assignment x;
        const double x1 = x1_lo + (x1_hi - x1_lo) * i / (side - 1.0);
        const double x2 = x2_lo + (x2_hi - x2_lo) * j / (side - 1.0);
        x["x1"] = x1;
        x["x2"] = x2;
        const double y = branin.eval(x);
        if (y < best) {
          best = y;
          bx1 = x1;
          bx2 = x2;
        }
      }
    }
    return std::tuple<double, double, double>(best, bx1, bx2);
  };
  const auto [coarse, cx1, cx2] = grid_search(-5.0, 10.0, 0.0, 15.0, 1000);
  const double h1 = 15.0 / 999.0;
  const auto [grid_min, fx1, fx2] =
      grid_search(cx1 - h1, cx1 + h1, cx2 - h1, cx2 + h1, 200);
  CHECK(grid_min <= coarse);
  CHECK(std::abs(branin.f_min - 0.397887) <= 1e-5);
  CHECK(std::abs(grid_min - branin.f_min) <= 1e-5);

  Rng rng(4);
  const auto [f_min, f_max] = estimate_bounds(branin, 10000, rng);
  CHECK(f_min == branin.f_min);
  CHECK(f_max >= f_min);

  CHECK_THROWS_AS(estimate_bounds(branin, 100, rng), std::invalid_argument);

  Objective flat;
  flat.name = "flat";
  flat.space = validate_space({ParamSpec::real("x", 0.0, 1.0)});
  flat.eval = [](const Assignment&) { return 1.0; };
  CHECK_THROWS_AS(estimate_bounds(flat, 10000, rng), std::invalid_argument);
}

TEST_CASE("the synthetic suite covers six objectives with valid bounds") {
  const auto suite = synthetic_suite();
  REQUIRE(suite.size() == 6);
  std::set<std::string> names;
  for (const Objective& obj : suite) {
    names.insert(obj.name);
    CHECK(obj.f_min < obj.f_max);
    CHECK(obj.noise_sigma == 0.0);
    // the evaluator works on unwarped cube midpoints
    Eigen::VectorXd mid =
        Eigen::VectorXd::Constant(obj.space.encoded_dim(), 0.5);
    CHECK(std::isfinite(obj.eval(obj.space.unwarp(mid))));
  }
  CHECK(names == std::set<std::string>{"branin2", "rosenbrock3", "levy4",
                                       "ackley5", "hartmann6", "sphere_cat"});

  const auto noisy = synthetic_suite(true);
  for (const Objective& obj : noisy) {
    CHECK(obj.noise_sigma ==
          doctest::Approx(0.01 * (obj.f_max - obj.f_min)).epsilon(1e-12));
  }
}

TEST_CASE("hartmann6 matches its known optimum") {
  const Objective h6 = suite_objective("hartmann6");
  Assignment best;
  best["x1"] = 0.20169;
  best["x2"] = 0.150011;
  best["x3"] = 0.476874;
  best["x4"] = 0.275332;
  best["x5"] = 0.311652;
  best["x6"] = 0.6573;
  CHECK(h6.eval(best) == doctest::Approx(-3.32237).epsilon(1e-4));
}

TEST_CASE("run_experiment records a full deterministic trace") {
  const Objective branin = suite_objective("branin2");
  const MethodFactory random = make_method("random", 16, 8);
  const RunRecord rec = run_experiment(branin, random, 16, 8, 3);
  CHECK(rec.trace.size() == 128);
  CHECK(rec.incumbents.size() == 16);
  // incumbent curve is the running minimum of the trace
  double running = std::numeric_limits<double>::infinity();
  std::size_t at = 0;
  for (int k = 0; k < 16; ++k) {
    for (int i = 0; i < 8; ++i) running = std::min(running, rec.trace[at++].second);
    CHECK(rec.incumbents[static_cast<std::size_t>(k)] == running);
  }

  const RunRecord again = run_experiment(branin, random, 16, 8, 3);
  CHECK(run_record_to_json(rec) == run_record_to_json(again));
}

TEST_CASE("random search matches the order-statistics oracle") {
  // incumbent after 128 uniform draws on f(u) = u has mean 1/129
  Objective line;
  line.name = "line";
  line.space = validate_space({ParamSpec::real("u", 0.0, 1.0)});
  line.eval = [](const Assignment& x) { return std::get<double>(x.at("u")); };
  line.f_min = 0.0;
  line.f_max = 1.0;

  const MethodFactory random = make_method("random", 16, 8);
  const int n_seeds = 200;
  double sum = 0.0;
  for (int s = 0; s < n_seeds; ++s) {
    const RunRecord rec =
        run_experiment(line, random, 16, 8, static_cast<std::uint64_t>(s));
    sum += rec.incumbents.back();
  }
  const double mean = sum / n_seeds;
  const int n = 128;
  const double expected = 1.0 / (n + 1);
  const double sd = std::sqrt(
      static_cast<double>(n) / ((n + 1.0) * (n + 1.0) * (n + 2.0)));
  CHECK(std::abs(mean - expected) <= 3.0 * sd / std::sqrt(n_seeds));
}

TEST_CASE("wilcoxon exact p-values") {
  const WilcoxonResult all_positive =
      wilcoxon_signed_rank({1.0, 2.0, 3.0, 4.0, 5.0});
  CHECK(all_positive.p_greater == doctest::Approx(1.0 / 32.0).epsilon(1e-12));
  CHECK(all_positive.statistic == 15.0);

  const WilcoxonResult none = wilcoxon_signed_rank({0.0, 0.0, 0.0});
  CHECK(none.p_greater == 1.0);
  CHECK(none.n_nonzero == 0);

  // symmetric case: P(W+ >= W_obs) for one positive and one negative of
  // equal magnitude and distinct ranks
  const WilcoxonResult mixed = wilcoxon_signed_rank({2.0, -1.0});
  CHECK(mixed.statistic == 2.0);
  CHECK(mixed.p_greater == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("wilcoxon p-values match the reference implementation") {
  // Frozen from scipy.stats.wilcoxon (exact mode; approx without the
  // continuity correction).
  const WilcoxonResult plain = wilcoxon_signed_rank(
      {1.5, -0.3, 2.2, 0.9, -1.1, 0.4, 3.0, -0.2, 1.8, 0.7});
  CHECK(plain.p_greater == doctest::Approx(0.0322265625).epsilon(1e-12));
  CHECK(plain.p_two_sided == doctest::Approx(0.064453125).epsilon(1e-12));

  std::vector<double> big;
  for (int i = 1; i <= 30; ++i) big.push_back(i);
  big[5] = -6.0;
  big[20] = -21.0;
  const WilcoxonResult approx = wilcoxon_signed_rank(big);
  CHECK(approx.p_greater ==
        doctest::Approx(1.1852238512752425e-05).epsilon(1e-9));
}

TEST_CASE("wilcoxon exact p-values match brute-force sign enumeration") {
  // Oracle: enumerate all 2^n sign assignments over the observed midranks
  // (the exact conditional null, which handles ties).
  auto brute_force = [](const std::vector<double>& diffs) {
    std::vector<double> nonzero;
    for (const double d : diffs) {
      if (d != 0.0) nonzero.push_back(d);
    }
    const int n = static_cast<int>(nonzero.size());
    std::vector<double> ranks(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      double below = 0.0, equal = 0.0;
      for (int j = 0; j < n; ++j) {
        if (std::abs(nonzero[static_cast<std::size_t>(j)]) <
            std::abs(nonzero[static_cast<std::size_t>(i)])) {
          below += 1.0;
        } else if (std::abs(nonzero[static_cast<std::size_t>(j)]) ==
                   std::abs(nonzero[static_cast<std::size_t>(i)])) {
          equal += 1.0;
        }
      }
      ranks[static_cast<std::size_t>(i)] = below + 0.5 * (equal + 1.0);
    }
    double w_obs = 0.0;
    for (int i = 0; i < n; ++i) {
      if (nonzero[static_cast<std::size_t>(i)] > 0.0) {
        w_obs += ranks[static_cast<std::size_t>(i)];
      }
    }
    int ge = 0;
    const int combos = 1 << n;
    for (int mask = 0; mask < combos; ++mask) {
      double w = 0.0;
      for (int i = 0; i < n; ++i) {
        if (mask & (1 << i)) w += ranks[static_cast<std::size_t>(i)];
      }
      if (w >= w_obs - 1e-12) ++ge;
    }
    return static_cast<double>(ge) / combos;
  };

  // hand-checked tied case: ranks {2,2,2,5,5,5,7}, W+ = 21, P = 21/128
  const std::vector<double> tied = {1.0, 1.0, -1.0, 2.0, 2.0, -2.0, 3.0};
  CHECK(wilcoxon_signed_rank(tied).p_greater ==
        doctest::Approx(21.0 / 128.0).epsilon(1e-12));
  CHECK(brute_force(tied) == doctest::Approx(21.0 / 128.0).epsilon(1e-12));

  Rng rng(61);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 2 + static_cast<int>(rng.uniform_below(9));
    std::vector<double> diffs;
    for (int i = 0; i < n; ++i) {
      // quantized values induce ties and occasional zeros
      diffs.push_back(std::floor(rng.normal() * 3.0) / 2.0);
    }
    const WilcoxonResult res = wilcoxon_signed_rank(diffs);
    if (res.n_nonzero == 0) {
      CHECK(res.p_greater == 1.0);
      continue;
    }
    CHECK(res.p_greater ==
          doctest::Approx(brute_force(diffs)).epsilon(1e-12));
  }
}

TEST_CASE("wilcoxon normal approximation for large n") {
  std::vector<double> diffs;
  Rng rng(12);
  for (int i = 0; i < 48; ++i) diffs.push_back(1.0 + rng.uniform());
  const WilcoxonResult res = wilcoxon_signed_rank(diffs);
  CHECK(res.n_nonzero == 48);
  CHECK(res.p_greater < 1e-8);  // uniformly positive differences

  std::vector<double> balanced;
  for (int i = 0; i < 26; ++i) balanced.push_back(i % 2 == 0 ? 1.0 : -1.0);
  const WilcoxonResult mid = wilcoxon_signed_rank(balanced);
  CHECK(mid.p_greater > 0.3);
  CHECK(mid.p_greater < 0.7);
}

TEST_CASE("aggregate computes paired statistics") {
  std::vector<RunRecord> records;
  auto push = [&records](const std::string& method, const std::string& obj,
                         std::uint64_t seed, double s) {
    RunRecord rec;
    rec.method = method;
    rec.objective = obj;
    rec.seed = seed;
    rec.score = s;
    records.push_back(rec);
  };
  push("a", "o1", 0, 90.0);
  push("a", "o1", 1, 100.0);
  push("b", "o1", 0, 80.0);
  push("b", "o1", 1, 85.0);

  const ScoreReport report = aggregate(records);
  CHECK(report.method_stats.at("a").mean == 95.0);
  CHECK(report.method_stats.at("a").stddev ==
        doctest::Approx(7.0710678118654755).epsilon(1e-12));
  CHECK(report.method_stats.at("b").mean == 82.5);
  CHECK(report.p_greater.at("a").at("b") ==
        doctest::Approx(0.25).epsilon(1e-12));

  push("b", "o2", 0, 50.0);  // unpaired now
  CHECK_THROWS_AS(aggregate(records), BenchError);
}

TEST_CASE("run records serialize to stable json and csv") {
  RunRecord rec;
  rec.objective = "obj";
  rec.method = "m";
  rec.seed = 5;
  Assignment x;
  x["r"] = 1.5;
  x["i"] = std::int64_t{3};
  x["c"] = std::string("cat");
  x["b"] = true;
  rec.trace.emplace_back(x, 2.5);
  rec.incumbents = {2.5};
  rec.score = 88.25;

  const std::string json = run_record_to_json(rec);
  const RunRecord back = run_record_from_json(json);
  CHECK(back.objective == rec.objective);
  CHECK(back.method == rec.method);
  CHECK(back.seed == rec.seed);
  CHECK(back.score == rec.score);
  REQUIRE(back.trace.size() == 1);
  CHECK(back.trace[0].first == x);
  CHECK(back.trace[0].second == 2.5);
  CHECK(run_record_to_json(back) == json);

  RunRecord second = rec;
  second.seed = 2;
  const std::string csv = summary_csv({rec, second});
  CHECK(csv ==
        "method,objective,seed,score\n"
        "m,obj,2,88.25\n"
        "m,obj,5,88.25\n");
}

TEST_CASE("run_many covers all triples on any thread count") {
  std::vector<Objective> objectives = {suite_objective("branin2")};
  std::vector<std::pair<std::string, MethodFactory>> methods;
  methods.emplace_back("random", make_method("random", 4, 8));

  const auto serial = run_many(objectives, methods, 4, 8, 3, 0, 1);
  const auto parallel = run_many(objectives, methods, 4, 8, 3, 0, 2);
  REQUIRE(serial.size() == 3);
  REQUIRE(parallel.size() == 3);
  for (std::size_t i = 0; i < serial.size(); ++i) {
    CHECK(run_record_to_json(serial[i]) == run_record_to_json(parallel[i]));
  }
}

TEST_CASE("protocol violations surface as bench errors") {
  class Broken final : public Method {
   public:
    std::vector<Assignment> suggest() override { return {}; }
    void observe(const std::vector<Assignment>&,
                 const std::vector<double>&) override {}
  };
  const Objective branin = suite_objective("branin2");
  const MethodFactory broken = [](const SpaceDefinition&, std::uint64_t) {
    return std::make_unique<Broken>();
  };
  CHECK_THROWS_AS(run_experiment(branin, broken, 2, 8, 0), BenchError);
}
