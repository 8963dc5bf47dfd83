#include "spbopt/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "spbopt/sampling.hpp"

namespace spbopt {
namespace {

constexpr double kPi = 3.1415926535897932384626433832795;

double as_real(const Assignment& x, const std::string& name) {
  return std::get<double>(x.at(name));
}

Objective make_branin2() {
  Objective obj;
  obj.name = "branin2";
  obj.space = validate_space({ParamSpec::real("x1", -5.0, 10.0),
                              ParamSpec::real("x2", 0.0, 15.0)});
  obj.eval = [](const Assignment& x) {
    const double x1 = as_real(x, "x1");
    const double x2 = as_real(x, "x2");
    const double b = 5.1 / (4.0 * kPi * kPi);
    const double c = 5.0 / kPi;
    const double term = x2 - b * x1 * x1 + c * x1 - 6.0;
    return term * term + 10.0 * (1.0 - 1.0 / (8.0 * kPi)) * std::cos(x1) + 10.0;
  };
  obj.f_min = 0.39788735772973816;
  obj.analytic_min = true;
  return obj;
}

Objective make_rosenbrock3() {
  Objective obj;
  obj.name = "rosenbrock3";
  obj.space = validate_space({ParamSpec::real("x1", -5.0, 10.0, Warp::kBilog),
                              ParamSpec::real("x2", -5.0, 10.0, Warp::kBilog),
                              ParamSpec::real("x3", -5.0, 10.0, Warp::kBilog)});
  obj.eval = [](const Assignment& x) {
    const double v[3] = {as_real(x, "x1"), as_real(x, "x2"), as_real(x, "x3")};
    double sum = 0.0;
    for (int i = 0; i < 2; ++i) {
      const double a = v[i + 1] - v[i] * v[i];
      const double b = 1.0 - v[i];
      sum += 100.0 * a * a + b * b;
    }
    return sum;
  };
  obj.f_min = 0.0;
  obj.analytic_min = true;
  return obj;
}

Objective make_levy4() {
  Objective obj;
  obj.name = "levy4";
  std::vector<ParamSpec> specs;
  for (int i = 1; i <= 4; ++i) {
    specs.push_back(ParamSpec::real("x" + std::to_string(i), -10.0, 10.0));
  }
  obj.space = validate_space(std::move(specs));
  obj.eval = [](const Assignment& x) {
    double w[4];
    for (int i = 0; i < 4; ++i) {
      w[i] = 1.0 + (as_real(x, "x" + std::to_string(i + 1)) - 1.0) / 4.0;
    }
    const double s0 = std::sin(kPi * w[0]);
    double sum = s0 * s0;
    for (int i = 0; i < 3; ++i) {
      const double si = std::sin(kPi * w[i] + 1.0);
      sum += (w[i] - 1.0) * (w[i] - 1.0) * (1.0 + 10.0 * si * si);
    }
    const double sl = std::sin(2.0 * kPi * w[3]);
    sum += (w[3] - 1.0) * (w[3] - 1.0) * (1.0 + sl * sl);
    return sum;
  };
  obj.f_min = 0.0;
  obj.analytic_min = true;
  return obj;
}

Objective make_ackley5() {
  Objective obj;
  obj.name = "ackley5";
  std::vector<ParamSpec> specs;
  for (int i = 1; i <= 4; ++i) {
    specs.push_back(
        ParamSpec::real("x" + std::to_string(i), -32.768, 32.768));
  }
  specs.push_back(ParamSpec::integer("x5", -32, 32));
  obj.space = validate_space(std::move(specs));
  obj.eval = [](const Assignment& x) {
    double v[5];
    for (int i = 0; i < 4; ++i) v[i] = as_real(x, "x" + std::to_string(i + 1));
    v[4] = static_cast<double>(std::get<std::int64_t>(x.at("x5")));
    double sq = 0.0, cs = 0.0;
    for (const double vi : v) {
      sq += vi * vi;
      cs += std::cos(2.0 * kPi * vi);
    }
    return -20.0 * std::exp(-0.2 * std::sqrt(sq / 5.0)) - std::exp(cs / 5.0) +
           20.0 + std::exp(1.0);
  };
  obj.f_min = 0.0;
  obj.analytic_min = true;
  return obj;
}

Objective make_hartmann6() {
  Objective obj;
  obj.name = "hartmann6";
  std::vector<ParamSpec> specs;
  for (int i = 1; i <= 6; ++i) {
    specs.push_back(ParamSpec::real("x" + std::to_string(i), 0.0, 1.0));
  }
  obj.space = validate_space(std::move(specs));
  obj.eval = [](const Assignment& x) {
    static const double alpha[4] = {1.0, 1.2, 3.0, 3.2};
    static const double A[4][6] = {{10, 3, 17, 3.5, 1.7, 8},
                                   {0.05, 10, 17, 0.1, 8, 14},
                                   {3, 3.5, 1.7, 10, 17, 8},
                                   {17, 8, 0.05, 10, 0.1, 14}};
    static const double P[4][6] = {
        {0.1312, 0.1696, 0.5569, 0.0124, 0.8283, 0.5886},
        {0.2329, 0.4135, 0.8307, 0.3736, 0.1004, 0.9991},
        {0.2348, 0.1451, 0.3522, 0.2883, 0.3047, 0.6650},
        {0.4047, 0.8828, 0.8732, 0.5743, 0.1091, 0.0381}};
    double v[6];
    for (int i = 0; i < 6; ++i) v[i] = as_real(x, "x" + std::to_string(i + 1));
    double sum = 0.0;
    for (int i = 0; i < 4; ++i) {
      double inner = 0.0;
      for (int j = 0; j < 6; ++j) {
        const double d = v[j] - P[i][j];
        inner += A[i][j] * d * d;
      }
      sum += alpha[i] * std::exp(-inner);
    }
    return -sum;
  };
  obj.f_min = -3.322368011391339;
  obj.analytic_min = true;
  return obj;
}

Objective make_sphere_cat() {
  Objective obj;
  obj.name = "sphere_cat";
  obj.space = validate_space(
      {ParamSpec::real("x1", -2.0, 2.0), ParamSpec::real("x2", -2.0, 2.0),
       ParamSpec::real("x3", -2.0, 2.0),
       ParamSpec::categorical("mode", {"low", "mid", "high"})});
  obj.eval = [](const Assignment& x) {
    double sum = 0.0;
    for (int i = 1; i <= 3; ++i) {
      const double v = as_real(x, "x" + std::to_string(i));
      sum += v * v;
    }
    const std::string& mode = std::get<std::string>(x.at("mode"));
    if (mode == "mid") sum += 0.5;
    if (mode == "high") sum += 1.5;
    return sum;
  };
  obj.f_min = 0.0;
  obj.analytic_min = true;
  return obj;
}

std::vector<Objective> base_suite() {
  std::vector<Objective> suite;
  suite.push_back(make_branin2());
  suite.push_back(make_rosenbrock3());
  suite.push_back(make_levy4());
  suite.push_back(make_ackley5());
  suite.push_back(make_hartmann6());
  suite.push_back(make_sphere_cat());
  return suite;
}

}  // namespace

std::pair<double, double> estimate_bounds(const Objective& objective, int n,
                                          Rng& rng) {
  if (n < 10000) {
    throw std::invalid_argument("estimate_bounds: need n >= 10000 samples");
  }
  const int d = objective.space.encoded_dim();
  Eigen::MatrixXd pts;
  if (d <= kMaxSequenceDim) {
    pts = low_discrepancy(Sequence::kSobol, n, d).points;
  } else {
    pts = latin_hypercube(n, d, rng).points;
  }

  std::vector<double> values(static_cast<std::size_t>(n));
  double sample_min = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    const double y = objective.eval(objective.space.unwarp(pts.row(i).transpose()));
    values[static_cast<std::size_t>(i)] = y;
    sample_min = std::min(sample_min, y);
  }

  std::sort(values.begin(), values.end());
  if (values.front() == values.back()) {
    throw std::invalid_argument("estimate_bounds: objective is constant");
  }
  // 97.5th percentile with linear interpolation between order statistics.
  const double h = 0.975 * static_cast<double>(n - 1);
  const auto lo_idx = static_cast<std::size_t>(std::floor(h));
  const double frac = h - std::floor(h);
  const double f_max =
      lo_idx + 1 < values.size()
          ? values[lo_idx] + frac * (values[lo_idx + 1] - values[lo_idx])
          : values[lo_idx];

  const double f_min = objective.analytic_min ? objective.f_min : sample_min;
  return {f_min, f_max};
}

std::vector<Objective> synthetic_suite(bool with_noise) {
  std::vector<Objective> suite = base_suite();
  Rng rng(0xB0B5EED);
  for (Objective& obj : suite) {
    const auto [f_min, f_max] = estimate_bounds(obj, 16384, rng);
    obj.f_min = f_min;
    obj.f_max = f_max;
    if (with_noise) obj.noise_sigma = 0.01 * (f_max - f_min);
  }
  return suite;
}

Objective suite_objective(const std::string& name, bool with_noise) {
  for (Objective& obj : synthetic_suite(with_noise)) {
    if (obj.name == name) return std::move(obj);
  }
  throw std::invalid_argument("unknown suite objective '" + name + "'");
}

}  // namespace spbopt
