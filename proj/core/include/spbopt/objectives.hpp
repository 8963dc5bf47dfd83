#pragma once

#include <functional>
#include <string>
#include <vector>

#include "spbopt/rng.hpp"
#include "spbopt/space.hpp"

namespace spbopt {

// A benchmark objective: typed space, deterministic evaluator and the
// normalization bounds used for scoring. noise_sigma > 0 adds seeded
// Gaussian observation noise in the experiment runner.
struct Objective {
  std::string name;
  SpaceDefinition space;
  std::function<double(const Assignment&)> eval;
  double f_min = 0.0;
  double f_max = 1.0;
  bool analytic_min = false;
  double noise_sigma = 0.0;
};

// Normalization bounds: f_min is the declared analytic minimum when the
// objective has one, otherwise the minimum over n quasi-random samples;
// f_max is the 97.5th percentile of those samples (robust to heavy tails).
// Requires n >= 10000; rejects constant objectives.
std::pair<double, double> estimate_bounds(const Objective& objective, int n,
                                          Rng& rng);

// The six-function synthetic suite: branin2, rosenbrock3 (bilog-warped
// range), levy4, ackley5 (one integer dimension), hartmann6 and
// sphere_cat (3 reals + 1 categorical offset). Bounds are precomputed
// deterministically. with_noise sets noise_sigma = 1% of (f_max - f_min).
std::vector<Objective> synthetic_suite(bool with_noise = false);

// Suite member by name; throws std::invalid_argument for unknown names.
Objective suite_objective(const std::string& name, bool with_noise = false);

}  // namespace spbopt
