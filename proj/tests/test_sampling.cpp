#include "spbopt/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "doctest.h"

using namespace spbopt;

namespace {

bool stratified(const DesignMatrix& design) {
  const int n = static_cast<int>(design.n());
  for (int j = 0; j < design.d(); ++j) {
    std::vector<int> bins(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      bins[static_cast<std::size_t>(i)] =
          static_cast<int>(std::floor(n * design.points(i, j)));
    }
    std::sort(bins.begin(), bins.end());
    for (int i = 0; i < n; ++i) {
      if (bins[static_cast<std::size_t>(i)] != i) return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("latin hypercube fills every stratum exactly once") {
  Rng rng(123);
  CHECK(stratified(latin_hypercube(4, 2, rng)));

  const DesignMatrix single = latin_hypercube(1, 3, rng);
  CHECK(single.n() == 1);
  for (int j = 0; j < 3; ++j) {
    CHECK(single.points(0, j) >= 0.0);
    CHECK(single.points(0, j) < 1.0);
  }

  CHECK_THROWS_AS(latin_hypercube(0, 2, rng), std::invalid_argument);
  CHECK_THROWS_AS(latin_hypercube(2, 0, rng), std::invalid_argument);
}

TEST_CASE("latin hypercube stratification holds across sizes and seeds") {
  for (const int n : {2, 3, 8, 17, 64}) {
    for (const int d : {1, 2, 5, 10}) {
      Rng rng(static_cast<std::uint64_t>(n * 1000 + d));
      const DesignMatrix design = latin_hypercube(n, d, rng);
      CHECK(stratified(design));
      CHECK(design.points.minCoeff() >= 0.0);
      CHECK(design.points.maxCoeff() < 1.0);
    }
  }
}

TEST_CASE("latin hypercube is deterministic under the seed") {
  Rng a(99), b(99);
  const DesignMatrix da = latin_hypercube(16, 4, a);
  const DesignMatrix db = latin_hypercube(16, 4, b);
  CHECK(da.points == db.points);
}

TEST_CASE("ratio criterion on hand-computed designs") {
  DesignMatrix pair;
  pair.points.resize(2, 2);
  pair.points << 0.0, 0.0, 1.0, 1.0;
  CHECK(ratio_criterion(pair) == 1.0);

  DesignMatrix line;
  line.points.resize(3, 1);
  line.points << 0.0, 0.5, 1.0;
  CHECK(ratio_criterion(line) == doctest::Approx(0.5).epsilon(1e-15));

  DesignMatrix dup;
  dup.points.resize(3, 2);
  dup.points << 0.1, 0.1, 0.1, 0.1, 0.9, 0.9;
  CHECK(ratio_criterion(dup) == 0.0);

  DesignMatrix one;
  one.points.resize(1, 2);
  one.points << 0.5, 0.5;
  CHECK_THROWS_AS(ratio_criterion(one), std::invalid_argument);
}

TEST_CASE("lhs_ratio with one restart equals a plain latin hypercube") {
  Rng a(5), b(5);
  const DesignMatrix plain = latin_hypercube(12, 3, a);
  const DesignMatrix picked = lhs_ratio(12, 3, b, 1);
  CHECK(plain.points == picked.points);
}

TEST_CASE("lhs_ratio returns the argmax of its candidate pool") {
  const int n_restarts = 25;
  Rng pick(31), replay(31);
  const DesignMatrix chosen = lhs_ratio(10, 2, pick, n_restarts);
  const double chosen_ratio = ratio_criterion(chosen);
  CHECK(stratified(chosen));
  for (int r = 0; r < n_restarts; ++r) {
    const DesignMatrix candidate = latin_hypercube(10, 2, replay);
    CHECK(chosen_ratio >= ratio_criterion(candidate));
  }
}

TEST_CASE("lhs_ratio beats the median plain design") {
  // Monte Carlo oracle: the selected design should clear the median ratio
  // of single draws by construction.
  Rng rng(2024);
  std::vector<double> single_ratios;
  for (int s = 0; s < 100; ++s) {
    Rng r(static_cast<std::uint64_t>(s));
    single_ratios.push_back(ratio_criterion(latin_hypercube(24, 3, r)));
  }
  std::sort(single_ratios.begin(), single_ratios.end());
  const double median = 0.5 * (single_ratios[49] + single_ratios[50]);

  const DesignMatrix tuned = lhs_ratio(24, 3, rng, 100);
  CHECK(ratio_criterion(tuned) > median);
}

TEST_CASE("halton radical inverses match hand-computed values") {
  const DesignMatrix h = low_discrepancy(Sequence::kHalton, 3, 2);
  CHECK(h.points(0, 0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(h.points(1, 0) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(h.points(2, 0) == doctest::Approx(0.75).epsilon(1e-15));
  // base 3 column
  CHECK(h.points(0, 1) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(h.points(1, 1) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(h.points(2, 1) == doctest::Approx(1.0 / 9.0).epsilon(1e-15));
}

TEST_CASE("sobol matches the reference sequence") {
  // First eight unscrambled points, cross-checked against scipy.stats.qmc.
  const double expected_d2[8][2] = {
      {0.0, 0.0},     {0.5, 0.5},     {0.75, 0.25},  {0.25, 0.75},
      {0.375, 0.375}, {0.875, 0.875}, {0.625, 0.125}, {0.125, 0.625}};
  const DesignMatrix s2 = low_discrepancy(Sequence::kSobol, 8, 2);
  for (int i = 0; i < 8; ++i) {
    for (int j = 0; j < 2; ++j) {
      CHECK(s2.points(i, j) == doctest::Approx(expected_d2[i][j]).epsilon(1e-15));
    }
  }

  const double expected_d8_row6[8] = {0.625, 0.125, 0.875, 0.625,
                                      0.625, 0.875, 0.125, 0.125};
  const DesignMatrix s8 = low_discrepancy(Sequence::kSobol, 8, 8);
  for (int j = 0; j < 8; ++j) {
    CHECK(s8.points(6, j) == doctest::Approx(expected_d8_row6[j]).epsilon(1e-15));
  }
}

TEST_CASE("sobol prefixes of length 2^k stratify every column") {
  for (int k = 1; k <= 4; ++k) {
    const int n = 1 << k;
    const DesignMatrix s = low_discrepancy(Sequence::kSobol, n, 10);
    CHECK(stratified(s));
  }
}

TEST_CASE("deterministic sequences repeat exactly") {
  const DesignMatrix a = low_discrepancy(Sequence::kSobol, 100, 6);
  const DesignMatrix b = low_discrepancy(Sequence::kSobol, 100, 6);
  CHECK(a.points == b.points);

  const DesignMatrix ha = low_discrepancy(Sequence::kHalton, 50, 5);
  const DesignMatrix hb = low_discrepancy(Sequence::kHalton, 50, 5);
  CHECK(ha.points == hb.points);
}

TEST_CASE("hammersley replaces the first coordinate with i/n") {
  const int n = 8;
  const DesignMatrix h = low_discrepancy(Sequence::kHammersley, n, 3);
  for (int i = 0; i < n; ++i) {
    CHECK(h.points(i, 0) == doctest::Approx(static_cast<double>(i) / n));
  }
  // remaining columns follow the Halton bases 2, 3
  const DesignMatrix halton = low_discrepancy(Sequence::kHalton, n, 2);
  for (int i = 0; i < n; ++i) {
    CHECK(h.points(i, 1) == halton.points(i, 0));
    CHECK(h.points(i, 2) == halton.points(i, 1));
  }
}

TEST_CASE("dimension cap is enforced") {
  CHECK_NOTHROW(low_discrepancy(Sequence::kSobol, 4, kMaxSequenceDim));
  CHECK_THROWS_AS(low_discrepancy(Sequence::kSobol, 4, kMaxSequenceDim + 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(low_discrepancy(Sequence::kHalton, 4, kMaxSequenceDim + 1),
                  std::invalid_argument);
}
