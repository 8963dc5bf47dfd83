#include "spbopt/sampling.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace spbopt {
namespace {

constexpr int kSobolBits = 52;  // exact as doubles

// Joe-Kuo direction numbers (new-joe-kuo-6), dimensions 2..64. Dimension 1
// is the van der Corput sequence. poly encodes the primitive polynomial
// including leading and trailing coefficients.
struct SobolRow {
  std::uint32_t poly;
  std::uint32_t m[9];
};

constexpr SobolRow kSobolTable[] = {
    {3, {1}},
    {7, {1, 3}},
    {11, {1, 3, 1}},
    {13, {1, 1, 1}},
    {19, {1, 1, 3, 3}},
    {25, {1, 3, 5, 13}},
    {37, {1, 1, 5, 5, 17}},
    {41, {1, 1, 5, 5, 5}},
    {47, {1, 1, 7, 11, 19}},
    {55, {1, 1, 5, 1, 1}},
    {59, {1, 1, 1, 3, 11}},
    {61, {1, 3, 5, 5, 31}},
    {67, {1, 3, 3, 9, 7, 49}},
    {91, {1, 1, 1, 15, 21, 21}},
    {97, {1, 3, 1, 13, 27, 49}},
    {103, {1, 1, 1, 15, 7, 5}},
    {109, {1, 3, 1, 15, 13, 25}},
    {115, {1, 1, 5, 5, 19, 61}},
    {131, {1, 3, 7, 11, 23, 15, 103}},
    {137, {1, 3, 7, 13, 13, 15, 69}},
    {143, {1, 1, 3, 13, 7, 35, 63}},
    {145, {1, 3, 5, 9, 1, 25, 53}},
    {157, {1, 3, 1, 13, 9, 35, 107}},
    {167, {1, 3, 1, 5, 27, 61, 31}},
    {171, {1, 1, 5, 11, 19, 41, 61}},
    {185, {1, 3, 5, 3, 3, 13, 69}},
    {191, {1, 1, 7, 13, 1, 19, 1}},
    {193, {1, 3, 7, 5, 13, 19, 59}},
    {203, {1, 1, 3, 9, 25, 29, 41}},
    {211, {1, 3, 5, 13, 23, 1, 55}},
    {213, {1, 3, 7, 3, 13, 59, 17}},
    {229, {1, 3, 1, 3, 5, 53, 69}},
    {239, {1, 1, 5, 5, 23, 33, 13}},
    {241, {1, 1, 7, 7, 1, 61, 123}},
    {247, {1, 1, 7, 9, 13, 61, 49}},
    {253, {1, 3, 3, 5, 3, 55, 33}},
    {285, {1, 3, 1, 15, 31, 13, 49, 245}},
    {299, {1, 3, 5, 15, 31, 59, 63, 97}},
    {301, {1, 3, 1, 11, 11, 11, 77, 249}},
    {333, {1, 3, 1, 11, 27, 43, 71, 9}},
    {351, {1, 1, 7, 15, 21, 11, 81, 45}},
    {355, {1, 3, 7, 3, 25, 31, 65, 79}},
    {357, {1, 3, 1, 1, 19, 11, 3, 205}},
    {361, {1, 1, 5, 9, 19, 21, 29, 157}},
    {369, {1, 3, 7, 11, 1, 33, 89, 185}},
    {391, {1, 3, 3, 3, 15, 9, 79, 71}},
    {397, {1, 3, 7, 11, 15, 39, 119, 27}},
    {425, {1, 1, 3, 1, 11, 31, 97, 225}},
    {451, {1, 1, 1, 3, 23, 43, 57, 177}},
    {463, {1, 3, 7, 7, 17, 17, 37, 71}},
    {487, {1, 3, 1, 5, 27, 63, 123, 213}},
    {501, {1, 1, 3, 5, 11, 43, 53, 133}},
    {529, {1, 3, 5, 5, 29, 17, 47, 173, 479}},
    {539, {1, 3, 3, 11, 3, 1, 109, 9, 69}},
    {545, {1, 1, 1, 5, 17, 39, 23, 5, 343}},
    {557, {1, 3, 1, 5, 25, 15, 31, 103, 499}},
    {563, {1, 1, 1, 11, 11, 17, 63, 105, 183}},
    {601, {1, 1, 5, 11, 9, 29, 97, 231, 363}},
    {607, {1, 1, 5, 15, 19, 45, 41, 7, 383}},
    {617, {1, 3, 7, 7, 31, 19, 83, 137, 221}},
    {623, {1, 1, 1, 3, 23, 15, 111, 223, 83}},
    {631, {1, 1, 5, 13, 31, 15, 55, 25, 161}},
    {637, {1, 1, 3, 13, 25, 47, 39, 87, 257}},
};

constexpr int kPrimes[kMaxSequenceDim] = {
    2,   3,   5,   7,   11,  13,  17,  19,  23,  29,  31,  37,  41,
    43,  47,  53,  59,  61,  67,  71,  73,  79,  83,  89,  97,  101,
    103, 107, 109, 113, 127, 131, 137, 139, 149, 151, 157, 163, 167,
    173, 179, 181, 191, 193, 197, 199, 211, 223, 227, 229, 233, 239,
    241, 251, 257, 263, 269, 271, 277, 281, 283, 293, 307, 311};

// Direction numbers v_k = m_k * 2^(kSobolBits-k) for one Sobol dimension.
std::vector<std::uint64_t> sobol_directions(int dim_index) {
  std::vector<std::uint64_t> m(kSobolBits);
  if (dim_index == 0) {
    std::fill(m.begin(), m.end(), 1);  // van der Corput
  } else {
    const SobolRow& row = kSobolTable[dim_index - 1];
    const int degree = std::bit_width(row.poly) - 1;
    for (int k = 0; k < degree; ++k) m[static_cast<std::size_t>(k)] = row.m[k];
    for (int k = degree; k < kSobolBits; ++k) {
      // m_k = a_1 2 m_{k-1} ^ a_2 4 m_{k-2} ^ ... ^ 2^s m_{k-s} ^ m_{k-s}
      std::uint64_t value = m[static_cast<std::size_t>(k - degree)] ^
                            (m[static_cast<std::size_t>(k - degree)] << degree);
      for (int j = 1; j < degree; ++j) {
        const std::uint32_t coeff = (row.poly >> (degree - j)) & 1u;
        if (coeff) value ^= m[static_cast<std::size_t>(k - j)] << j;
      }
      m[static_cast<std::size_t>(k)] = value;
    }
  }
  std::vector<std::uint64_t> v(kSobolBits);
  for (int k = 0; k < kSobolBits; ++k) {
    v[static_cast<std::size_t>(k)] = m[static_cast<std::size_t>(k)]
                                     << (kSobolBits - 1 - k);
  }
  return v;
}

Eigen::MatrixXd sobol_points(int n, int d) {
  Eigen::MatrixXd pts(n, d);
  for (int j = 0; j < d; ++j) {
    const auto v = sobol_directions(j);
    std::uint64_t state = 0;
    for (int i = 0; i < n; ++i) {
      pts(i, j) = static_cast<double>(state) * 0x1.0p-52;
      const int bit = std::countr_zero(static_cast<std::uint64_t>(i) + 1);
      state ^= v[static_cast<std::size_t>(bit)];  // Gray-code ordering
    }
  }
  return pts;
}

double radical_inverse(std::uint64_t index, int base) {
  double result = 0.0;
  double scale = 1.0 / base;
  while (index > 0) {
    result += static_cast<double>(index % static_cast<std::uint64_t>(base)) * scale;
    index /= static_cast<std::uint64_t>(base);
    scale /= base;
  }
  return result;
}

}  // namespace

DesignMatrix latin_hypercube(int n, int d, Rng& rng) {
  if (n < 1 || d < 1) {
    throw std::invalid_argument("latin_hypercube: n and d must be >= 1");
  }
  Eigen::MatrixXd pts(n, d);
  std::vector<int> bins(static_cast<std::size_t>(n));
  for (int j = 0; j < d; ++j) {
    std::iota(bins.begin(), bins.end(), 0);
    rng.shuffle(bins);
    for (int i = 0; i < n; ++i) {
      pts(i, j) = (bins[static_cast<std::size_t>(i)] + rng.uniform()) / n;
    }
  }
  return {std::move(pts)};
}

double ratio_criterion(const DesignMatrix& design) {
  const Eigen::Index n = design.n();
  if (n < 2) throw std::invalid_argument("ratio_criterion: need n >= 2");
  double min_sq = std::numeric_limits<double>::infinity();
  double max_sq = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double sq = (design.points.row(i) - design.points.row(j)).squaredNorm();
      min_sq = std::min(min_sq, sq);
      max_sq = std::max(max_sq, sq);
    }
  }
  if (min_sq == 0.0) return 0.0;  // duplicates; max_sq == 0 implies min_sq == 0
  return std::sqrt(min_sq / max_sq);
}

DesignMatrix lhs_ratio(int n, int d, Rng& rng, int n_restarts) {
  if (n < 2) throw std::invalid_argument("lhs_ratio: need n >= 2");
  if (n_restarts < 1) throw std::invalid_argument("lhs_ratio: need n_restarts >= 1");
  DesignMatrix best;
  double best_ratio = -1.0;
  for (int r = 0; r < n_restarts; ++r) {
    DesignMatrix candidate = latin_hypercube(n, d, rng);
    const double ratio = ratio_criterion(candidate);
    if (ratio > best_ratio) {
      best_ratio = ratio;
      best = std::move(candidate);
    }
  }
  return best;
}

DesignMatrix low_discrepancy(Sequence kind, int n, int d) {
  if (n < 1 || d < 1) {
    throw std::invalid_argument("low_discrepancy: n and d must be >= 1");
  }
  if (d > kMaxSequenceDim) {
    throw std::invalid_argument("low_discrepancy: d exceeds supported cap " +
                                std::to_string(kMaxSequenceDim));
  }
  switch (kind) {
    case Sequence::kSobol:
      return {sobol_points(n, d)};
    case Sequence::kHalton: {
      Eigen::MatrixXd pts(n, d);
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < d; ++j) {
          pts(i, j) = radical_inverse(static_cast<std::uint64_t>(i) + 1, kPrimes[j]);
        }
      }
      return {std::move(pts)};
    }
    case Sequence::kHammersley: {
      Eigen::MatrixXd pts(n, d);
      for (int i = 0; i < n; ++i) {
        pts(i, 0) = static_cast<double>(i) / n;
        for (int j = 1; j < d; ++j) {
          pts(i, j) = radical_inverse(static_cast<std::uint64_t>(i) + 1, kPrimes[j - 1]);
        }
      }
      return {std::move(pts)};
    }
  }
  throw std::invalid_argument("low_discrepancy: unknown sequence kind");
}

}  // namespace spbopt
