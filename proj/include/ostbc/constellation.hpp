// constellation.hpp - square QAM alphabet and per-component quantization.

#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

namespace ostbc {

// Real PAM alphabet {-(2L-1), ..., -3, -1, 1, 3, ..., 2L-1}; complex symbols
// are drawn from its square.
struct Constellation {
  int half_size = 2;  // L

  explicit Constellation(int L) : half_size(L) {
    if (L < 1) throw std::invalid_argument("constellation: L must be >= 1");
  }

  int size() const { return 2 * half_size; }
  int max_level() const { return 2 * half_size - 1; }

  // E[w^2] for w uniform over the alphabet, per real dimension.
  double mean_square() const {
    return (4.0 * half_size * half_size - 1.0) / 3.0;
  }

  // Mean energy of one complex symbol from the squared alphabet.
  double symbol_energy() const { return 2.0 * mean_square(); }

  std::vector<int> points() const {
    std::vector<int> p;
    for (int v = -max_level(); v <= max_level(); v += 2) p.push_back(v);
    return p;
  }

  bool contains(int v) const {
    return v % 2 != 0 && std::abs(v) <= max_level();
  }
};

// Nearest odd integer within the alphabet. A value sitting exactly on an
// even integer is equidistant to two alphabet points; ties resolve toward
// smaller magnitude (and +1 at exactly zero) so results are reproducible.
inline int quantize(double z, int L) {
  if (!std::isfinite(z)) throw std::domain_error("quantize: non-finite input");
  const int lim = 2 * L - 1;
  if (z >= lim) return lim;
  if (z <= -lim) return -lim;
  const double f = std::floor(z / 2.0);
  const int m = static_cast<int>(f);
  if (z == 2.0 * m) {
    if (m > 0) return 2 * m - 1;
    if (m < 0) return 2 * m + 1;
    return 1;
  }
  return 2 * m + 1;
}

inline std::complex<double> quantize(std::complex<double> z, int L) {
  return {static_cast<double>(quantize(z.real(), L)),
          static_cast<double>(quantize(z.imag(), L))};
}

}  // namespace ostbc
