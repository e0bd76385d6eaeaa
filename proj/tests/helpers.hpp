#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "nlsscat/potential.hpp"

namespace testing_support {

// Sum of a few compact bumps (1 - s^2)^3, strictly inside [-L, L].
inline nlsscat::PotentialGrid random_bumps(std::mt19937& rng, double L, int nx, bool even = false) {
  std::uniform_int_distribution<int> count(1, 3);
  std::uniform_real_distribution<double> amp(-1.5, 1.5), width(0.1 * L, 0.4 * L), unit(0.0, 1.0);
  struct Bump {
    double c, w, a;
  };
  std::vector<Bump> bumps;
  const int k = count(rng);
  for (int j = 0; j < k; ++j) {
    Bump b;
    b.w = width(rng);
    const double room = L - b.w;
    b.c = even ? 0.0 : (2.0 * unit(rng) - 1.0) * 0.9 * room;
    b.a = amp(rng);
    bumps.push_back(b);
  }
  std::vector<double> s(static_cast<std::size_t>(2 * nx + 1));
  for (int i = -nx; i <= nx; ++i) {
    const double x = L * i / nx;
    double v = 0.0;
    for (const auto& b : bumps) {
      const double t = (x - b.c) / b.w;
      if (std::abs(t) < 1.0) v += b.a * std::pow(1.0 - t * t, 3);
    }
    s[static_cast<std::size_t>(i + nx)] = v;
  }
  if (even) {
    for (int i = 1; i <= nx; ++i) s[static_cast<std::size_t>(nx - i)] = s[static_cast<std::size_t>(nx + i)];
  }
  return nlsscat::make_grid(L, s);
}

inline double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace testing_support
