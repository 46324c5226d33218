// Shared fixtures for the unit tests.
#pragma once
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>

#include "cyvortex/grid.hpp"

namespace cyv::testing {

inline constexpr double pi = 3.14159265358979323846;

/// Uniform random values in [lo, hi], zeroed on the Dirichlet rows when asked.
inline GridField random_field(const StripGrid& g, std::uint64_t seed, double lo = -1.0, double hi = 1.0,
                              bool zero_boundary = true) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(lo, hi);
  GridField f(g);
  for (auto& v : f.values()) v = dist(rng);
  if (zero_boundary) {
    for (double& v : f.row(0)) v = 0.0;
    for (double& v : f.row(g.n_t() - 1)) v = 0.0;
  }
  return f;
}

/// Smooth bump that vanishes to all orders near the strip edges.
inline GridField smooth_field(const StripGrid& g, double amplitude, int mode) {
  GridField f(g);
  for (std::size_t i = 0; i < g.n_t(); ++i)
    for (std::size_t j = 0; j < g.n_theta(); ++j)
      f(i, j) = amplitude * std::exp(-g.t(i) * g.t(i)) * std::cos(mode * g.theta(j));
  return f;
}

inline double max_abs_diff(const GridField& a, const GridField& b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a.values()[k] - b.values()[k]));
  return m;
}

}  // namespace cyv::testing
