#pragma once

#include <stdexcept>
#include <string>

namespace sbpact {

/// Uniform 1D grid: n points starting at `origin` with step `spacing`.
struct Grid1D {
  int n = 2;
  double spacing = 1.0;
  double origin = 0.0;

  double coord(int i) const { return origin + spacing * i; }
  double length() const { return spacing * (n - 1); }

  void validate() const {
    if (n < 2) throw std::invalid_argument("Grid1D: need n >= 2, got " + std::to_string(n));
    if (!(spacing > 0.0)) throw std::invalid_argument("Grid1D: spacing must be positive");
  }
};

/// Grid covering [a, b] with n points.
inline Grid1D make_grid(double a, double b, int n) {
  if (n < 2) throw std::invalid_argument("make_grid: need n >= 2");
  if (!(b > a)) throw std::invalid_argument("make_grid: need b > a");
  return Grid1D{n, (b - a) / (n - 1), a};
}

}  // namespace sbpact
