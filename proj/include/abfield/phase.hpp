#pragma once

#include <cmath>
#include <numbers>

namespace abfield {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Maps x onto the canonical branch (-pi, pi].
inline double wrap_phase(double x) {
  double r = std::remainder(x, kTwoPi);
  if (r <= -std::numbers::pi) r += kTwoPi;
  return r;
}

// Distance between two angles on the circle, in [0, pi].
inline double circular_distance(double x, double y) {
  return std::abs(wrap_phase(x - y));
}

}  // namespace abfield
