#pragma once

#include <cmath>

namespace mot {

inline constexpr double kPi = 3.14159265358979323846;

/// Wraps an angle to [-pi, pi).
inline double wrap_angle(double a) {
  double w = a - 2.0 * kPi * std::floor((a + kPi) / (2.0 * kPi));
  // floor rounding can land exactly on pi for inputs like -pi - eps
  if (w >= kPi) w -= 2.0 * kPi;
  if (w < -kPi) w += 2.0 * kPi;
  return w;
}

/// Shortest signed angular difference a - b, wrapped to [-pi, pi).
inline double angle_diff(double a, double b) { return wrap_angle(a - b); }

}  // namespace mot
