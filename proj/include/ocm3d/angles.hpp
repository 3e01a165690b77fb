#pragma once

#include <numbers>

namespace ocm3d {

inline constexpr double kPi = std::numbers::pi;

// Wraps to (-pi, pi]. -pi maps to +pi.
double WrapAngle(double radians);

// Smallest absolute difference between two angles, in [0, pi].
double AngularDistance(double a, double b);

}  // namespace ocm3d
