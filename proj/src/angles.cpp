#include "ocm3d/angles.hpp"

#include <cmath>

namespace ocm3d {

double WrapAngle(double radians) {
  double r = std::remainder(radians, 2.0 * kPi);
  if (r <= -kPi) r += 2.0 * kPi;
  return r;
}

double AngularDistance(double a, double b) { return std::abs(WrapAngle(a - b)); }

}  // namespace ocm3d
