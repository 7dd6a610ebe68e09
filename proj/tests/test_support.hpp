#pragma once

#include <cmath>
#include <random>

#include "tiltgait/rigidbody.hpp"

namespace tiltgait::test {

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline Vec4 random_tilt(std::mt19937_64& rng, double max) {
  return Vec4(uniform(rng, -max, max), uniform(rng, -max, max), uniform(rng, -max, max),
              uniform(rng, -max, max));
}

/// Signed squares with the rotor sign convention and speeds in [lo, hi].
inline RotorState random_rotor(std::mt19937_64& rng, double lo = 100.0, double hi = 500.0) {
  Vec4 speeds;
  for (int i = 0; i < 4; ++i) speeds[i] = kRotorSigns[i] * uniform(rng, lo, hi);
  return RotorState::from_speeds(speeds);
}

/// Euler angle accelerations measured from R, its rate and its acceleration,
/// by differentiating the ZYX extraction formulas twice.
inline Vec3 euler_accel_from_rotation(const Mat3& r, const Mat3& rd, const Mat3& rdd) {
  auto atan2_dd = [](double a, double ad, double add, double b, double bd, double bdd) {
    const double q = a * a + b * b;
    const double num = b * ad - a * bd;
    return ((b * add - a * bdd) * q - num * 2.0 * (a * ad + b * bd)) / (q * q);
  };
  const double c = r(2, 0), cd = rd(2, 0), cdd = rdd(2, 0);
  const double k = 1.0 - c * c;
  const double pitch_dd = -(cdd / std::sqrt(k) + c * cd * cd / (k * std::sqrt(k)));
  return Vec3(atan2_dd(r(2, 1), rd(2, 1), rdd(2, 1), r(2, 2), rd(2, 2), rdd(2, 2)), pitch_dd,
              atan2_dd(r(1, 0), rd(1, 0), rdd(1, 0), r(0, 0), rd(0, 0), rdd(0, 0)));
}

}  // namespace tiltgait::test
