#pragma once

#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "tiltgait/gaits.hpp"
#include "tiltgait/rigidbody.hpp"

namespace tiltgait {

/// The decoupling matrix is singular, or too close to it to invert.
class SingularityError : public std::runtime_error {
 public:
  SingularityError(const std::string& what, double condition)
      : std::runtime_error(what), condition_(condition) {}
  double condition() const { return condition_; }

 private:
  double condition_;
};

/// Output dynamics (roll, pitch, yaw, altitude)'' = delta * w + drift.
struct LinearizationData {
  Mat4 delta = Mat4::Identity();
  Vec4 drift = Vec4::Zero();
  /// Invertibility condition at the state the data was built for; +inf when unknown.
  double condition = std::numeric_limits<double>::infinity();
};

/// Builds the decoupling matrix and drift at `state` for tilt `alpha`.
///
/// Rows 1-3 map rotor signed squares to Euler angle accelerations
/// (E(phi, theta) * I^-1 * tau(alpha)); at level attitude E is the identity and
/// they reduce to I^-1 * tau(alpha). Row 4 is (1/m) [0 0 1] R F(alpha). The
/// drift carries dE/dt * omega on the attitude rows and -g on altitude.
/// Throws SingularityError if any rotor is stopped.
LinearizationData decoupling_matrix(const RigidState& state, const TiltAngles& alpha,
                                    const VehicleParams& params,
                                    const DynamicsOptions& options = {});

/// Invertibility condition at zero roll and pitch (four-digit coefficients).
double approx_condition(const TiltAngles& alpha);

/// Full invertibility condition at roll `roll` and pitch `pitch`. Proportional to
/// det(delta) by a positive factor for the reference vehicle, so its sign and
/// zero set are those of the determinant.
double exact_condition(const TiltAngles& alpha, double roll, double pitch);

/// exact_condition split by attitude factor:
///   value(roll, pitch) = sin_pitch * sin(pitch)
///                      + cos_roll_cos_pitch * cos(roll) cos(pitch)
///                      + sin_roll_cos_pitch * sin(roll) cos(pitch)
struct ConditionPolynomial {
  double sin_pitch = 0.0;
  double cos_roll_cos_pitch = 0.0;
  double sin_roll_cos_pitch = 0.0;

  static ConditionPolynomial at(const TiltAngles& alpha);
  double operator()(double roll, double pitch) const;
};

inline constexpr double kDefaultSingularityMargin = 0.1;

struct LocusGrid {
  double roll_max = 1.2;   // rad, symmetric range
  double pitch_max = 1.2;  // rad
  int resolution = 201;    // points per axis
};

struct LocusPoint {
  double roll = 0.0;
  double pitch = 0.0;
};

struct SingularLocus {
  TiltAngles alpha = TiltAngles::Zero();
  LocusGrid grid;
  std::vector<LocusPoint> points;

  /// Distance from level attitude to the nearest point; +inf when empty.
  double min_distance() const;
};

/// Zero crossings of exact_condition over the roll-pitch grid, each refined by
/// bisection along its grid edge to |condition| < tol.
SingularLocus locus_sweep(const TiltAngles& alpha, const LocusGrid& grid = {},
                          double tol = 1e-9);

/// Phase where the largest |alpha_i| peaks, scanned over `samples` phases.
double max_amplitude_phase(const GaitWaveform& waveform, int samples = 1000);

struct AttitudeBox {
  double roll_max = 0.3;
  double pitch_max = 0.3;
};

struct MarginScanOptions {
  double margin = kDefaultSingularityMargin;
  int time_samples = 200;
  /// Lattice spacing of the attitude grid; the box edges are always included.
  double attitude_step = 0.01;
  int max_scale = 10000;
};

/// Smallest |exact_condition| over sampled phases of the scaled waveform and
/// attitudes in the box.
double worst_condition(const GaitWaveform& waveform, int scale, const AttitudeBox& box,
                       const MarginScanOptions& options = {});

/// Smallest n >= 1 whose scaled gait clears the margin everywhere in the box.
/// Throws std::invalid_argument when even zero tilt cannot clear the margin
/// (4 cos(roll_max) cos(pitch_max) <= margin) or the box is outside (0, pi/2).
int min_scale(const GaitWaveform& waveform, const AttitudeBox& box,
              const MarginScanOptions& options = {});

}  // namespace tiltgait
