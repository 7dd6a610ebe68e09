#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace tiltgait {

using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;
using Mat34 = Eigen::Matrix<double, 3, 4>;

/// Raised when a state or derivative stops being finite.
class NumericalBlowup : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Physical constants of the airframe. Defaults are the reference vehicle.
struct VehicleParams {
  double mass = 0.429;           // kg
  double arm_length = 0.1785;    // m
  double k_thrust = 8.048e-6;    // N s^2 / rad^2
  double k_drag = 2.423e-7;      // N m s^2 / rad^2
  Vec3 inertia_diag{2.24e-3, 2.99e-3, 4.80e-3};  // kg m^2
  double gravity = 9.8;          // N / kg

  /// Throws std::invalid_argument unless every field is strictly positive.
  void validate() const;

  /// Magnitude of each rotor signed square that balances gravity at zero tilt.
  double hover_signed_square() const { return mass * gravity / (4.0 * k_thrust); }
};

/// Z-Y-X Euler angles (roll, pitch, yaw), radians.
struct EulerAttitude {
  double roll = 0.0;
  double pitch = 0.0;
  double yaw = 0.0;
};

/// Tilting angles of the four rotor arms, radians.
using TiltAngles = Vec4;

/// Sign each rotor's signed square carries: rotors 1 and 3 spin negative.
inline const Vec4 kRotorSigns{-1.0, 1.0, -1.0, 1.0};

/// Rotor variables stored as signed squares w_i = speed_i * |speed_i|.
struct RotorState {
  Vec4 signed_squares = Vec4::Zero();

  Vec4 speeds() const;
  static RotorState from_speeds(const Vec4& speeds);
  /// Rotors with the conventional sign pattern, all spinning at |speed|.
  static RotorState uniform(double speed_magnitude);
  /// True when w1, w3 <= 0 and w2, w4 >= 0.
  bool sign_convention_holds() const;
};

struct RigidState {
  Vec3 position = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();
  Mat3 rotation = Mat3::Identity();
  Vec3 body_rates = Vec3::Zero();
  RotorState rotor;

  EulerAttitude attitude() const;
  void set_attitude(const EulerAttitude& att);
};

struct StateDerivative {
  Vec3 position_dot = Vec3::Zero();
  Vec3 velocity_dot = Vec3::Zero();
  Mat3 rotation_dot = Mat3::Zero();
  Vec3 body_rates_dot = Vec3::Zero();
  Vec4 signed_squares_dot = Vec4::Zero();
};

struct DynamicsOptions {
  /// Adds -I^-1 (w x I w) to the body-rate dynamics. Off reproduces the
  /// reference model, which omits the gyroscopic term.
  bool coriolis = false;
};

Mat3 rotation_matrix(const EulerAttitude& att);

/// Inverse of rotation_matrix for pitch inside (-pi/2, pi/2).
EulerAttitude euler_from_rotation(const Mat3& rotation);

Mat3 hat(const Vec3& v);

/// Body-frame force allocation F(alpha): force = F(alpha) * w.
Mat34 thrust_map(const TiltAngles& alpha, const VehicleParams& params);

/// Body-frame torque allocation tau(alpha): torque = tau(alpha) * w.
Mat34 torque_map(const TiltAngles& alpha, const VehicleParams& params);

/// Maps body rates to Euler angle rates at the given attitude.
Mat3 euler_rate_matrix(const EulerAttitude& att);

/// Newton-Euler derivative of the full state. `rotor_rates` is dw/dt.
/// Throws NumericalBlowup on non-finite input.
StateDerivative state_derivative(const RigidState& state, const TiltAngles& alpha,
                                 const Vec4& rotor_rates, const VehicleParams& params,
                                 const DynamicsOptions& options = {});

/// Modified Gram-Schmidt on the columns of `m`.
Mat3 reorthonormalize(const Mat3& m);

/// max |R^T R - I| over entries.
double orthonormality_error(const Mat3& rotation);

}  // namespace tiltgait
