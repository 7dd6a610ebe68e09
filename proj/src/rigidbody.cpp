#include "tiltgait/rigidbody.hpp"

#include <algorithm>
#include <cmath>

namespace tiltgait {

void VehicleParams::validate() const {
  auto require = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw std::invalid_argument(std::string("vehicle parameter must be positive: ") + name);
    }
  };
  require(mass, "mass");
  require(arm_length, "arm_length");
  require(k_thrust, "k_thrust");
  require(k_drag, "k_drag");
  require(inertia_diag.x(), "inertia_xx");
  require(inertia_diag.y(), "inertia_yy");
  require(inertia_diag.z(), "inertia_zz");
  require(gravity, "gravity");
}

Vec4 RotorState::speeds() const {
  Vec4 out;
  for (int i = 0; i < 4; ++i) {
    const double w = signed_squares[i];
    out[i] = std::copysign(std::sqrt(std::abs(w)), w);
  }
  return out;
}

RotorState RotorState::from_speeds(const Vec4& speeds) {
  RotorState r;
  r.signed_squares = speeds.cwiseProduct(speeds.cwiseAbs());
  return r;
}

RotorState RotorState::uniform(double speed_magnitude) {
  return from_speeds(kRotorSigns * std::abs(speed_magnitude));
}

bool RotorState::sign_convention_holds() const {
  return signed_squares[0] <= 0.0 && signed_squares[1] >= 0.0 && signed_squares[2] <= 0.0 &&
         signed_squares[3] >= 0.0;
}

EulerAttitude RigidState::attitude() const { return euler_from_rotation(rotation); }

void RigidState::set_attitude(const EulerAttitude& att) { rotation = rotation_matrix(att); }

Mat3 rotation_matrix(const EulerAttitude& att) {
  const double sf = std::sin(att.roll), cf = std::cos(att.roll);
  const double st = std::sin(att.pitch), ct = std::cos(att.pitch);
  const double sp = std::sin(att.yaw), cp = std::cos(att.yaw);
  Mat3 r;
  r << ct * cp, sf * st * cp - cf * sp, cf * st * cp + sf * sp,
       ct * sp, sf * st * sp + cf * cp, cf * st * sp - sf * cp,
       -st, sf * ct, cf * ct;
  return r;
}

EulerAttitude euler_from_rotation(const Mat3& r) {
  EulerAttitude att;
  att.roll = std::atan2(r(2, 1), r(2, 2));
  att.pitch = -std::asin(std::clamp(r(2, 0), -1.0, 1.0));
  att.yaw = std::atan2(r(1, 0), r(0, 0));
  return att;
}

Mat3 hat(const Vec3& v) {
  Mat3 m;
  m << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
       -v.y(), v.x(), 0.0;
  return m;
}

Mat34 thrust_map(const TiltAngles& alpha, const VehicleParams& params) {
  const Vec4 s = alpha.array().sin();
  const Vec4 c = alpha.array().cos();
  Mat34 f;
  f << 0.0, s[1], 0.0, -s[3],
       s[0], 0.0, -s[2], 0.0,
       -c[0], c[1], -c[2], c[3];
  return params.k_thrust * f;
}

Mat34 torque_map(const TiltAngles& alpha, const VehicleParams& params) {
  const Vec4 s = alpha.array().sin();
  const Vec4 c = alpha.array().cos();
  const double lk = params.arm_length * params.k_thrust;
  const double km = params.k_drag;
  Mat34 t;
  t << 0.0, lk * c[1] - km * s[1], 0.0, -lk * c[3] + km * s[3],
       lk * c[0] + km * s[0], 0.0, -lk * c[2] - km * s[2], 0.0,
       lk * s[0] - km * c[0], -lk * s[1] - km * c[1], lk * s[2] - km * c[2], -lk * s[3] - km * c[3];
  return t;
}

Mat3 euler_rate_matrix(const EulerAttitude& att) {
  const double sf = std::sin(att.roll), cf = std::cos(att.roll);
  const double ct = std::cos(att.pitch), tt = std::tan(att.pitch);
  Mat3 e;
  e << 1.0, sf * tt, cf * tt,
       0.0, cf, -sf,
       0.0, sf / ct, cf / ct;
  return e;
}

StateDerivative state_derivative(const RigidState& state, const TiltAngles& alpha,
                                 const Vec4& rotor_rates, const VehicleParams& params,
                                 const DynamicsOptions& options) {
  const bool finite = state.position.allFinite() && state.velocity.allFinite() &&
                      state.rotation.allFinite() && state.body_rates.allFinite() &&
                      state.rotor.signed_squares.allFinite() && alpha.allFinite() &&
                      rotor_rates.allFinite();
  if (!finite) throw NumericalBlowup("state derivative requested at a non-finite state");

  const Vec4& w = state.rotor.signed_squares;
  StateDerivative d;
  d.position_dot = state.velocity;
  d.velocity_dot = Vec3(0.0, 0.0, -params.gravity) +
                   state.rotation * (thrust_map(alpha, params) * w) / params.mass;
  d.rotation_dot = state.rotation * hat(state.body_rates);
  const Vec3 torque = torque_map(alpha, params) * w;
  d.body_rates_dot = torque.cwiseQuotient(params.inertia_diag);
  if (options.coriolis) {
    const Vec3& om = state.body_rates;
    d.body_rates_dot -= om.cross(params.inertia_diag.cwiseProduct(om)).cwiseQuotient(params.inertia_diag);
  }
  d.signed_squares_dot = rotor_rates;
  return d;
}

Mat3 reorthonormalize(const Mat3& m) {
  Mat3 q = m;
  for (int j = 0; j < 3; ++j) {
    for (int k = 0; k < j; ++k) q.col(j) -= q.col(k).dot(q.col(j)) * q.col(k);
    q.col(j).normalize();
  }
  return q;
}

double orthonormality_error(const Mat3& rotation) {
  return (rotation.transpose() * rotation - Mat3::Identity()).cwiseAbs().maxCoeff();
}

}  // namespace tiltgait
