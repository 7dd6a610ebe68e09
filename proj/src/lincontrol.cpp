#include "tiltgait/lincontrol.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace tiltgait {

PdGains PdGains::uniform(double kp, double kd) {
  PdGains g;
  g.channel.fill(ChannelGains{kp, kd});
  return g;
}

void PdGains::validate() const {
  for (const auto& c : channel) {
    if (!(c.kp >= 0.0) || !(c.kd >= 0.0)) throw std::invalid_argument("PD gains must be nonnegative");
  }
}

Vec4 pd_outer(const OutputReference& ref, const Vec4& y, const Vec4& y_dot, const PdGains& gains) {
  Vec4 out;
  for (int i = 0; i < 4; ++i) {
    out[i] = ref.accel[i] + gains.channel[i].kp * (ref.value[i] - y[i]) +
             gains.channel[i].kd * (ref.rate[i] - y_dot[i]);
  }
  return out;
}

Vec4 feedback_linearize(const LinearizationData& lin, const Vec4& desired_accel, double margin) {
  if (!(std::abs(lin.condition) > margin)) {
    throw SingularityError("decoupling matrix inside singularity margin (condition " +
                               std::to_string(lin.condition) + ")",
                           lin.condition);
  }
  const Vec4 rhs = desired_accel - lin.drift;
  const Eigen::FullPivLU<Mat4> lu(lin.delta);
  if (!lu.isInvertible()) throw SingularityError("decoupling matrix is rank deficient", lin.condition);
  Vec4 w = lu.solve(rhs);
  // one refinement pass; rows differ in scale by orders of magnitude
  w += lu.solve(rhs - lin.delta * w);
  return w;
}

Vec2 lateral_force(const TiltAngles& alpha, const VehicleParams& params) {
  const Mat34 f = thrust_map(alpha, params);
  const Eigen::RowVector4d vertical = f.row(2);
  const double norm2 = vertical.squaredNorm();
  if (!(std::sqrt(norm2) > 1e-9 * params.k_thrust)) {
    throw std::domain_error("tilt leaves no vertical thrust");
  }
  const Vec4 hover = vertical.transpose() * (params.mass * params.gravity / norm2);
  return f.topRows<2>() * hover;
}

Vec2 lateral_force_torque_free(const TiltAngles& alpha, const VehicleParams& params) {
  const Mat34 f = thrust_map(alpha, params);
  Mat4 a;
  a.topRows<3>() = params.inertia_diag.cwiseInverse().asDiagonal() * torque_map(alpha, params);
  a.row(3) = f.row(2) / params.mass;
  const Eigen::FullPivLU<Mat4> lu(a);
  if (!lu.isInvertible()) {
    throw SingularityError("no torque-free hover allocation at this tilt", 0.0);
  }
  const Vec4 hover = lu.solve(Vec4(0.0, 0.0, 0.0, params.gravity));
  return f.topRows<2>() * hover;
}

std::string_view to_string(LateralAllocation kind) {
  return kind == LateralAllocation::kMinimumNorm ? "min_norm" : "torque_free";
}

LateralAllocation parse_lateral_allocation(std::string_view text) {
  if (text == "min_norm") return LateralAllocation::kMinimumNorm;
  if (text == "torque_free") return LateralAllocation::kTorqueFree;
  throw std::invalid_argument("unknown lateral allocation: " + std::string(text));
}

TiltCommand modified_decoupler(double accel_x, double accel_y, double yaw, const Vec2& force,
                               const VehicleParams& params) {
  const double g = params.gravity;
  const double mg = params.mass * g;
  const double s = std::sin(yaw), c = std::cos(yaw);
  return TiltCommand{(accel_x * s - accel_y * c) / g + force.y() / mg,
                     (accel_x * c + accel_y * s) / g - force.x() / mg};
}

std::string_view to_string(DecouplerKind kind) {
  return kind == DecouplerKind::kModified ? "modified" : "conventional";
}

DecouplerKind parse_decoupler(std::string_view text) {
  if (text == "modified") return DecouplerKind::kModified;
  if (text == "conventional") return DecouplerKind::kConventional;
  throw std::invalid_argument("unknown decoupler: " + std::string(text));
}

void ControllerConfig::validate() const {
  attitude_gains.validate();
  if (!(position_gains.kp >= 0.0) || !(position_gains.kd >= 0.0)) {
    throw std::invalid_argument("position gains must be nonnegative");
  }
  if (!(tilt_limit > 0.0 && tilt_limit < std::numbers::pi / 2.0)) {
    throw std::invalid_argument("tilt_limit must lie in (0, pi/2)");
  }
  if (!(singularity_margin >= 0.0)) throw std::invalid_argument("singularity margin must be >= 0");
  if (!(rotor_floor > 0.0)) throw std::invalid_argument("rotor floor must be positive");
}

double wrap_angle(double angle) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  double a = std::remainder(angle, kTwoPi);
  if (a <= -std::numbers::pi) a += kTwoPi;
  return a;
}

Vec4 clamp_rotor_signed_squares(const Vec4& w, double floor) {
  Vec4 out;
  for (int i = 0; i < 4; ++i) out[i] = kRotorSigns[i] * std::max(kRotorSigns[i] * w[i], floor);
  return out;
}

TrackingController::TrackingController(ControllerConfig config, VehicleParams params)
    : config_(std::move(config)), params_(std::move(params)) {
  config_.validate();
  params_.validate();
}

Vec2 TrackingController::lateral_correction(const TiltAngles& alpha) const {
  if (config_.decoupler == DecouplerKind::kConventional) return Vec2::Zero();
  const Vec2 force = config_.lateral_allocation == LateralAllocation::kMinimumNorm
                         ? lateral_force(alpha, params_)
                         : lateral_force_torque_free(alpha, params_);
  const double mg = params_.mass * params_.gravity;
  return Vec2(force.y() / mg, -force.x() / mg);
}

ControlOutputs TrackingController::step(const RigidState& state, const GaitSchedule& schedule,
                                        double t, const PositionReference& ref,
                                        double step_size) {
  ControlOutputs out;
  out.alpha = schedule.sample(t);
  const EulerAttitude att = state.attitude();
  const Vec3 euler_rates = euler_rate_matrix(att) * state.body_rates;
  out.outputs << att.roll, att.pitch, att.yaw, state.position.z();
  out.output_rates << euler_rates, state.velocity.z();

  const auto& pg = config_.position_gains;
  const double ax = ref.accel.x() + pg.kp * (ref.position.x() - state.position.x()) +
                    pg.kd * (ref.velocity.x() - state.velocity.x());
  const double ay = ref.accel.y() + pg.kp * (ref.position.y() - state.position.y()) +
                    pg.kd * (ref.velocity.y() - state.velocity.y());
  const TiltCommand base = modified_decoupler(ax, ay, att.yaw, Vec2::Zero(), params_);
  const Vec2 correction = lateral_correction(out.alpha);
  TiltCommand cmd{base.roll + correction.x(), base.pitch + correction.y()};

  Vec2 ff_rate = Vec2::Zero();
  Vec2 ff_accel = Vec2::Zero();
  if (config_.gait_feedforward && config_.decoupler == DecouplerKind::kModified) {
    // central differences of the correction along the planned gait
    const double dt = step_size;
    const Vec2 before = lateral_correction(schedule.sample(std::max(0.0, t - dt)));
    const Vec2 after = lateral_correction(schedule.sample(t + dt));
    const double span = t >= dt ? 2.0 * dt : dt + t;
    ff_rate = (after - before) / span;
    if (t >= dt) ff_accel = (after - 2.0 * correction + before) / (dt * dt);
  }
  const double lim = config_.tilt_limit;
  if (std::abs(cmd.roll) > lim) {
    cmd.roll = std::clamp(cmd.roll, -lim, lim);
    ff_rate.x() = ff_accel.x() = 0.0;
  }
  if (std::abs(cmd.pitch) > lim) {
    cmd.pitch = std::clamp(cmd.pitch, -lim, lim);
    ff_rate.y() = ff_accel.y() = 0.0;
  }
  out.tilt_command = cmd;

  OutputReference target;
  target.value << cmd.roll, cmd.pitch, ref.yaw, ref.position.z();
  target.rate << ff_rate, 0.0, ref.velocity.z();
  target.accel << ff_accel, 0.0, ref.accel.z();
  // measure yaw on the branch nearest the reference
  Vec4 measured = out.outputs;
  measured[2] = ref.yaw - wrap_angle(ref.yaw - att.yaw);
  out.desired_accel = pd_outer(target, measured, out.output_rates, config_.attitude_gains);

  const LinearizationData lin = decoupling_matrix(state, out.alpha, params_, config_.dynamics);
  out.condition = lin.condition;
  try {
    out.rotor_target = clamp_rotor_signed_squares(
        feedback_linearize(lin, out.desired_accel, config_.singularity_margin), config_.rotor_floor);
    consecutive_held_ = 0;
  } catch (const SingularityError&) {
    out.held = true;
    ++held_steps_;
    ++consecutive_held_;
    out.rotor_target = last_target_.value_or(state.rotor.signed_squares);
  }
  last_target_ = out.rotor_target;
  out.rotor_rates = (out.rotor_target - state.rotor.signed_squares) / step_size;
  return out;
}

}  // namespace tiltgait
