#pragma once

#include <array>
#include <optional>
#include <string_view>

#include "tiltgait/gaits.hpp"
#include "tiltgait/rigidbody.hpp"
#include "tiltgait/singularity.hpp"

namespace tiltgait {

using Vec2 = Eigen::Vector2d;

struct ChannelGains {
  double kp = 16.0;  // s^-2
  double kd = 8.0;   // s^-1
};

/// Gains for the roll, pitch, yaw and altitude channels, in that order.
struct PdGains {
  std::array<ChannelGains, 4> channel{};

  static PdGains uniform(double kp, double kd);
  /// Throws std::invalid_argument on a negative gain.
  void validate() const;
};

/// Desired value, rate and acceleration of the four controlled outputs.
struct OutputReference {
  Vec4 value = Vec4::Zero();
  Vec4 rate = Vec4::Zero();
  Vec4 accel = Vec4::Zero();
};

/// accel_ref + kp * (value_ref - y) + kd * (rate_ref - y_dot), per channel.
Vec4 pd_outer(const OutputReference& ref, const Vec4& y, const Vec4& y_dot, const PdGains& gains);

/// Solves delta * w = desired_accel - drift for the rotor signed squares.
/// Throws SingularityError when |lin.condition| <= margin.
Vec4 feedback_linearize(const LinearizationData& lin, const Vec4& desired_accel,
                        double margin = kDefaultSingularityMargin);

/// Lateral body force (F_X, F_Y) produced by the minimum-norm rotor allocation
/// that lifts the vehicle's weight at tilt `alpha`.
/// Throws std::domain_error if the tilt leaves no vertical thrust.
Vec2 lateral_force(const TiltAngles& alpha, const VehicleParams& params);

/// Lateral body force under the torque-free hover allocation, the w solving
/// I^-1 tau(alpha) w = 0 and (1/m) [0 0 1] F(alpha) w = g.
/// Throws SingularityError if that allocation does not exist.
Vec2 lateral_force_torque_free(const TiltAngles& alpha, const VehicleParams& params);

enum class LateralAllocation { kMinimumNorm, kTorqueFree };
std::string_view to_string(LateralAllocation kind);
LateralAllocation parse_lateral_allocation(std::string_view text);

struct TiltCommand {
  double roll = 0.0;
  double pitch = 0.0;
};

/// Desired roll and pitch for horizontal accelerations (accel_x, accel_y) at
/// heading `yaw`, corrected by the lateral body force. Passing a zero force
/// gives the conventional quadrotor decoupler.
TiltCommand modified_decoupler(double accel_x, double accel_y, double yaw, const Vec2& force,
                               const VehicleParams& params);

enum class DecouplerKind { kConventional, kModified };

std::string_view to_string(DecouplerKind kind);
DecouplerKind parse_decoupler(std::string_view text);

struct ControllerConfig {
  PdGains attitude_gains = PdGains::uniform(16.0, 8.0);
  ChannelGains position_gains{1.0, 1.6};
  double tilt_limit = 0.4;  // rad, saturation on commanded roll and pitch
  DecouplerKind decoupler = DecouplerKind::kModified;
  LateralAllocation lateral_allocation = LateralAllocation::kMinimumNorm;
  /// Feed the time derivatives of the gait's lateral-force correction to the
  /// roll/pitch channels. The gait is known ahead, so they come from the schedule.
  bool gait_feedforward = true;
  double singularity_margin = kDefaultSingularityMargin;
  /// Lower bound on |w_i| (rad^2/s^2) for commanded rotor signed squares.
  double rotor_floor = 100.0;
  DynamicsOptions dynamics;

  void validate() const;
};

/// Position, velocity and acceleration of the tracked point; yaw and
/// altitude references come through `yaw` and `position.z()`.
struct PositionReference {
  Vec3 position = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();
  Vec3 accel = Vec3::Zero();
  double yaw = 0.0;
};

struct ControlOutputs {
  TiltAngles alpha = TiltAngles::Zero();
  Vec4 outputs = Vec4::Zero();        // roll, pitch, yaw, altitude
  Vec4 output_rates = Vec4::Zero();
  TiltCommand tilt_command;
  Vec4 desired_accel = Vec4::Zero();  // PD outer loop result
  Vec4 rotor_target = Vec4::Zero();   // signed squares, rad^2/s^2
  Vec4 rotor_rates = Vec4::Zero();    // U = dw/dt applied over the step, rad^2/s^3
  double condition = 0.0;
  bool held = false;                  // margin violated, previous command reused
};

/// Position -> decoupler -> attitude/altitude PD -> feedback linearization.
///
/// One instance per run. The rotor signed squares are commanded through their
/// rate: U = (target - w) / h reaches the target at the end of the step.
class TrackingController {
 public:
  TrackingController(ControllerConfig config, VehicleParams params);

  /// Control for time `t`; the tilt applied over the step is schedule.sample(t).
  ControlOutputs step(const RigidState& state, const GaitSchedule& schedule, double t,
                      const PositionReference& ref, double step_size);

  const ControllerConfig& config() const { return config_; }
  int held_steps() const { return held_steps_; }
  int consecutive_held_steps() const { return consecutive_held_; }

 private:
  // (roll, pitch) offset the modified decoupler adds for tilt `alpha`.
  Vec2 lateral_correction(const TiltAngles& alpha) const;

  ControllerConfig config_;
  VehicleParams params_;
  std::optional<Vec4> last_target_;
  int held_steps_ = 0;
  int consecutive_held_ = 0;
};

/// Applies the rotor sign convention and |w_i| >= floor to signed squares.
Vec4 clamp_rotor_signed_squares(const Vec4& w, double floor);

/// Wraps an angle into (-pi, pi].
double wrap_angle(double angle);

}  // namespace tiltgait
