#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "tiltgait/gaits.hpp"
#include "tiltgait/lincontrol.hpp"
#include "tiltgait/rigidbody.hpp"
#include "tiltgait/singularity.hpp"

namespace tiltgait {

/// A derivative evaluated to a non-finite value during integration.
class IntegrationBlowup : public std::runtime_error {
 public:
  IntegrationBlowup(const std::string& what, double time)
      : std::runtime_error(what + " at t = " + std::to_string(time)), time_(time) {}
  double time() const { return time_; }

 private:
  double time_;
};

/// One fixed step of the Bogacki-Shampine third-order rule:
///   k1 = f(t, y), k2 = f(t + h/2, y + h/2 k1), k3 = f(t + 3h/4, y + 3h/4 k2),
///   y+ = y + h (2/9 k1 + 1/3 k2 + 4/9 k3).
/// `Vec` is any Eigen vector; `f(t, y)` returns its derivative.
template <class Vec, class Deriv>
Vec ode3_step(Deriv&& f, const Vec& y, double t, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("ode3 step must be positive");
  auto checked = [&](double tau, const Vec& x) {
    Vec d = f(tau, x);
    if (!d.allFinite()) throw IntegrationBlowup("non-finite derivative", tau);
    return d;
  };
  const Vec k1 = checked(t, y);
  const Vec k2 = checked(t + 0.5 * h, Vec(y + (0.5 * h) * k1));
  const Vec k3 = checked(t + 0.75 * h, Vec(y + (0.75 * h) * k2));
  return y + h * ((2.0 / 9.0) * k1 + (1.0 / 3.0) * k2 + (4.0 / 9.0) * k3);
}

/// Flattened rigid state for the integrator: p, v, R (column-major), omega, w.
using PackedState = Eigen::Matrix<double, 22, 1>;
PackedState pack(const RigidState& s);
RigidState unpack(const PackedState& y);
PackedState pack(const StateDerivative& d);

enum class ReferenceKind { kHover, kRectilinear, kCircular };
std::string_view to_string(ReferenceKind kind);
ReferenceKind parse_reference(std::string_view text);

struct ReferenceTrajectory {
  ReferenceKind kind = ReferenceKind::kCircular;
  /// Rectilinear only: false tracks X = Y = 1.5 t, true keeps Y = 0.
  bool rectilinear_y_zero = false;

  PositionReference at(double t) const;
};

struct ExperimentConfig {
  std::string gait = "walk";  // built-in name or gait file path
  int scale = 1;
  double period = 1.0;        // s
  ReferenceTrajectory reference;
  double duration = 60.0;     // s
  double settle_time = 20.0;  // s
  double initial_rotor_speed = 300.0;  // rad/s
  double step = 1e-3;         // s
  VehicleParams vehicle;
  ControllerConfig controller;
  /// Refuse gaits whose scaled schedule violates the singularity margin over
  /// the attitude box the tilt limit allows.
  bool enforce_gait_margin = true;
  /// Consecutive held control steps after which the run is abandoned.
  int max_held_steps = 500;
  /// Position error beyond which the run counts as diverged, m.
  double divergence_error = 1e3;
  /// Uniform initial position offset in [-noise, noise] per axis, seeded.
  double initial_position_noise = 0.0;
  std::uint64_t seed = 0;
  /// Keep the full per-step log in the result.
  bool keep_log = true;

  void validate() const;
  std::string run_id() const;
};

struct LogRow {
  double t = 0.0;
  Vec3 position, velocity;
  EulerAttitude attitude;
  Vec3 body_rates;
  TiltAngles alpha;
  Vec4 rotor_speeds;
  Vec4 rotor_rates;  // U
  Vec4 desired_accel;
  double condition = 0.0;
  Vec3 reference;
  bool held = false;
};

struct RunLog {
  std::vector<LogRow> rows;
};

enum class RunStatus { kOk, kDegraded, kDiverged, kSingular, kSingularGait };
std::string_view to_string(RunStatus status);

struct TrackingMetrics {
  RunStatus status = RunStatus::kOk;
  std::string diagnostic;
  double sup_error = 0.0;             // m
  Vec3 sup_axis_error = Vec3::Zero(); // m
  bool degraded = false;
  int held_steps = 0;
  double gait_condition = 0.0;        // worst |condition| of the gait over the tilt box
  double max_orthonormality_error = 0.0;
  bool rotor_signs_held = true;
  double mean_rotor_speed = 0.0;      // mean |speed| over the metric window, rad/s
  double final_time = 0.0;
  std::shared_ptr<const RunLog> log;

  bool completed() const { return status == RunStatus::kOk || status == RunStatus::kDegraded; }
};

/// Max over rows with t >= settle_time of the Euclidean position error.
/// Throws std::invalid_argument if no row falls in the window.
double sup_error(const RunLog& log, double settle_time);
Vec3 sup_axis_error(const RunLog& log, double settle_time);

/// Closed-loop simulation of one configuration. Never throws for a failing
/// run; failures are reported through TrackingMetrics::status.
TrackingMetrics run_experiment(const ExperimentConfig& cfg);

/// Called on the worker thread as soon as run `index` finishes; may run
/// concurrently with other calls. It may consume or drop `metrics.log`.
using BatchCallback = std::function<void(std::size_t index, TrackingMetrics& metrics)>;

/// Runs the configurations on `workers` threads; results keep input order.
/// The first exception raised by a run or callback is rethrown after all finish.
std::vector<TrackingMetrics> run_batch(const std::vector<ExperimentConfig>& configs, int workers,
                                       const BatchCallback& on_done = {});

void write_log_csv(const RunLog& log, std::ostream& out);
std::string log_csv_header();

/// Structured text (JSON) record: config echo and all metrics.
std::string metrics_record(const ExperimentConfig& cfg, const TrackingMetrics& metrics);

}  // namespace tiltgait
