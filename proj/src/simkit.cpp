#include "tiltgait/simkit.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <random>
#include <thread>

#include <nlohmann/json.hpp>

namespace tiltgait {

PackedState pack(const RigidState& s) {
  PackedState y;
  y << s.position, s.velocity, s.rotation.reshaped(), s.body_rates, s.rotor.signed_squares;
  return y;
}

RigidState unpack(const PackedState& y) {
  RigidState s;
  s.position = y.segment<3>(0);
  s.velocity = y.segment<3>(3);
  s.rotation = y.segment<9>(6).reshaped(3, 3);
  s.body_rates = y.segment<3>(15);
  s.rotor.signed_squares = y.segment<4>(18);
  return s;
}

PackedState pack(const StateDerivative& d) {
  PackedState y;
  y << d.position_dot, d.velocity_dot, d.rotation_dot.reshaped(), d.body_rates_dot,
      d.signed_squares_dot;
  return y;
}

std::string_view to_string(ReferenceKind kind) {
  switch (kind) {
    case ReferenceKind::kHover: return "hover";
    case ReferenceKind::kRectilinear: return "rectilinear";
    case ReferenceKind::kCircular: return "circular";
  }
  return "?";
}

ReferenceKind parse_reference(std::string_view text) {
  if (text == "hover") return ReferenceKind::kHover;
  if (text == "rectilinear") return ReferenceKind::kRectilinear;
  if (text == "circular") return ReferenceKind::kCircular;
  throw std::invalid_argument("unknown reference: " + std::string(text));
}

PositionReference ReferenceTrajectory::at(double t) const {
  PositionReference r;
  switch (kind) {
    case ReferenceKind::kHover:
      break;
    case ReferenceKind::kRectilinear: {
      const double vy = rectilinear_y_zero ? 0.0 : 1.5;
      r.position = Vec3(1.5 * t, vy * t, 0.0);
      r.velocity = Vec3(1.5, vy, 0.0);
      break;
    }
    case ReferenceKind::kCircular: {
      constexpr double kRadius = 5.0, kRate = 0.1;
      const double c = std::cos(kRate * t), s = std::sin(kRate * t);
      r.position = Vec3(kRadius * c, kRadius * s, 0.0);
      r.velocity = Vec3(-kRadius * kRate * s, kRadius * kRate * c, 0.0);
      r.accel = Vec3(-kRadius * kRate * kRate * c, -kRadius * kRate * kRate * s, 0.0);
      break;
    }
  }
  return r;
}

void ExperimentConfig::validate() const {
  if (!(step > 0.0)) throw std::invalid_argument("integrator step must be positive");
  if (!(settle_time > 0.0)) throw std::invalid_argument("settle_time must be positive");
  if (!(duration > settle_time)) throw std::invalid_argument("duration must exceed settle_time");
  if (!(period > 0.0)) throw std::invalid_argument("gait period must be positive");
  if (scale < 1) throw std::invalid_argument("gait scale must be >= 1");
  if (!(initial_rotor_speed > 0.0)) throw std::invalid_argument("initial rotor speed must be positive");
  if (max_held_steps < 1) throw std::invalid_argument("max_held_steps must be >= 1");
  if (!(initial_position_noise >= 0.0)) throw std::invalid_argument("position noise must be >= 0");
  vehicle.validate();
  controller.validate();
}

std::string ExperimentConfig::run_id() const {
  std::string g = gait;
  if (const auto slash = g.find_last_of('/'); slash != std::string::npos) g = g.substr(slash + 1);
  char buf[64];
  std::snprintf(buf, sizeof buf, "-n%d-T%g-", scale, period);
  return g + buf + std::string(to_string(controller.decoupler)) + "-" +
         std::string(to_string(reference.kind));
}

std::string_view to_string(RunStatus status) {
  switch (status) {
    case RunStatus::kOk: return "ok";
    case RunStatus::kDegraded: return "degraded";
    case RunStatus::kDiverged: return "diverged";
    case RunStatus::kSingular: return "singular";
    case RunStatus::kSingularGait: return "singular_gait";
  }
  return "?";
}

namespace {

std::size_t first_in_window(const RunLog& log, double settle_time) {
  const auto it = std::lower_bound(log.rows.begin(), log.rows.end(), settle_time,
                                   [](const LogRow& r, double t) { return r.t < t; });
  if (it == log.rows.end()) throw std::invalid_argument("no log rows after settle_time");
  return static_cast<std::size_t>(it - log.rows.begin());
}

}  // namespace

double sup_error(const RunLog& log, double settle_time) {
  double best = 0.0;
  for (std::size_t i = first_in_window(log, settle_time); i < log.rows.size(); ++i) {
    best = std::max(best, (log.rows[i].position - log.rows[i].reference).norm());
  }
  return best;
}

Vec3 sup_axis_error(const RunLog& log, double settle_time) {
  Vec3 best = Vec3::Zero();
  for (std::size_t i = first_in_window(log, settle_time); i < log.rows.size(); ++i) {
    best = best.cwiseMax((log.rows[i].position - log.rows[i].reference).cwiseAbs());
  }
  return best;
}

TrackingMetrics run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto waveform = resolve_gait(cfg.gait);
  const GaitSchedule schedule(waveform, cfg.period, cfg.scale);

  TrackingMetrics m;
  const double limit = cfg.controller.tilt_limit;
  m.gait_condition = worst_condition(*waveform, cfg.scale, AttitudeBox{limit, limit});
  if (cfg.enforce_gait_margin && !(m.gait_condition > cfg.controller.singularity_margin)) {
    m.status = RunStatus::kSingularGait;
    char buf[200];
    std::snprintf(buf, sizeof buf,
                  "gait violates singularity margin %g over attitude box +/-%g rad "
                  "(worst |condition| %.6g); increase the scale",
                  cfg.controller.singularity_margin, limit, m.gait_condition);
    m.diagnostic = buf;
    return m;
  }

  auto log = std::make_shared<RunLog>();
  const auto steps = static_cast<long>(std::llround(cfg.duration / cfg.step));
  if (cfg.keep_log) log->rows.reserve(static_cast<std::size_t>(steps) + 1);

  RigidState state;
  const PositionReference ref0 = cfg.reference.at(0.0);
  state.position = ref0.position;
  state.velocity = ref0.velocity;
  state.rotor = RotorState::uniform(cfg.initial_rotor_speed);
  if (cfg.initial_position_noise > 0.0) {
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> noise(-cfg.initial_position_noise,
                                                 cfg.initial_position_noise);
    for (int i = 0; i < 3; ++i) state.position[i] += noise(rng);
  }

  TrackingController controller(cfg.controller, cfg.vehicle);
  const DynamicsOptions dyn = cfg.controller.dynamics;
  double speed_sum = 0.0;
  long speed_count = 0;

  auto fail = [&](RunStatus status, const std::string& why, double t) {
    m.status = status;
    m.diagnostic = why;
    m.final_time = t;
  };

  for (long k = 0; k <= steps; ++k) {
    const double t = static_cast<double>(k) * cfg.step;
    const PositionReference ref = cfg.reference.at(t);
    ControlOutputs ctl;
    try {
      ctl = controller.step(state, schedule, t, ref, cfg.step);
    } catch (const std::exception& e) {
      fail(RunStatus::kDiverged, std::string("controller failed: ") + e.what(), t);
      break;
    }
    const TiltAngles& alpha = ctl.alpha;
    const EulerAttitude att = state.attitude();
    const Vec3 error = state.position - ref.position;
    if (!state.rotor.sign_convention_holds()) m.rotor_signs_held = false;

    if (cfg.keep_log) {
      LogRow row;
      row.t = t;
      row.position = state.position;
      row.velocity = state.velocity;
      row.attitude = att;
      row.body_rates = state.body_rates;
      row.alpha = alpha;
      row.rotor_speeds = state.rotor.speeds();
      row.rotor_rates = ctl.rotor_rates;
      row.desired_accel = ctl.desired_accel;
      row.condition = ctl.condition;
      row.reference = ref.position;
      row.held = ctl.held;
      log->rows.push_back(row);
    }
    if (t >= cfg.settle_time) {
      m.sup_error = std::max(m.sup_error, error.norm());
      m.sup_axis_error = m.sup_axis_error.cwiseMax(error.cwiseAbs());
      speed_sum += state.rotor.speeds().cwiseAbs().mean();
      ++speed_count;
    }
    m.final_time = t;

    if (controller.consecutive_held_steps() > cfg.max_held_steps) {
      fail(RunStatus::kSingular, "decoupling matrix stayed inside the singularity margin for " +
                                     std::to_string(controller.consecutive_held_steps()) + " steps",
           t);
      break;
    }
    if (!(error.norm() < cfg.divergence_error)) {
      fail(RunStatus::kDiverged, "position error exceeded divergence bound", t);
      break;
    }
    if (k == steps) break;

    auto deriv = [&](double, const PackedState& y) {
      return pack(state_derivative(unpack(y), alpha, ctl.rotor_rates, cfg.vehicle, dyn));
    };
    try {
      state = unpack(ode3_step(deriv, pack(state), t, cfg.step));
    } catch (const std::exception& e) {
      fail(RunStatus::kDiverged, e.what(), t);
      break;
    }
    state.rotation = reorthonormalize(state.rotation);
    state.rotor.signed_squares =
        clamp_rotor_signed_squares(state.rotor.signed_squares, cfg.controller.rotor_floor);
    m.max_orthonormality_error =
        std::max(m.max_orthonormality_error, orthonormality_error(state.rotation));
    const EulerAttitude next = state.attitude();
    if (!(std::abs(next.roll) < std::numbers::pi / 2.0 &&
          std::abs(next.pitch) < std::numbers::pi / 2.0 - 1e-9)) {
      fail(RunStatus::kDiverged, "attitude left the roll/pitch range (-pi/2, pi/2)", t + cfg.step);
      break;
    }
  }

  m.held_steps = controller.held_steps();
  m.degraded = m.held_steps > 0;
  if (m.status == RunStatus::kOk && m.degraded) m.status = RunStatus::kDegraded;
  if (speed_count > 0) m.mean_rotor_speed = speed_sum / static_cast<double>(speed_count);
  if (cfg.keep_log) m.log = std::move(log);
  return m;
}

std::vector<TrackingMetrics> run_batch(const std::vector<ExperimentConfig>& configs, int workers,
                                       const BatchCallback& on_done) {
  std::vector<TrackingMetrics> results(configs.size());
  std::vector<std::exception_ptr> errors(configs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < configs.size(); i = next++) {
      try {
        results[i] = run_experiment(configs[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
      if (on_done && !errors[i]) {
        try {
          on_done(i, results[i]);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    }
  };
  const int n = std::max(1, std::min<int>(workers, static_cast<int>(configs.size())));
  {
    std::vector<std::jthread> pool;
    for (int i = 1; i < n; ++i) pool.emplace_back(worker);
    worker();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return results;
}

std::string log_csv_header() {
  return "t,px,py,pz,vx,vy,vz,roll,pitch,yaw,p,q,r,alpha1,alpha2,alpha3,alpha4,"
         "speed1,speed2,speed3,speed4,u1,u2,u3,u4,ydd1,ydd2,ydd3,ydd4,condition,"
         "ref_x,ref_y,ref_z,held";
}

void write_log_csv(const RunLog& log, std::ostream& out) {
  out << log_csv_header() << '\n';
  std::string line;
  char buf[32];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g,", v);
    line += buf;
  };
  for (const auto& r : log.rows) {
    line.clear();
    put(r.t);
    for (int i = 0; i < 3; ++i) put(r.position[i]);
    for (int i = 0; i < 3; ++i) put(r.velocity[i]);
    put(r.attitude.roll);
    put(r.attitude.pitch);
    put(r.attitude.yaw);
    for (int i = 0; i < 3; ++i) put(r.body_rates[i]);
    for (int i = 0; i < 4; ++i) put(r.alpha[i]);
    for (int i = 0; i < 4; ++i) put(r.rotor_speeds[i]);
    for (int i = 0; i < 4; ++i) put(r.rotor_rates[i]);
    for (int i = 0; i < 4; ++i) put(r.desired_accel[i]);
    put(r.condition);
    for (int i = 0; i < 3; ++i) put(r.reference[i]);
    line += r.held ? "1\n" : "0\n";
    out << line;
  }
}

std::string metrics_record(const ExperimentConfig& cfg, const TrackingMetrics& m) {
  nlohmann::ordered_json j;
  j["run_id"] = cfg.run_id();
  j["config"] = {
      {"gait", cfg.gait},
      {"scale", cfg.scale},
      {"period", cfg.period},
      {"decoupler", to_string(cfg.controller.decoupler)},
      {"reference", to_string(cfg.reference.kind)},
      {"rectilinear_y", cfg.reference.rectilinear_y_zero ? "zero" : "diagonal"},
      {"duration", cfg.duration},
      {"settle_time", cfg.settle_time},
      {"step", cfg.step},
      {"initial_rotor_speed", cfg.initial_rotor_speed},
      {"seed", cfg.seed},
  };
  j["status"] = to_string(m.status);
  if (!m.diagnostic.empty()) j["diagnostic"] = m.diagnostic;
  j["sup_error"] = m.sup_error;
  j["sup_error_x"] = m.sup_axis_error.x();
  j["sup_error_y"] = m.sup_axis_error.y();
  j["sup_error_z"] = m.sup_axis_error.z();
  j["degraded"] = m.degraded;
  j["held_steps"] = m.held_steps;
  j["gait_condition"] = m.gait_condition;
  j["max_orthonormality_error"] = m.max_orthonormality_error;
  j["rotor_signs_held"] = m.rotor_signs_held;
  j["mean_rotor_speed"] = m.mean_rotor_speed;
  j["final_time"] = m.final_time;
  return j.dump(2) + "\n";
}

}  // namespace tiltgait
