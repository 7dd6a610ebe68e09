// Acceptance checks 1-9. Prints one PASS/FAIL line per criterion and exits
// nonzero if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <string>
#include <thread>

#include "test_support.hpp"
#include "tiltgait/config.hpp"
#include "tiltgait/gaits.hpp"
#include "tiltgait/lincontrol.hpp"
#include "tiltgait/simkit.hpp"
#include "tiltgait/singularity.hpp"

using namespace tiltgait;
using tiltgait::test::uniform;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  const char* title;
  double budget_s;  // 0: no runtime bound
  std::function<Outcome()> check;
};

std::string format(const char* fmt, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, fmt, args...);
  return buf;
}

Outcome condition_values() {
  const LocusGrid grid;
  double worst = 0.0;
  const double h = 2.0 * grid.roll_max / (grid.resolution - 1);
  for (int i = 0; i < grid.resolution; ++i) {
    for (int j = 0; j < grid.resolution; ++j) {
      const double r = -grid.roll_max + i * h, q = -grid.pitch_max + j * h;
      worst = std::max(worst, std::abs(exact_condition(TiltAngles::Zero(), r, q) -
                                       4.0 * std::cos(r) * std::cos(q)));
    }
  }
  const double a0 = approx_condition(TiltAngles::Zero());
  return {worst <= 1e-12 && a0 == 4.0,
          format("max |exact - 4 cos cos| = %.2e on 201x201, approx(0) = %.4f", worst, a0)};
}

Outcome determinant_equivalence() {
  const VehicleParams p;
  std::mt19937_64 rng(2024);
  int agree = 0, checked = 0, near_band = 0, near_mismatch = 0;
  for (int i = 0; i < 10000; ++i) {
    RigidState s;
    s.set_attitude({uniform(rng, -1.2, 1.2), uniform(rng, -1.2, 1.2), 0.0});
    s.rotor = test::random_rotor(rng, 100.0, 500.0);
    const TiltAngles a = test::random_tilt(rng, std::numbers::pi / 2);
    const auto lin = decoupling_matrix(s, a, p);
    const bool same = (lin.delta.determinant() > 0) == (lin.condition > 0);
    if (std::abs(lin.condition) > 0.01) {
      ++checked;
      agree += same;
    } else {
      ++near_band;
      near_mismatch += !same;
    }
  }
  return {agree == checked,
          format("%d/%d signs agree; near-zero band: %d samples, %d sign discrepancies", agree, checked,
                 near_band, near_mismatch)};
}

Outcome minimum_safe_scale() {
  std::map<std::string, int> n;
  for (const auto& g : builtin_gait_names()) n[g] = min_scale(*builtin_gait(g), AttitudeBox{0.3, 0.3});
  const bool ok = n["run"] == 1 && n["walk"] <= 3 && n["transverse_gallop"] <= 3 && n["rotary_gallop"] <= 3;
  return {ok, format("min_scale: walk %d, run %d, transverse_gallop %d, rotary_gallop %d", n["walk"], n["run"],
                     n["transverse_gallop"], n["rotary_gallop"])};
}

Outcome locus_enlargement() {
  bool ok = true;
  std::string detail;
  for (const char* g : {"walk", "transverse_gallop", "rotary_gallop"}) {
    const auto w = builtin_gait(g);
    const TiltAngles a = w->evaluate(max_amplitude_phase(*w));
    double d[3];
    for (int n = 1; n <= 3; ++n) d[n - 1] = locus_sweep(a / static_cast<double>(n)).min_distance();
    ok = ok && d[0] < d[1] && d[1] < d[2];
    detail += format("%s %.3f/%.3f/%.3f; ", g, d[0], d[1], d[2]);
  }
  return {ok, detail + "(inf = empty locus)"};
}

Outcome closure() {
  const VehicleParams p;
  std::mt19937_64 rng(99);
  double worst = 0.0;
  int done = 0;
  while (done < 1000) {
    RigidState s;
    s.set_attitude({uniform(rng, -1.0, 1.0), uniform(rng, -1.0, 1.0), uniform(rng, -3.0, 3.0)});
    s.body_rates = Vec3(uniform(rng, -2, 2), uniform(rng, -2, 2), uniform(rng, -2, 2));
    s.rotor = test::random_rotor(rng);
    const TiltAngles a = test::random_tilt(rng, 1.0);
    const auto lin = decoupling_matrix(s, a, p);
    if (std::abs(lin.condition) <= kDefaultSingularityMargin) continue;
    const Vec4 yd(uniform(rng, -5, 5), uniform(rng, -5, 5), uniform(rng, -5, 5), uniform(rng, -5, 5));
    RigidState applied = s;
    applied.rotor.signed_squares = feedback_linearize(lin, yd);
    const auto d = state_derivative(applied, a, Vec4::Zero(), p);
    const Mat3 rd = s.rotation * hat(s.body_rates);
    const Mat3 rdd = rd * hat(s.body_rates) + s.rotation * hat(d.body_rates_dot);
    Vec4 measured;
    measured << test::euler_accel_from_rotation(s.rotation, rd, rdd), d.velocity_dot.z();
    worst = std::max(worst, (measured - yd).cwiseAbs().maxCoeff());
    ++done;
  }
  return {worst <= 1e-8, format("max |measured - desired| = %.2e over 1000 states", worst)};
}

struct SweepResult {
  std::vector<ExperimentConfig> configs;
  std::vector<TrackingMetrics> metrics;
  double seconds = 0.0;
};

const SweepResult& full_sweep() {
  static const SweepResult result = [] {
    SweepResult r;
    SweepConfig cfg;
    r.configs = cfg.expand();
    for (auto& c : r.configs) c.keep_log = false;
    const auto t0 = std::chrono::steady_clock::now();
    r.metrics = run_batch(r.configs, static_cast<int>(std::max(1u, std::thread::hardware_concurrency())));
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
  }();
  return result;
}

Outcome decoupler_superiority() {
  const auto& s = full_sweep();
  std::map<std::string, std::map<DecouplerKind, const TrackingMetrics*>> cells;
  for (std::size_t i = 0; i < s.configs.size(); ++i) {
    const auto& c = s.configs[i];
    cells[c.gait + format("/T%g/", c.period) + std::string(to_string(c.reference.kind))]
         [c.controller.decoupler] = &s.metrics[i];
  }
  int compared = 0, better = 0, incomplete = 0;
  std::string worst_cell;
  double worst_ratio = 0.0;
  for (const auto& [key, by] : cells) {
    const auto* mod = by.at(DecouplerKind::kModified);
    const auto* conv = by.at(DecouplerKind::kConventional);
    if (!mod->completed() || !conv->completed()) {
      ++incomplete;
      continue;
    }
    ++compared;
    better += mod->sup_error < conv->sup_error;
    const double ratio = mod->sup_error / conv->sup_error;
    if (ratio > worst_ratio) {
      worst_ratio = ratio;
      worst_cell = key;
    }
  }
  return {compared > 0 && better == compared,
          format("%d/%d cells modified < conventional (%d incomplete); worst ratio %.3f at %s; "
                 "48 runs in %.1f s",
                 better, compared, incomplete, worst_ratio, worst_cell.c_str(), s.seconds)};
}

Outcome period_trend() {
  const auto& s = full_sweep();
  // gait -> reference -> period -> sup_error (modified decoupler)
  std::map<std::string, std::map<ReferenceKind, std::map<double, double>>> e;
  for (std::size_t i = 0; i < s.configs.size(); ++i) {
    const auto& c = s.configs[i];
    if (c.controller.decoupler != DecouplerKind::kModified || !s.metrics[i].completed()) continue;
    e[c.gait][c.reference.kind][c.period] = s.metrics[i].sup_error;
  }
  bool ok = true;
  std::string detail;
  for (auto ref : {ReferenceKind::kRectilinear, ReferenceKind::kCircular}) {
    const auto& run = e["run"][ref];
    const auto& walk = e["walk"][ref];
    if (run.size() != 3 || walk.size() != 3) return {false, "missing runs in the sweep"};
    double prev = 0.0, run_min = 1e300, run_max = 0.0, walk_min = 1e300, walk_max = 0.0;
    for (const auto& [T, v] : run) {
      ok = ok && v >= prev;
      prev = v;
      run_min = std::min(run_min, v);
      run_max = std::max(run_max, v);
    }
    for (const auto& [T, v] : walk) {
      walk_min = std::min(walk_min, v);
      walk_max = std::max(walk_max, v);
    }
    ok = ok && walk_max / walk_min < run_max / run_min;
    detail += format("%s: run %.4f/%.4f/%.4f (ratio %.1f), walk ratio %.1f; ",
                     std::string(to_string(ref)).c_str(), run.at(1.0), run.at(2.0), run.at(3.0),
                     run_max / run_min, walk_max / walk_min);
  }
  return {ok, detail};
}

Outcome integrator_order() {
  using Vec1 = Eigen::Matrix<double, 1, 1>;
  auto global_error = [](double h) {
    Vec1 y = Vec1::Ones();
    const int n = static_cast<int>(std::lround(1.0 / h));
    for (int i = 0; i < n; ++i) y = ode3_step([](double, const Vec1& x) { return Vec1(-x); }, y, i * h, h);
    return std::abs(y[0] - std::exp(-1.0));
  };
  const double hs[3] = {4e-3, 2e-3, 1e-3};
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (double h : hs) {
    const double x = std::log(h), y = std::log(global_error(h));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double slope = (3 * sxy - sx * sy) / (3 * sxx - sx * sx);
  return {std::abs(slope - 3.0) <= 0.2, format("log-log slope %.3f", slope)};
}

Outcome regulation() {
  ExperimentConfig c;
  c.gait = "hover";
  c.reference.kind = ReferenceKind::kHover;
  c.keep_log = false;
  const auto m = run_experiment(c);
  const double hover = std::sqrt(c.vehicle.hover_signed_square());
  const bool ok = m.status == RunStatus::kOk && m.sup_error < 1e-3 &&
                  std::abs(m.mean_rotor_speed - hover) < 0.1;
  return {ok, format("status %s, sup_error %.2e m, mean |rotor speed| %.3f rad/s (hover %.3f)",
                     std::string(to_string(m.status)).c_str(), m.sup_error, m.mean_rotor_speed, hover)};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "condition values", 1.0, condition_values},
      {2, "determinant-condition equivalence", 10.0, determinant_equivalence},
      {3, "minimum safe scale", 60.0, minimum_safe_scale},
      {4, "locus enlargement", 60.0, locus_enlargement},
      {5, "exact-linearization closure", 5.0, closure},
      {6, "decoupler superiority", 0.0, decoupler_superiority},
      {7, "period trend", 0.0, period_trend},
      {8, "integrator order", 1.0, integrator_order},
      {9, "regulation sanity", 10.0, regulation},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_budget = c.budget_s <= 0.0 || dt < c.budget_s;
    const bool pass = o.pass && in_budget;
    failures += !pass;
    std::printf("%s criterion %d: %s: %s [%.2f s%s]\n", pass ? "PASS" : "FAIL", c.id, c.title,
                o.detail.c_str(), dt, in_budget ? "" : ", over budget");
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
