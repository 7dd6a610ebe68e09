#include "tiltgait/singularity.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace tiltgait {

namespace {

enum class AttitudeFactor { kSinPitch, kCosRollCosPitch, kSinRollCosPitch };

// One product term: coefficient * prod_i (s_i or c_i) * attitude factor.
// `pattern` lists rotors 1..4, 's' for sin(alpha_i), 'c' for cos(alpha_i).
struct ConditionTerm {
  double coefficient;
  const char* pattern;
  AttitudeFactor factor;
};

constexpr AttitudeFactor kSt = AttitudeFactor::kSinPitch;
constexpr AttitudeFactor kCfCt = AttitudeFactor::kCosRollCosPitch;
constexpr AttitudeFactor kSfCt = AttitudeFactor::kSinRollCosPitch;

// Printed term order of the exact condition.
constexpr ConditionTerm kExactTerms[] = {
    {+1.000, "cccs", kSt},   {-1.000, "cscc", kSt},   {-2.880, "ccss", kSt},
    {+2.880, "cssc", kSt},   {-2.880, "sccs", kSt},   {+2.880, "sscc", kSt},
    {-1.000, "scss", kSt},   {+1.000, "sssc", kSt},   {+4.000, "cccc", kCfCt},
    {+5.592, "cccs", kCfCt}, {-5.592, "ccsc", kCfCt}, {+5.592, "cscc", kCfCt},
    {-5.592, "sccc", kCfCt}, {+1.000, "ccsc", kSfCt}, {+0.9716, "ccss", kCfCt},
    {-2.000, "cscs", kCfCt}, {+0.9716, "cssc", kCfCt}, {-1.000, "sccc", kSfCt},
    {+0.9716, "sccs", kCfCt}, {-2.000, "scsc", kCfCt}, {+0.9716, "sscc", kCfCt},
    {+2.880, "ccss", kSfCt}, {+2.880, "cssc", kSfCt}, {-0.1687, "csss", kCfCt},
    {-2.880, "sccs", kSfCt}, {+0.1687, "scss", kCfCt}, {-2.880, "sscc", kSfCt},
    {-0.1687, "sscs", kCfCt}, {+0.1687, "sssc", kCfCt}, {-1.000, "csss", kSfCt},
    {+1.000, "sscs", kSfCt},
};

// Zero-attitude approximation: same coefficients, cos(roll) cos(pitch) group only.
constexpr ConditionTerm kApproxTerms[] = {
    {+4.000, "cccc", kCfCt},
    {+5.592, "cccs", kCfCt}, {-5.592, "ccsc", kCfCt}, {+5.592, "cscc", kCfCt}, {-5.592, "sccc", kCfCt},
    {+0.9716, "ccss", kCfCt}, {+0.9716, "cssc", kCfCt}, {+0.9716, "sccs", kCfCt}, {+0.9716, "sscc", kCfCt},
    {-2.000, "cscs", kCfCt}, {-2.000, "scsc", kCfCt},
    {-0.1687, "csss", kCfCt}, {+0.1687, "scss", kCfCt}, {-0.1687, "sscs", kCfCt}, {+0.1687, "sssc", kCfCt},
};

template <std::size_t N>
ConditionPolynomial accumulate(const ConditionTerm (&terms)[N], const TiltAngles& alpha) {
  const Vec4 s = alpha.array().sin();
  const Vec4 c = alpha.array().cos();
  ConditionPolynomial poly;
  for (const auto& term : terms) {
    double v = term.coefficient;
    for (int i = 0; i < 4; ++i) v *= (term.pattern[i] == 's') ? s[i] : c[i];
    switch (term.factor) {
      case AttitudeFactor::kSinPitch: poly.sin_pitch += v; break;
      case AttitudeFactor::kCosRollCosPitch: poly.cos_roll_cos_pitch += v; break;
      case AttitudeFactor::kSinRollCosPitch: poly.sin_roll_cos_pitch += v; break;
    }
  }
  return poly;
}

}  // namespace

ConditionPolynomial ConditionPolynomial::at(const TiltAngles& alpha) {
  return accumulate(kExactTerms, alpha);
}

double ConditionPolynomial::operator()(double roll, double pitch) const {
  const double ct = std::cos(pitch);
  return sin_pitch * std::sin(pitch) + cos_roll_cos_pitch * std::cos(roll) * ct +
         sin_roll_cos_pitch * std::sin(roll) * ct;
}

double approx_condition(const TiltAngles& alpha) {
  return accumulate(kApproxTerms, alpha).cos_roll_cos_pitch;
}

double exact_condition(const TiltAngles& alpha, double roll, double pitch) {
  return ConditionPolynomial::at(alpha)(roll, pitch);
}

LinearizationData decoupling_matrix(const RigidState& state, const TiltAngles& alpha,
                                    const VehicleParams& params, const DynamicsOptions& options) {
  const Vec4& w = state.rotor.signed_squares;
  for (int i = 0; i < 4; ++i) {
    if (w[i] == 0.0) {
      throw SingularityError("rotor " + std::to_string(i + 1) + " is stopped", 0.0);
    }
  }
  const EulerAttitude att = state.attitude();
  const Mat3 e = euler_rate_matrix(att);
  const Vec3& omega = state.body_rates;
  const Vec3 euler_rates = e * omega;

  const double sf = std::sin(att.roll), cf = std::cos(att.roll);
  const double st = std::sin(att.pitch), ct = std::cos(att.pitch);
  const double tt = st / ct, sec2 = 1.0 / (ct * ct);
  Mat3 de_droll, de_dpitch;
  de_droll << 0.0, cf * tt, -sf * tt,
              0.0, -sf, -cf,
              0.0, cf / ct, -sf / ct;
  de_dpitch << 0.0, sf * sec2, cf * sec2,
               0.0, 0.0, 0.0,
               0.0, sf * st * sec2, cf * st * sec2;
  const Mat3 e_dot = de_droll * euler_rates.x() + de_dpitch * euler_rates.y();

  LinearizationData lin;
  const Mat34 inv_inertia_tau =
      params.inertia_diag.cwiseInverse().asDiagonal() * torque_map(alpha, params);
  lin.delta.topRows<3>() = e * inv_inertia_tau;
  lin.delta.row(3) = state.rotation.row(2) * thrust_map(alpha, params) / params.mass;

  Vec3 attitude_drift = e_dot * omega;
  if (options.coriolis) {
    const Vec3 gyro = omega.cross(params.inertia_diag.cwiseProduct(omega));
    attitude_drift -= e * gyro.cwiseQuotient(params.inertia_diag);
  }
  lin.drift << attitude_drift, -params.gravity;
  lin.condition = exact_condition(alpha, att.roll, att.pitch);
  return lin;
}

double SingularLocus::min_distance() const {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& p : points) best = std::min(best, std::hypot(p.roll, p.pitch));
  return best;
}

SingularLocus locus_sweep(const TiltAngles& alpha, const LocusGrid& grid, double tol) {
  if (grid.resolution < 2 || !(grid.roll_max > 0.0) || !(grid.pitch_max > 0.0)) {
    throw std::invalid_argument("locus grid is empty");
  }
  constexpr double kHalfPi = std::numbers::pi / 2.0;
  if (grid.roll_max >= kHalfPi || grid.pitch_max >= kHalfPi) {
    throw std::invalid_argument("locus grid must stay inside (-pi/2, pi/2)");
  }
  const ConditionPolynomial cond = ConditionPolynomial::at(alpha);
  const int n = grid.resolution;
  auto roll_at = [&](int i) { return -grid.roll_max + 2.0 * grid.roll_max * i / (n - 1); };
  auto pitch_at = [&](int j) { return -grid.pitch_max + 2.0 * grid.pitch_max * j / (n - 1); };

  std::vector<double> values(static_cast<std::size_t>(n) * n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) values[j * n + i] = cond(roll_at(i), pitch_at(j));
  }

  SingularLocus locus;
  locus.alpha = alpha;
  locus.grid = grid;
  // Bisect the segment a -> b on which the condition changes sign.
  auto refine = [&](LocusPoint a, LocusPoint b, double fa) {
    for (int iter = 0; iter < 200; ++iter) {
      const LocusPoint mid{0.5 * (a.roll + b.roll), 0.5 * (a.pitch + b.pitch)};
      const double fm = cond(mid.roll, mid.pitch);
      if (std::abs(fm) < tol || (mid.roll == a.roll && mid.pitch == a.pitch) ||
          (mid.roll == b.roll && mid.pitch == b.pitch)) {
        return mid;
      }
      if ((fm < 0.0) == (fa < 0.0)) {
        a = mid;
        fa = fm;
      } else {
        b = mid;
      }
    }
    return LocusPoint{0.5 * (a.roll + b.roll), 0.5 * (a.pitch + b.pitch)};
  };
  auto edge = [&](int i0, int j0, int i1, int j1) {
    const double f0 = values[j0 * n + i0];
    const double f1 = values[j1 * n + i1];
    const LocusPoint p0{roll_at(i0), pitch_at(j0)};
    const LocusPoint p1{roll_at(i1), pitch_at(j1)};
    if (f0 == 0.0) {
      locus.points.push_back(p0);
    } else if (f1 != 0.0 && (f0 < 0.0) != (f1 < 0.0)) {
      locus.points.push_back(refine(p0, p1, f0));
    }
  };
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      if (i + 1 < n) edge(i, j, i + 1, j);
      if (j + 1 < n) edge(i, j, i, j + 1);
    }
  }
  // An exact grid zero is reported once per incident edge; keep the first.
  std::sort(locus.points.begin(), locus.points.end(), [](const auto& a, const auto& b) {
    return a.pitch != b.pitch ? a.pitch < b.pitch : a.roll < b.roll;
  });
  locus.points.erase(std::unique(locus.points.begin(), locus.points.end(),
                                 [](const auto& a, const auto& b) {
                                   return a.roll == b.roll && a.pitch == b.pitch;
                                 }),
                     locus.points.end());
  return locus;
}

double max_amplitude_phase(const GaitWaveform& waveform, int samples) {
  double best_phase = 0.0;
  double best = -1.0;
  for (int k = 0; k < samples; ++k) {
    const double phase = static_cast<double>(k) / samples;
    const double amp = waveform.evaluate(phase).cwiseAbs().maxCoeff();
    if (amp > best) {
      best = amp;
      best_phase = phase;
    }
  }
  return best_phase;
}

namespace {

// Lattice points k * step inside [-limit, limit], plus both edges.
std::vector<double> axis_samples(double limit, double step) {
  std::vector<double> out{-limit, limit};
  const int kmax = static_cast<int>(std::floor(limit / step + 1e-9));
  for (int k = -kmax; k <= kmax; ++k) {
    const double v = k * step;
    if (std::abs(v) < limit - 1e-12) out.push_back(v);
  }
  std::sort(out.begin(), out.end());
  return out;
}

void check_box(const AttitudeBox& box) {
  constexpr double kHalfPi = std::numbers::pi / 2.0;
  if (!(box.roll_max > 0.0 && box.roll_max < kHalfPi && box.pitch_max > 0.0 &&
        box.pitch_max < kHalfPi)) {
    throw std::invalid_argument("attitude box must lie inside (0, pi/2)");
  }
}

}  // namespace

double worst_condition(const GaitWaveform& waveform, int scale, const AttitudeBox& box,
                       const MarginScanOptions& options) {
  check_box(box);
  if (scale < 1) throw std::invalid_argument("scale must be >= 1");
  if (options.time_samples < 8) throw std::invalid_argument("need at least 8 time samples");
  const auto rolls = axis_samples(box.roll_max, options.attitude_step);
  const auto pitches = axis_samples(box.pitch_max, options.attitude_step);
  std::vector<double> sr, cr, sp, cp;
  for (double r : rolls) { sr.push_back(std::sin(r)); cr.push_back(std::cos(r)); }
  for (double p : pitches) { sp.push_back(std::sin(p)); cp.push_back(std::cos(p)); }

  double worst = std::numeric_limits<double>::infinity();
  for (int k = 0; k < options.time_samples; ++k) {
    const TiltAngles alpha =
        waveform.evaluate(static_cast<double>(k) / options.time_samples) / static_cast<double>(scale);
    const ConditionPolynomial cond = ConditionPolynomial::at(alpha);
    for (std::size_t j = 0; j < pitches.size(); ++j) {
      const double a = cond.sin_pitch * sp[j];
      const double b = cond.cos_roll_cos_pitch * cp[j];
      const double c = cond.sin_roll_cos_pitch * cp[j];
      for (std::size_t i = 0; i < rolls.size(); ++i) {
        worst = std::min(worst, std::abs(a + b * cr[i] + c * sr[i]));
      }
    }
  }
  return worst;
}

int min_scale(const GaitWaveform& waveform, const AttitudeBox& box,
              const MarginScanOptions& options) {
  check_box(box);
  // Zero tilt reduces the condition to 4 cos(roll) cos(pitch).
  if (4.0 * std::cos(box.roll_max) * std::cos(box.pitch_max) <= options.margin) {
    throw std::invalid_argument("margin unreachable on this attitude box even at zero tilt");
  }
  for (int n = 1; n <= options.max_scale; ++n) {
    if (worst_condition(waveform, n, box, options) > options.margin) return n;
  }
  throw std::logic_error("min_scale exceeded max_scale");
}

}  // namespace tiltgait
