#pragma once

#include <array>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "tiltgait/rigidbody.hpp"

namespace tiltgait {

/// Malformed gait text. `line()` is 1-based; 0 means the whole file.
class GaitParseError : public std::runtime_error {
 public:
  GaitParseError(int line, const std::string& what)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

/// Well-formed knots that break a waveform invariant.
class GaitValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class Interpolation { kLinear, kCubicPeriodic };

std::string_view to_string(Interpolation interp);

struct GaitKnot {
  double phase = 0.0;  // [0, 1)
  TiltAngles angles = TiltAngles::Zero();
};

/// One period of the four tilting angles, sampled by phase in [0, 1).
///
/// Knots are interpolated periodically: the segment after the last knot wraps
/// back to the first. Cubic interpolation uses a periodic spline (C2).
class GaitWaveform {
 public:
  GaitWaveform(std::string name, std::vector<GaitKnot> knots, double base_amplitude,
               Interpolation interpolation = Interpolation::kCubicPeriodic);

  const std::string& name() const { return name_; }
  const std::vector<GaitKnot>& knots() const { return knots_; }
  double base_amplitude() const { return base_amplitude_; }
  Interpolation interpolation() const { return interpolation_; }

  /// Angles at `phase`; any real phase is wrapped into [0, 1).
  TiltAngles evaluate(double phase) const;

  /// Largest |alpha_i| over `samples` evenly spaced phases.
  double max_abs_angle(int samples = 1000) const;

 private:
  std::string name_;
  std::vector<GaitKnot> knots_;
  double base_amplitude_;
  Interpolation interpolation_;
  // Second derivatives of the periodic spline at each knot, one column per rotor.
  std::vector<TiltAngles> curvature_;
};

/// A waveform played back with period T and divided by an integer scale n.
class GaitSchedule {
 public:
  GaitSchedule(std::shared_ptr<const GaitWaveform> waveform, double period, int scale = 1);

  const GaitWaveform& waveform() const { return *waveform_; }
  std::shared_ptr<const GaitWaveform> waveform_ptr() const { return waveform_; }
  double period() const { return period_; }
  int scale() const { return scale_; }

  TiltAngles sample(double t) const;

  /// Same waveform, new scale. Throws std::invalid_argument if n < 1.
  GaitSchedule scaled(int n) const;
  GaitSchedule with_period(double period) const;

 private:
  std::shared_ptr<const GaitWaveform> waveform_;
  double period_;
  int scale_;
};

/// Footfall parameters of the canonical waveform construction.
struct FootfallPattern {
  std::array<double, 4> offsets{};  // per-rotor phase lag
  double duty_factor = 0.5;         // stance fraction of the period
  double amplitude = 1.0;           // rad
};

inline constexpr int kDefaultGaitKnots = 32;

/// Stance ramps +A -> -A over the duty fraction, swing returns -A -> +A;
/// the trace is sampled at `knots` evenly spaced phases.
std::shared_ptr<const GaitWaveform> make_footfall_gait(const std::string& name,
                                                       const FootfallPattern& pattern,
                                                       int knots = kDefaultGaitKnots);

/// walk, run, transverse_gallop, rotary_gallop (plus "hover": all angles zero).
const std::vector<std::string>& builtin_gait_names();
FootfallPattern builtin_footfall(const std::string& name);
std::shared_ptr<const GaitWaveform> builtin_gait(const std::string& name);

/// Loads a built-in name or, failing that, a gait file path.
std::shared_ptr<const GaitWaveform> resolve_gait(const std::string& name_or_path);

std::shared_ptr<const GaitWaveform> parse_gait_file(std::string_view text);
std::shared_ptr<const GaitWaveform> load_gait_file(const std::string& path);
/// New waveform whose knots are the originals divided by n, named "<name>_n<n>".
/// The spline is linear in its knots, so evaluate() commutes with the division.
std::shared_ptr<const GaitWaveform> scale_waveform(const GaitWaveform& waveform, int n);

/// Text form accepted by parse_gait_file; values printed round-trip exact.
std::string serialize_gait(const GaitWaveform& waveform);

/// Phase lag of each rotor relative to rotor 1, from circular cross-correlation.
std::array<double, 4> estimate_phase_offsets(const GaitWaveform& waveform, int samples = 1024);

/// True when the distinct footfall offsets are evenly spaced around the cycle.
bool offsets_evenly_spaced(const std::array<double, 4>& offsets, double tol = 0.02);

}  // namespace tiltgait
