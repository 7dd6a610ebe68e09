#include "tiltgait/gaits.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

namespace tiltgait {

namespace {

double wrap_phase(double phase) {
  double p = phase - std::floor(phase);
  if (p >= 1.0) p = 0.0;
  return p;
}

void validate_knots(const std::vector<GaitKnot>& knots, double amplitude) {
  if (knots.size() < 4) throw GaitValidationError("at least 4 knots required");
  if (!std::isfinite(amplitude) || amplitude < 0.0) {
    throw GaitValidationError("amplitude must be finite and nonnegative");
  }
  for (std::size_t i = 0; i < knots.size(); ++i) {
    const auto& k = knots[i];
    if (!std::isfinite(k.phase) || k.phase < 0.0 || k.phase >= 1.0) {
      throw GaitValidationError("knot phase must lie in [0, 1)");
    }
    if (!k.angles.allFinite()) throw GaitValidationError("knot angles must be finite");
    if (i > 0 && !(k.phase > knots[i - 1].phase)) {
      throw GaitValidationError("phases strictly increasing");
    }
  }
}

}  // namespace

std::string_view to_string(Interpolation interp) {
  return interp == Interpolation::kLinear ? "linear" : "cubic";
}

GaitWaveform::GaitWaveform(std::string name, std::vector<GaitKnot> knots, double base_amplitude,
                           Interpolation interpolation)
    : name_(std::move(name)),
      knots_(std::move(knots)),
      base_amplitude_(base_amplitude),
      interpolation_(interpolation) {
  validate_knots(knots_, base_amplitude_);
  if (interpolation_ != Interpolation::kCubicPeriodic) return;

  // Periodic spline: h[i-1] M[i-1] + 2 (h[i-1] + h[i]) M[i] + h[i] M[i+1] = rhs[i], indices mod n.
  const int n = static_cast<int>(knots_.size());
  auto gap = [&](int i) {
    const int j = (i + 1) % n;
    return (j == 0 ? knots_[0].phase + 1.0 : knots_[j].phase) - knots_[i].phase;
  };
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd rhs(n, 4);
  for (int i = 0; i < n; ++i) {
    const int prev = (i + n - 1) % n;
    const int next = (i + 1) % n;
    const double hp = gap(prev);
    const double hn = gap(i);
    a(i, prev) += hp;
    a(i, i) += 2.0 * (hp + hn);
    a(i, next) += hn;
    const Vec4 slope_next = (knots_[next].angles - knots_[i].angles) / hn;
    const Vec4 slope_prev = (knots_[i].angles - knots_[prev].angles) / hp;
    rhs.row(i) = 6.0 * (slope_next - slope_prev).transpose();
  }
  const Eigen::MatrixXd m = a.partialPivLu().solve(rhs);
  curvature_.resize(n);
  for (int i = 0; i < n; ++i) curvature_[i] = m.row(i).transpose();
}

TiltAngles GaitWaveform::evaluate(double phase) const {
  const double p = wrap_phase(phase);
  const auto it = std::upper_bound(knots_.begin(), knots_.end(), p,
                                   [](double v, const GaitKnot& k) { return v < k.phase; });
  // Phases before the first knot belong to the wrap-around segment.
  const int n = static_cast<int>(knots_.size());
  int i = static_cast<int>(it - knots_.begin()) - 1;
  double x = p;
  if (i < 0) {
    i = n - 1;
    x += 1.0;
  }
  const int j = (i + 1) % n;
  const double x0 = knots_[i].phase;
  const double x1 = (j == 0) ? knots_[0].phase + 1.0 : knots_[j].phase;
  const double h = x1 - x0;
  const double b = (x - x0) / h;
  const double a = 1.0 - b;
  TiltAngles out = a * knots_[i].angles + b * knots_[j].angles;
  if (interpolation_ == Interpolation::kCubicPeriodic) {
    out += ((a * a * a - a) * curvature_[i] + (b * b * b - b) * curvature_[j]) * (h * h / 6.0);
  }
  return out;
}

double GaitWaveform::max_abs_angle(int samples) const {
  double best = 0.0;
  for (int k = 0; k < samples; ++k) {
    best = std::max(best, evaluate(static_cast<double>(k) / samples).cwiseAbs().maxCoeff());
  }
  return best;
}

GaitSchedule::GaitSchedule(std::shared_ptr<const GaitWaveform> waveform, double period, int scale)
    : waveform_(std::move(waveform)), period_(period), scale_(scale) {
  if (!waveform_) throw std::invalid_argument("gait schedule needs a waveform");
  if (!(period_ > 0.0) || !std::isfinite(period_)) {
    throw std::invalid_argument("gait period must be positive");
  }
  if (scale_ < 1) throw std::invalid_argument("gait scale must be >= 1");
}

TiltAngles GaitSchedule::sample(double t) const {
  const TiltAngles raw = waveform_->evaluate(std::fmod(t, period_) / period_);
  return scale_ == 1 ? raw : TiltAngles(raw / static_cast<double>(scale_));
}

GaitSchedule GaitSchedule::scaled(int n) const { return GaitSchedule(waveform_, period_, n); }

GaitSchedule GaitSchedule::with_period(double period) const {
  return GaitSchedule(waveform_, period, scale_);
}

std::shared_ptr<const GaitWaveform> make_footfall_gait(const std::string& name,
                                                       const FootfallPattern& pattern,
                                                       int knots) {
  const double beta = pattern.duty_factor;
  const double amplitude = pattern.amplitude;
  if (!(beta > 0.0 && beta < 1.0)) throw std::invalid_argument("duty factor must lie in (0, 1)");
  if (knots < 4) throw std::invalid_argument("at least 4 knots required");
  auto trace = [&](double phase) {
    const double p = wrap_phase(phase);
    return p < beta ? amplitude - 2.0 * amplitude * p / beta
                    : -amplitude + 2.0 * amplitude * (p - beta) / (1.0 - beta);
  };
  std::vector<GaitKnot> out(knots);
  for (int k = 0; k < knots; ++k) {
    out[k].phase = static_cast<double>(k) / knots;
    for (int r = 0; r < 4; ++r) out[k].angles[r] = trace(out[k].phase - pattern.offsets[r]);
  }
  return std::make_shared<const GaitWaveform>(name, std::move(out), amplitude);
}

const std::vector<std::string>& builtin_gait_names() {
  static const std::vector<std::string> names{"walk", "run", "transverse_gallop", "rotary_gallop"};
  return names;
}

FootfallPattern builtin_footfall(const std::string& name) {
  // Rotor order: left fore, right fore, right hind, left hind. The run pairs
  // rotors so their lateral forces add; at 1 rad they exceed the weight.
  static const std::map<std::string, FootfallPattern> table{
      {"walk", {{0.0, 0.25, 0.5, 0.75}, 0.75, 1.0}},
      {"run", {{0.0, 0.5, 0.5, 0.0}, 0.35, 0.5}},
      {"transverse_gallop", {{0.0, 0.1, 0.5, 0.6}, 0.3, 1.0}},
      {"rotary_gallop", {{0.0, 0.1, 0.6, 0.5}, 0.3, 1.0}},
  };
  const auto it = table.find(name);
  if (it == table.end()) throw std::invalid_argument("unknown gait: " + name);
  return it->second;
}

std::shared_ptr<const GaitWaveform> builtin_gait(const std::string& name) {
  if (name == "hover") {
    std::vector<GaitKnot> knots(4);
    for (int k = 0; k < 4; ++k) knots[k].phase = 0.25 * k;
    return std::make_shared<const GaitWaveform>("hover", std::move(knots), 0.0);
  }
  return make_footfall_gait(name, builtin_footfall(name));
}

std::shared_ptr<const GaitWaveform> resolve_gait(const std::string& name_or_path) {
  const auto& names = builtin_gait_names();
  if (name_or_path == "hover" ||
      std::find(names.begin(), names.end(), name_or_path) != names.end()) {
    return builtin_gait(name_or_path);
  }
  return load_gait_file(name_or_path);
}

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    const std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

double parse_number(std::string_view tok, int line) {
  if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    throw GaitParseError(line, "expected a number, got '" + std::string(tok) + "'");
  }
  return v;
}

}  // namespace

std::shared_ptr<const GaitWaveform> parse_gait_file(std::string_view text) {
  std::string name;
  double amplitude = 0.0;
  bool have_header = false;
  Interpolation interp = Interpolation::kCubicPeriodic;
  std::vector<GaitKnot> knots;

  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t eol = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    const auto tok = split_ws(line);
    if (tok.empty()) continue;

    if (tok[0] == "gait") {
      if (have_header) throw GaitParseError(line_no, "duplicate gait header");
      if (tok.size() != 4 || tok[2] != "amplitude") {
        throw GaitParseError(line_no, "expected 'gait <name> amplitude <A>'");
      }
      name = std::string(tok[1]);
      amplitude = parse_number(tok[3], line_no);
      have_header = true;
    } else if (tok[0] == "interpolation") {
      if (tok.size() != 2) throw GaitParseError(line_no, "expected 'interpolation linear|cubic'");
      if (tok[1] == "linear") {
        interp = Interpolation::kLinear;
      } else if (tok[1] == "cubic") {
        interp = Interpolation::kCubicPeriodic;
      } else {
        throw GaitParseError(line_no, "unknown interpolation '" + std::string(tok[1]) + "'");
      }
    } else if (tok[0] == "knot") {
      if (!have_header) throw GaitParseError(line_no, "knot before gait header");
      if (tok.size() != 6) throw GaitParseError(line_no, "expected 'knot <phase> <a1> <a2> <a3> <a4>'");
      GaitKnot k;
      k.phase = parse_number(tok[1], line_no);
      for (int r = 0; r < 4; ++r) k.angles[r] = parse_number(tok[2 + r], line_no);
      knots.push_back(k);
    } else {
      throw GaitParseError(line_no, "unknown directive '" + std::string(tok[0]) + "'");
    }
  }
  if (!have_header) throw GaitParseError(0, "missing gait header");
  return std::make_shared<const GaitWaveform>(std::move(name), std::move(knots), amplitude, interp);
}

std::shared_ptr<const GaitWaveform> load_gait_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open gait file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_gait_file(ss.str());
}

std::shared_ptr<const GaitWaveform> scale_waveform(const GaitWaveform& waveform, int n) {
  if (n < 1) throw std::invalid_argument("gait scale must be >= 1");
  std::vector<GaitKnot> knots = waveform.knots();
  for (auto& k : knots) k.angles /= static_cast<double>(n);
  return std::make_shared<GaitWaveform>(waveform.name() + "_n" + std::to_string(n), std::move(knots),
                                        waveform.base_amplitude() / n, waveform.interpolation());
}

std::string serialize_gait(const GaitWaveform& waveform) {
  char buf[128];
  std::string out;
  std::snprintf(buf, sizeof buf, "gait %s amplitude %.17g\n", waveform.name().c_str(),
                waveform.base_amplitude());
  out += buf;
  out += "interpolation ";
  out += to_string(waveform.interpolation());
  out += "\n";
  for (const auto& k : waveform.knots()) {
    std::snprintf(buf, sizeof buf, "knot %.17g %.17g %.17g %.17g %.17g\n", k.phase, k.angles[0],
                  k.angles[1], k.angles[2], k.angles[3]);
    out += buf;
  }
  return out;
}

std::array<double, 4> estimate_phase_offsets(const GaitWaveform& waveform, int samples) {
  std::vector<TiltAngles> trace(samples);
  for (int j = 0; j < samples; ++j) trace[j] = waveform.evaluate(static_cast<double>(j) / samples);

  std::array<double, 4> offsets{};
  for (int r = 1; r < 4; ++r) {
    // rotor r follows rotor 1 delayed by the lag maximizing the correlation
    double best = -std::numeric_limits<double>::infinity();
    int best_lag = 0;
    for (int lag = 0; lag < samples; ++lag) {
      double acc = 0.0;
      for (int j = 0; j < samples; ++j) acc += trace[j][r] * trace[(j - lag + samples) % samples][0];
      if (acc > best + 1e-12) {
        best = acc;
        best_lag = lag;
      }
    }
    offsets[r] = static_cast<double>(best_lag) / samples;
  }
  return offsets;
}

bool offsets_evenly_spaced(const std::array<double, 4>& offsets, double tol) {
  std::vector<double> v;
  for (double o : offsets) v.push_back(wrap_phase(o));
  std::sort(v.begin(), v.end());
  std::vector<double> distinct;
  for (double o : v) {
    if (distinct.empty() || o - distinct.back() > tol) distinct.push_back(o);
  }
  if (distinct.size() > 1 && distinct.front() + 1.0 - distinct.back() <= tol) distinct.pop_back();
  if (distinct.size() <= 1) return true;
  const double expected = 1.0 / static_cast<double>(distinct.size());
  for (std::size_t i = 0; i < distinct.size(); ++i) {
    const double next = (i + 1 < distinct.size()) ? distinct[i + 1] : distinct[0] + 1.0;
    if (std::abs(next - distinct[i] - expected) > tol) return false;
  }
  return true;
}

}  // namespace tiltgait
