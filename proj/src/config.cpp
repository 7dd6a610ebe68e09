#include "tiltgait/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

namespace tiltgait {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    const std::size_t comma = std::min(s.find(',', pos), s.size());
    const auto item = trim(s.substr(pos, comma - pos));
    if (!item.empty()) out.emplace_back(item);
    pos = comma + 1;
  }
  return out;
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <class T, class F>
std::string join(const std::vector<T>& items, F&& to_text) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ", ";
    out += to_text(items[i]);
  }
  return out;
}

double to_double(const std::string& key, std::string_view v) {
  v = trim(v);
  if (!v.empty() && v.front() == '+') v.remove_prefix(1);
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ConfigError("'" + key + "' expects a number, got '" + std::string(v) + "'");
  }
  return out;
}

long long to_int(const std::string& key, std::string_view v) {
  v = trim(v);
  long long out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ConfigError("'" + key + "' expects an integer, got '" + std::string(v) + "'");
  }
  return out;
}

bool to_bool(const std::string& key, std::string_view v) {
  v = trim(v);
  if (v == "on" || v == "true" || v == "yes" || v == "1") return true;
  if (v == "off" || v == "false" || v == "no" || v == "0") return false;
  throw ConfigError("'" + key + "' expects on/off, got '" + std::string(v) + "'");
}

template <class F>
auto wrap_enum(const std::string& key, std::string_view v, F&& parse) {
  try {
    return parse(trim(v));
  } catch (const std::invalid_argument& e) {
    throw ConfigError("'" + key + "': " + e.what());
  }
}

int to_scale(const std::string& key, std::string_view v) {
  if (trim(v) == "auto") return 0;
  const long long n = to_int(key, v);
  if (n < 1) throw ConfigError("'" + key + "' must be >= 1 or auto");
  return static_cast<int>(n);
}

std::string scale_text(int n) { return n == 0 ? "auto" : std::to_string(n); }

const char* kChannelNames[4] = {"roll", "pitch", "yaw", "altitude"};

// Binds every configurable key to a setter and a getter so parsing and
// serialization cannot drift apart.
struct KeyBinding {
  std::string section;
  std::string key;
  std::function<void(SweepConfig&, const std::string&, const std::string&)> set;
  std::function<std::string(const SweepConfig&)> get;
};

#define TG_DOUBLE(SEC, KEY, FIELD)                                                              \
  KeyBinding{SEC, KEY,                                                                          \
             [](SweepConfig& c, const std::string& k, const std::string& v) { c.FIELD = to_double(k, v); }, \
             [](const SweepConfig& c) { return fmt_double(c.FIELD); }}
#define TG_INT(SEC, KEY, FIELD)                                                                 \
  KeyBinding{SEC, KEY,                                                                          \
             [](SweepConfig& c, const std::string& k, const std::string& v) {                   \
               c.FIELD = static_cast<decltype(c.FIELD)>(to_int(k, v));                          \
             },                                                                                 \
             [](const SweepConfig& c) { return std::to_string(c.FIELD); }}
#define TG_BOOL(SEC, KEY, FIELD)                                                                \
  KeyBinding{SEC, KEY,                                                                          \
             [](SweepConfig& c, const std::string& k, const std::string& v) { c.FIELD = to_bool(k, v); }, \
             [](const SweepConfig& c) { return std::string(c.FIELD ? "on" : "off"); }}

const std::vector<KeyBinding>& bindings() {
  static const std::vector<KeyBinding> table = [] {
    std::vector<KeyBinding> b{
        TG_DOUBLE("vehicle", "mass", base.vehicle.mass),
        TG_DOUBLE("vehicle", "arm_length", base.vehicle.arm_length),
        TG_DOUBLE("vehicle", "k_thrust", base.vehicle.k_thrust),
        TG_DOUBLE("vehicle", "k_drag", base.vehicle.k_drag),
        TG_DOUBLE("vehicle", "inertia_xx", base.vehicle.inertia_diag.x()),
        TG_DOUBLE("vehicle", "inertia_yy", base.vehicle.inertia_diag.y()),
        TG_DOUBLE("vehicle", "inertia_zz", base.vehicle.inertia_diag.z()),
        TG_DOUBLE("vehicle", "gravity", base.vehicle.gravity),

        TG_BOOL("dynamics", "coriolis", base.controller.dynamics.coriolis),
        TG_DOUBLE("dynamics", "rotor_floor", base.controller.rotor_floor),

        TG_DOUBLE("controller", "position_kp", base.controller.position_gains.kp),
        TG_DOUBLE("controller", "position_kd", base.controller.position_gains.kd),
        TG_DOUBLE("controller", "tilt_limit", base.controller.tilt_limit),
        TG_DOUBLE("controller", "singularity_margin", base.controller.singularity_margin),
        TG_BOOL("controller", "gait_feedforward", base.controller.gait_feedforward),
        KeyBinding{"controller", "lateral_allocation",
                   [](SweepConfig& c, const std::string& k, const std::string& v) {
                     c.base.controller.lateral_allocation = wrap_enum(k, v, parse_lateral_allocation);
                   },
                   [](const SweepConfig& c) {
                     return std::string(to_string(c.base.controller.lateral_allocation));
                   }},
        TG_INT("controller", "max_held_steps", base.max_held_steps),

        TG_DOUBLE("simulation", "duration", base.duration),
        TG_DOUBLE("simulation", "settle_time", base.settle_time),
        TG_DOUBLE("simulation", "step", base.step),
        TG_DOUBLE("simulation", "initial_rotor_speed", base.initial_rotor_speed),
        TG_DOUBLE("simulation", "divergence_error", base.divergence_error),
        TG_DOUBLE("simulation", "initial_position_noise", base.initial_position_noise),
        TG_INT("simulation", "seed", base.seed),
        TG_BOOL("simulation", "enforce_gait_margin", base.enforce_gait_margin),
        KeyBinding{"simulation", "rectilinear_y",
                   [](SweepConfig& c, const std::string& k, const std::string& v) {
                     const auto t = trim(v);
                     if (t == "zero") {
                       c.base.reference.rectilinear_y_zero = true;
                     } else if (t == "diagonal") {
                       c.base.reference.rectilinear_y_zero = false;
                     } else {
                       throw ConfigError("'" + k + "' expects diagonal or zero");
                     }
                   },
                   [](const SweepConfig& c) {
                     return std::string(c.base.reference.rectilinear_y_zero ? "zero" : "diagonal");
                   }},

        KeyBinding{"sweep", "gaits",
                   [](SweepConfig& c, const std::string&, const std::string& v) { c.gaits = split_list(v); },
                   [](const SweepConfig& c) { return join(c.gaits, [](const std::string& s) { return s; }); }},
        KeyBinding{"sweep", "periods",
                   [](SweepConfig& c, const std::string& k, const std::string& v) {
                     c.periods.clear();
                     for (const auto& item : split_list(v)) c.periods.push_back(to_double(k, item));
                   },
                   [](const SweepConfig& c) { return join(c.periods, fmt_double); }},
        KeyBinding{"sweep", "decouplers",
                   [](SweepConfig& c, const std::string& k, const std::string& v) {
                     c.decouplers.clear();
                     for (const auto& item : split_list(v)) c.decouplers.push_back(wrap_enum(k, item, parse_decoupler));
                   },
                   [](const SweepConfig& c) {
                     return join(c.decouplers, [](DecouplerKind d) { return std::string(to_string(d)); });
                   }},
        KeyBinding{"sweep", "references",
                   [](SweepConfig& c, const std::string& k, const std::string& v) {
                     c.references.clear();
                     for (const auto& item : split_list(v)) c.references.push_back(wrap_enum(k, item, parse_reference));
                   },
                   [](const SweepConfig& c) {
                     return join(c.references, [](ReferenceKind r) { return std::string(to_string(r)); });
                   }},
        KeyBinding{"sweep", "default_scale",
                   [](SweepConfig& c, const std::string& k, const std::string& v) { c.default_scale = to_scale(k, v); },
                   [](const SweepConfig& c) { return scale_text(c.default_scale); }},
        TG_INT("sweep", "workers", workers),

        TG_BOOL("output", "write_logs", write_logs),
        TG_INT("output", "log_every", log_every),

        TG_DOUBLE("singularity", "locus_roll_max", locus_grid.roll_max),
        TG_DOUBLE("singularity", "locus_pitch_max", locus_grid.pitch_max),
        TG_INT("singularity", "locus_resolution", locus_grid.resolution),
        TG_DOUBLE("singularity", "minscale_roll_max", minscale_box.roll_max),
        TG_DOUBLE("singularity", "minscale_pitch_max", minscale_box.pitch_max),
        TG_INT("singularity", "time_samples", scan.time_samples),
        TG_DOUBLE("singularity", "attitude_step", scan.attitude_step),
    };
    for (int i = 0; i < 4; ++i) {
      const std::string name = kChannelNames[i];
      b.push_back(KeyBinding{
          "controller", name + "_kp",
          [i](SweepConfig& c, const std::string& k, const std::string& v) {
            c.base.controller.attitude_gains.channel[i].kp = to_double(k, v);
          },
          [i](const SweepConfig& c) { return fmt_double(c.base.controller.attitude_gains.channel[i].kp); }});
      b.push_back(KeyBinding{
          "controller", name + "_kd",
          [i](SweepConfig& c, const std::string& k, const std::string& v) {
            c.base.controller.attitude_gains.channel[i].kd = to_double(k, v);
          },
          [i](const SweepConfig& c) { return fmt_double(c.base.controller.attitude_gains.channel[i].kd); }});
    }
    return b;
  }();
  return table;
}

#undef TG_DOUBLE
#undef TG_INT
#undef TG_BOOL

}  // namespace

IniDocument IniDocument::parse(std::string_view text) {
  IniDocument doc;
  std::string section;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t eol = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (const auto c = line.find_first_of("#;"); c != std::string_view::npos) line = line.substr(0, c);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("line " + std::to_string(line_no) + ": unterminated section");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      doc.sections[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string key(trim(line.substr(0, eq)));
    if (key.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty key");
    auto& sec = doc.sections[section];
    if (sec.count(key)) {
      throw ConfigError("line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
    }
    sec[key] = std::string(trim(line.substr(eq + 1)));
  }
  return doc;
}

std::string IniDocument::serialize() const {
  std::string out;
  for (const auto& [name, keys] : sections) {
    if (!name.empty()) out += "[" + name + "]\n";
    for (const auto& [k, v] : keys) out += k + " = " + v + "\n";
    out += "\n";
  }
  return out;
}

int SweepConfig::scale_for(const std::string& gait) const {
  const auto it = scales.find(gait);
  const int n = it != scales.end() ? it->second : default_scale;
  if (n > 0) return n;
  const double limit = base.controller.tilt_limit;
  MarginScanOptions opts = scan;
  opts.margin = base.controller.singularity_margin;
  return min_scale(*resolve_gait(gait), AttitudeBox{limit, limit}, opts);
}

std::vector<ExperimentConfig> SweepConfig::expand() const {
  std::vector<ExperimentConfig> out;
  for (const auto& gait : gaits) {
    const int n = scale_for(gait);
    for (double period : periods) {
      for (DecouplerKind d : decouplers) {
        for (ReferenceKind r : references) {
          ExperimentConfig c = base;
          c.gait = gait;
          c.scale = n;
          c.period = period;
          c.controller.decoupler = d;
          c.reference.kind = r;
          out.push_back(c);
        }
      }
    }
  }
  return out;
}

void SweepConfig::validate() const {
  try {
    base.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (gaits.empty() || periods.empty() || decouplers.empty() || references.empty()) {
    throw ConfigError("every sweep axis needs at least one value");
  }
  for (double p : periods) {
    if (!(p > 0.0)) throw ConfigError("periods must be positive");
  }
  if (workers < 1) throw ConfigError("workers must be >= 1");
  if (log_every < 1) throw ConfigError("log_every must be >= 1");
  if (scan.time_samples < 8) throw ConfigError("time_samples must be >= 8");
  if (!(scan.attitude_step > 0.0)) throw ConfigError("attitude_step must be positive");
}

SweepConfig parse_sweep_config(std::string_view text) {
  const IniDocument doc = IniDocument::parse(text);
  SweepConfig cfg;
  for (const auto& [section, keys] : doc.sections) {
    for (const auto& [key, value] : keys) {
      const std::string qualified = section.empty() ? key : section + "." + key;
      if (section == "scales") {
        cfg.scales[key] = to_scale(qualified, value);
        continue;
      }
      const auto& b = bindings();
      const auto it = std::find_if(b.begin(), b.end(), [&](const KeyBinding& kb) {
        return kb.section == section && kb.key == key;
      });
      if (it == b.end()) throw ConfigError("unknown config key '" + qualified + "'");
      it->set(cfg, qualified, value);
    }
  }
  cfg.validate();
  return cfg;
}

SweepConfig load_sweep_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_sweep_config(ss.str());
}

std::string serialize_sweep_config(const SweepConfig& cfg) {
  IniDocument doc;
  for (const auto& b : bindings()) doc.sections[b.section][b.key] = b.get(cfg);
  for (const auto& [gait, n] : cfg.scales) doc.sections["scales"][gait] = scale_text(n);
  return doc.serialize();
}

}  // namespace tiltgait
