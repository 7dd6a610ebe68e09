#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "tiltgait/manifest.hpp"

namespace tiltgait::cli {

namespace fs = std::filesystem;

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

SweepConfig load_or_default(const std::optional<std::string>& path) {
  return path ? load_sweep_config(*path) : SweepConfig{};
}

std::string decimated_log_csv(const RunLog& log, int every) {
  RunLog kept;
  kept.rows.reserve(log.rows.size() / every + 1);
  for (std::size_t i = 0; i < log.rows.size(); i += every) kept.rows.push_back(log.rows[i]);
  std::ostringstream ss;
  write_log_csv(kept, ss);
  return ss.str();
}

std::shared_ptr<const GaitWaveform> load_gait_or_throw(const std::string& name) {
  try {
    return resolve_gait(name);
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
}

}  // namespace

SweepConfig effective_config(const SimulateOptions& opts) {
  SweepConfig cfg = load_or_default(opts.config_path);
  try {
    if (opts.gait) cfg.gaits = {*opts.gait};
    if (opts.period) cfg.periods = {*opts.period};
    if (opts.scale) {
      if (*opts.scale < 1) throw ConfigError("--scale must be >= 1");
      for (const auto& g : cfg.gaits) cfg.scales[g] = *opts.scale;
    }
    if (opts.decoupler) cfg.decouplers = {parse_decoupler(*opts.decoupler)};
    if (opts.reference) cfg.references = {parse_reference(*opts.reference)};
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (opts.workers) cfg.workers = *opts.workers;
  if (opts.seed) cfg.base.seed = *opts.seed;
  for (const auto& g : cfg.gaits) load_gait_or_throw(g);
  cfg.validate();
  return cfg;
}

SimulateResult cmd_simulate(const SimulateOptions& opts, std::ostream& out) {
  SimulateResult res;
  const SweepConfig cfg = effective_config(opts);
  try {
    res.configs = cfg.expand();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }

  // The worker count does not change results, so it stays out of the sweep id.
  SweepConfig id_cfg = cfg;
  id_cfg.workers = 1;
  RunManifest manifest;
  manifest.config_path = opts.config_path.value_or("");
  manifest.sweep_id = sweep_id_for(serialize_sweep_config(id_cfg));
  manifest.output_dir = opts.out_root / manifest.sweep_id;
  manifest.gaits = cfg.gaits;
  manifest.periods = cfg.periods;
  for (const auto& c : res.configs) manifest.scales[c.gait] = c.scale;
  for (auto d : cfg.decouplers) manifest.decouplers.emplace_back(to_string(d));
  for (auto r : cfg.references) manifest.references.emplace_back(to_string(r));
  manifest.write_artifact("config.ini", serialize_sweep_config(cfg));
  res.sweep_dir = manifest.output_dir;

  for (auto& c : res.configs) c.keep_log = cfg.write_logs;
  std::vector<std::vector<ArtifactEntry>> per_run(res.configs.size());
  std::vector<std::string> write_errors(res.configs.size());
  const auto on_done = [&](std::size_t i, TrackingMetrics& m) {
    const std::string dir = res.configs[i].run_id() + "/";
    try {
      if (m.log) {
        per_run[i].push_back(write_file_artifact(manifest.output_dir, dir + "log.csv",
                                                 decimated_log_csv(*m.log, cfg.log_every)));
      }
      per_run[i].push_back(write_file_artifact(manifest.output_dir, dir + "metrics.txt",
                                               metrics_record(res.configs[i], m)));
    } catch (const std::exception& e) {
      write_errors[i] = e.what();
    }
    m.log.reset();
  };
  res.metrics = run_batch(res.configs, cfg.workers, on_done);

  bool any_failed = false;
  for (std::size_t i = 0; i < res.configs.size(); ++i) {
    const auto& m = res.metrics[i];
    for (auto& a : per_run[i]) manifest.artifacts.push_back(std::move(a));
    RunRecord rec{res.configs[i].run_id(), std::string(to_string(m.status)), m.diagnostic, m.sup_error};
    if (!write_errors[i].empty()) {
      rec.status = "write_failed";
      rec.diagnostic = write_errors[i];
    }
    any_failed = any_failed || !m.completed() || !write_errors[i].empty();
    manifest.runs.push_back(std::move(rec));
  }
  const std::string table = radar_table(res.configs, res.metrics);
  manifest.write_artifact("summary.csv", summary_csv(res.configs, res.metrics));
  manifest.write_artifact("radar.txt", table);
  manifest.save();

  out << table << "\n"
      << res.configs.size() << " runs written to " << manifest.output_dir.string() << "\n";
  for (const auto& r : manifest.runs) {
    if (r.status != "ok") out << "  " << r.run_id << ": " << r.status << " " << r.diagnostic << "\n";
  }
  res.exit_code = any_failed ? kExitPartialFailure : kExitOk;
  return res;
}

std::string radar_table(const std::vector<ExperimentConfig>& configs,
                        const std::vector<TrackingMetrics>& metrics) {
  // reference -> (gait, period) -> decoupler -> cell text
  std::map<std::string, std::map<std::pair<std::string, double>, std::map<std::string, std::string>>> cells;
  std::vector<std::string> decouplers;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    const auto& c = configs[i];
    const std::string d(to_string(c.controller.decoupler));
    if (std::find(decouplers.begin(), decouplers.end(), d) == decouplers.end()) decouplers.push_back(d);
    char buf[48];
    if (metrics[i].completed()) {
      std::snprintf(buf, sizeof buf, "%.6f%s", metrics[i].sup_error, metrics[i].degraded ? "*" : "");
    } else {
      std::snprintf(buf, sizeof buf, "%s", std::string(to_string(metrics[i].status)).c_str());
    }
    cells[std::string(to_string(c.reference.kind))][{c.gait + " n=" + std::to_string(c.scale), c.period}][d] = buf;
  }
  std::string out;
  char line[256];
  for (const auto& [ref, rows] : cells) {
    out += "sup_error [m], reference " + ref + "\n";
    std::snprintf(line, sizeof line, "  %-24s %6s", "gait", "T [s]");
    out += line;
    for (const auto& d : decouplers) {
      std::snprintf(line, sizeof line, " %14s", d.c_str());
      out += line;
    }
    out += "\n";
    for (const auto& [key, by_dec] : rows) {
      std::snprintf(line, sizeof line, "  %-24s %6g", key.first.c_str(), key.second);
      out += line;
      for (const auto& d : decouplers) {
        const auto it = by_dec.find(d);
        std::snprintf(line, sizeof line, " %14s", it == by_dec.end() ? "-" : it->second.c_str());
        out += line;
      }
      out += "\n";
    }
  }
  return out;
}

std::string summary_csv(const std::vector<ExperimentConfig>& configs,
                        const std::vector<TrackingMetrics>& metrics) {
  std::string out =
      "run_id,gait,scale,period,decoupler,reference,status,sup_error,sup_error_x,sup_error_y,"
      "sup_error_z,held_steps,gait_condition\n";
  for (std::size_t i = 0; i < configs.size(); ++i) {
    const auto& c = configs[i];
    const auto& m = metrics[i];
    out += c.run_id() + "," + c.gait + "," + std::to_string(c.scale) + "," + fmt(c.period) + "," +
           std::string(to_string(c.controller.decoupler)) + "," + std::string(to_string(c.reference.kind)) +
           "," + std::string(to_string(m.status)) + "," + fmt(m.sup_error) + "," +
           fmt(m.sup_axis_error.x()) + "," + fmt(m.sup_axis_error.y()) + "," + fmt(m.sup_axis_error.z()) +
           "," + std::to_string(m.held_steps) + "," + fmt(m.gait_condition) + "\n";
  }
  return out;
}

std::string locus_csv(const SingularLocus& locus) {
  std::string out = "roll,pitch\n";
  for (const auto& p : locus.points) out += fmt(p.roll) + "," + fmt(p.pitch) + "\n";
  return out;
}

int cmd_locus(const LocusOptions& opts, std::ostream& out) {
  const SweepConfig cfg = load_or_default(opts.config_path);
  const auto waveform = load_gait_or_throw(opts.gait);
  LocusGrid grid = cfg.locus_grid;
  if (opts.range) grid.roll_max = grid.pitch_max = *opts.range;
  if (opts.resolution) grid.resolution = *opts.resolution;
  const double phase = opts.phase ? *opts.phase : max_amplitude_phase(*waveform);

  RunManifest manifest;
  manifest.config_path = opts.config_path.value_or("");
  manifest.output_dir = opts.out_dir;
  manifest.sweep_id = "locus-" + waveform->name();
  manifest.gaits = {opts.gait};
  char head[160];
  std::snprintf(head, sizeof head, "gait %s, phase %.6f, grid +/-%g x +/-%g rad, %d points per axis\n",
                waveform->name().c_str(), phase, grid.roll_max, grid.pitch_max, grid.resolution);
  out << head;
  for (int n : opts.scales) {
    if (n < 1) throw ConfigError("scales must be >= 1");
    manifest.scales[opts.gait + "_n" + std::to_string(n)] = n;
    const TiltAngles alpha = waveform->evaluate(phase) / static_cast<double>(n);
    SingularLocus locus;
    try {
      locus = locus_sweep(alpha, grid);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    const std::string file = "locus_" + waveform->name() + "_n" + std::to_string(n) + ".csv";
    manifest.write_artifact(file, locus_csv(locus));
    char line[160];
    std::snprintf(line, sizeof line, "  n=%d: %zu points, min distance %.6f rad -> %s\n", n,
                  locus.points.size(), locus.min_distance(), file.c_str());
    out << line;
  }
  manifest.save();
  return kExitOk;
}

int cmd_minscale(const MinScaleOptions& opts, std::ostream& out) {
  const SweepConfig cfg = load_or_default(opts.config_path);
  const auto waveform = load_gait_or_throw(opts.gait);
  AttitudeBox box = cfg.minscale_box;
  if (opts.roll_max) box.roll_max = *opts.roll_max;
  if (opts.pitch_max) box.pitch_max = *opts.pitch_max;
  MarginScanOptions scan = cfg.scan;
  scan.margin = opts.margin.value_or(cfg.base.controller.singularity_margin);
  try {
    out << min_scale(*waveform, box, scan) << "\n";
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return kExitOk;
}

std::string gait_trace_csv(const GaitSchedule& schedule) {
  std::string out = "t,alpha1,alpha2,alpha3,alpha4\n";
  const long rows = std::lround(schedule.period() * 1000.0);
  for (long k = 0; k < rows; ++k) {
    const double t = static_cast<double>(k) * 1e-3;
    const TiltAngles a = schedule.sample(t);
    out += fmt(t) + "," + fmt(a[0]) + "," + fmt(a[1]) + "," + fmt(a[2]) + "," + fmt(a[3]) + "\n";
  }
  return out;
}

int cmd_gait_emit(const GaitEmitOptions& opts, std::ostream& out) {
  if (!(opts.period > 0.0)) throw ConfigError("--period must be positive");
  const std::vector<std::string> names = opts.gaits.empty() ? builtin_gait_names() : opts.gaits;
  RunManifest manifest;
  manifest.output_dir = opts.out_dir;
  manifest.sweep_id = "gaits";
  manifest.periods = {opts.period};
  for (const auto& name : names) {
    const auto waveform = load_gait_or_throw(name);
    manifest.gaits.push_back(waveform->name());
    manifest.write_artifact(waveform->name() + ".gait", serialize_gait(*waveform));
    manifest.write_artifact(waveform->name() + "_trace.csv",
                            gait_trace_csv(GaitSchedule(waveform, opts.period)));
    out << "wrote " << (opts.out_dir / (waveform->name() + ".gait")).string() << " and trace\n";
  }
  manifest.save();
  return kExitOk;
}

int cmd_gait_scale(const GaitScaleOptions& opts, std::ostream& out) {
  const auto waveform = load_gait_or_throw(opts.gait);
  if (opts.scale < 1) throw ConfigError("--scale must be >= 1");
  const auto scaled = scale_waveform(*waveform, opts.scale);
  const fs::path target = opts.out_file.empty() ? fs::path(scaled->name() + ".gait") : opts.out_file;
  write_file_artifact(target.has_parent_path() ? target.parent_path() : fs::path("."),
                      target.filename().string(), serialize_gait(*scaled));
  out << "wrote " << target.string() << "\n";
  return kExitOk;
}

int cmd_gait_validate(const GaitValidateOptions& opts, std::ostream& out) {
  const auto waveform = load_gait_or_throw(opts.gait);
  if (opts.scale < 1) throw ConfigError("--scale must be >= 1");
  char line[200];
  std::snprintf(line, sizeof line, "gait %s: %zu knots, %s interpolation, max |alpha| %.4f rad\n",
                waveform->name().c_str(), waveform->knots().size(),
                std::string(to_string(waveform->interpolation())).c_str(), waveform->max_abs_angle());
  out << line;

  int failures = 0;
  if (waveform->max_abs_angle() > 0.0) {
    const auto offsets = estimate_phase_offsets(*waveform);
    std::snprintf(line, sizeof line, "  phase offsets %.3f %.3f %.3f %.3f (%s)\n", offsets[0], offsets[1],
                  offsets[2], offsets[3], offsets_evenly_spaced(offsets) ? "symmetric" : "asymmetric");
    out << line;
  }
  MarginScanOptions scan;
  scan.margin = opts.margin;
  const double worst =
      worst_condition(*waveform, opts.scale, AttitudeBox{opts.roll_max, opts.pitch_max}, scan);
  const bool ok = std::abs(worst) > opts.margin;
  std::snprintf(line, sizeof line,
                "  scale 1/%d over box +/-%g x +/-%g rad: worst |condition| %.4f vs margin %.3f: %s\n",
                opts.scale, opts.roll_max, opts.pitch_max, worst, opts.margin,
                ok ? "ok" : "MARGIN VIOLATION");
  out << line;
  if (!ok) ++failures;
  return failures == 0 ? kExitOk : kExitPartialFailure;
}

}  // namespace tiltgait::cli
