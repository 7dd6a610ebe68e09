#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "tiltgait/config.hpp"
#include "tiltgait/simkit.hpp"

namespace tiltgait::cli {

enum ExitCode : int { kExitOk = 0, kExitConfigError = 1, kExitPartialFailure = 2 };

struct SimulateOptions {
  std::optional<std::string> config_path;
  std::filesystem::path out_root = "out";
  std::optional<std::string> gait;
  std::optional<double> period;
  std::optional<int> scale;
  std::optional<std::string> decoupler;
  std::optional<std::string> reference;
  std::optional<int> workers;
  std::optional<std::uint64_t> seed;
};

struct SimulateResult {
  int exit_code = kExitOk;
  std::filesystem::path sweep_dir;
  std::vector<ExperimentConfig> configs;
  std::vector<TrackingMetrics> metrics;  // logs already released
};

/// Loads the config (defaults when no path) and applies the flag overrides.
SweepConfig effective_config(const SimulateOptions& opts);

SimulateResult cmd_simulate(const SimulateOptions& opts, std::ostream& out);

/// Gait x period rows, one sup_error column per decoupler, one block per reference.
std::string radar_table(const std::vector<ExperimentConfig>& configs,
                        const std::vector<TrackingMetrics>& metrics);
std::string summary_csv(const std::vector<ExperimentConfig>& configs,
                        const std::vector<TrackingMetrics>& metrics);

struct LocusOptions {
  std::optional<std::string> config_path;
  std::string gait = "walk";
  std::vector<int> scales{1, 2, 3};
  std::optional<double> phase;  // default: max-amplitude phase
  std::optional<double> range;
  std::optional<int> resolution;
  std::filesystem::path out_dir = "out/locus";
};
int cmd_locus(const LocusOptions& opts, std::ostream& out);
std::string locus_csv(const SingularLocus& locus);

struct MinScaleOptions {
  std::optional<std::string> config_path;
  std::string gait = "walk";
  std::optional<double> roll_max, pitch_max, margin;
};
int cmd_minscale(const MinScaleOptions& opts, std::ostream& out);

struct GaitEmitOptions {
  std::vector<std::string> gaits;  // empty: all built-ins
  double period = 1.0;
  std::filesystem::path out_dir = "out/gaits";
};
int cmd_gait_emit(const GaitEmitOptions& opts, std::ostream& out);
/// t, alpha1..alpha4 at 1 kHz over one period.
std::string gait_trace_csv(const GaitSchedule& schedule);

struct GaitScaleOptions {
  std::string gait;
  int scale = 1;
  std::filesystem::path out_file;
};
int cmd_gait_scale(const GaitScaleOptions& opts, std::ostream& out);

struct GaitValidateOptions {
  std::string gait;
  int scale = 1;
  double roll_max = 0.3, pitch_max = 0.3;
  double margin = kDefaultSingularityMargin;
};
/// 0 when every check passes, 2 when the gait loads but a check fails.
int cmd_gait_validate(const GaitValidateOptions& opts, std::ostream& out);

}  // namespace tiltgait::cli
