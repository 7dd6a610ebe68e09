#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "tiltgait/simkit.hpp"
#include "tiltgait/singularity.hpp"

namespace tiltgait {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// `[section]` headers and `key = value` lines; `#` and `;` start comments.
/// Keys before the first header land in section "".
struct IniDocument {
  std::map<std::string, std::map<std::string, std::string>> sections;

  static IniDocument parse(std::string_view text);
  std::string serialize() const;
};

/// Everything one `simulate` invocation needs: the per-run defaults plus the
/// sweep axes they are expanded over.
struct SweepConfig {
  ExperimentConfig base;

  std::vector<std::string> gaits{"walk", "run", "transverse_gallop", "rotary_gallop"};
  /// Scale per gait; 0 selects min_scale over the tilt-limit box. Gaits not
  /// listed use `default_scale`.
  std::map<std::string, int> scales{{"walk", 3}, {"run", 1}, {"transverse_gallop", 3},
                                    {"rotary_gallop", 3}};
  int default_scale = 0;
  std::vector<double> periods{1.0, 2.0, 3.0};
  std::vector<DecouplerKind> decouplers{DecouplerKind::kConventional, DecouplerKind::kModified};
  std::vector<ReferenceKind> references{ReferenceKind::kRectilinear, ReferenceKind::kCircular};

  int workers = 1;
  bool write_logs = true;
  int log_every = 1;

  LocusGrid locus_grid;
  AttitudeBox minscale_box{0.3, 0.3};
  MarginScanOptions scan;

  /// Scale used for `gait`, resolving `auto` through min_scale.
  int scale_for(const std::string& gait) const;
  /// One ExperimentConfig per point of gaits x periods x decouplers x references.
  std::vector<ExperimentConfig> expand() const;
  void validate() const;
};

SweepConfig parse_sweep_config(std::string_view text);
SweepConfig load_sweep_config(const std::string& path);
/// Inverse of parse_sweep_config; every value is written, doubles exactly.
std::string serialize_sweep_config(const SweepConfig& cfg);

}  // namespace tiltgait
