#include <CLI11.hpp>
#include <iostream>

#include "commands.hpp"

using namespace tiltgait;
using namespace tiltgait::cli;

int main(int argc, char** argv) {
  CLI::App app{"Tilt-rotor gait tracking: simulation sweeps, singularity atlases, gait tools"};
  app.require_subcommand(1);

  SimulateOptions sim;
  std::string sim_out = "out";
  auto* simulate = app.add_subcommand("simulate", "Run the experiment sweep (or a single run)");
  simulate->add_option("--config", sim.config_path, "Config file (INI sections)");
  simulate->add_option("--out", sim_out, "Output root; runs go to <out>/<sweep-id>/")->capture_default_str();
  simulate->add_option("--gait", sim.gait, "Only this gait (name or .gait file)");
  simulate->add_option("--period", sim.period, "Only this gait period, s");
  simulate->add_option("--scale", sim.scale, "Scale every selected gait by 1/n");
  simulate->add_option("--decoupler", sim.decoupler, "conventional | modified");
  simulate->add_option("--reference", sim.reference, "hover | rectilinear | circular");
  simulate->add_option("--workers", sim.workers, "Concurrent runs");
  simulate->add_option("--seed", sim.seed, "Seed for the initial position noise");

  LocusOptions locus;
  std::string locus_out = "out/locus";
  auto* locus_cmd = app.add_subcommand("locus", "Singular attitude locus, one CSV per scale");
  locus_cmd->add_option("--config", locus.config_path, "Config file for grid defaults");
  locus_cmd->add_option("--gait", locus.gait)->capture_default_str();
  locus_cmd->add_option("--scales", locus.scales, "Scale divisors")->delimiter(',')->capture_default_str();
  locus_cmd->add_option("--phase", locus.phase, "Gait phase in [0,1); default: max amplitude");
  locus_cmd->add_option("--range", locus.range, "Roll/pitch half range, rad");
  locus_cmd->add_option("--resolution", locus.resolution, "Grid points per axis");
  locus_cmd->add_option("--out", locus_out)->capture_default_str();

  MinScaleOptions ms;
  auto* minscale = app.add_subcommand("minscale", "Smallest scale clearing the singularity margin");
  minscale->add_option("--config", ms.config_path);
  minscale->add_option("--gait", ms.gait)->capture_default_str();
  minscale->add_option("--roll-max", ms.roll_max, "Attitude box roll half width, rad");
  minscale->add_option("--pitch-max", ms.pitch_max, "Attitude box pitch half width, rad");
  minscale->add_option("--margin", ms.margin, "Required |condition| margin");

  auto* gait = app.add_subcommand("gait", "Gait files: emit, scale, validate");
  gait->require_subcommand(1);

  GaitEmitOptions emit;
  std::string emit_out = "out/gaits";
  auto* emit_cmd = gait->add_subcommand("emit", "Write gait files and 1 kHz traces");
  emit_cmd->add_option("--gait", emit.gaits, "Gaits to emit (default: all built-ins)");
  emit_cmd->add_option("--period", emit.period, "Trace period, s")->capture_default_str();
  emit_cmd->add_option("--out", emit_out)->capture_default_str();

  GaitScaleOptions scale;
  std::string scale_out;
  auto* scale_cmd = gait->add_subcommand("scale", "Divide every knot by n and write a new gait file");
  scale_cmd->add_option("--gait", scale.gait)->required();
  scale_cmd->add_option("--scale", scale.scale)->required();
  scale_cmd->add_option("--out", scale_out, "Output file (default: <name>_n<n>.gait)");

  GaitValidateOptions val;
  auto* validate = gait->add_subcommand("validate", "Check a gait and its singularity margin");
  validate->add_option("--gait", val.gait)->required();
  validate->add_option("--scale", val.scale)->capture_default_str();
  validate->add_option("--roll-max", val.roll_max)->capture_default_str();
  validate->add_option("--pitch-max", val.pitch_max)->capture_default_str();
  validate->add_option("--margin", val.margin)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfigError;
  }

  try {
    if (*simulate) {
      sim.out_root = sim_out;
      return cmd_simulate(sim, std::cout).exit_code;
    }
    if (*locus_cmd) {
      locus.out_dir = locus_out;
      return cmd_locus(locus, std::cout);
    }
    if (*minscale) return cmd_minscale(ms, std::cout);
    if (*emit_cmd) {
      emit.out_dir = emit_out;
      return cmd_gait_emit(emit, std::cout);
    }
    if (*scale_cmd) {
      scale.out_file = scale_out;
      return cmd_gait_scale(scale, std::cout);
    }
    if (*validate) return cmd_gait_validate(val, std::cout);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfigError;
  }
  return kExitOk;
}
