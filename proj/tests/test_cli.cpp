#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <random>
#include <sstream>

#include "commands.hpp"
#include "tiltgait/config.hpp"
#include "tiltgait/manifest.hpp"

using namespace tiltgait;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    std::random_device rd;
    path = fs::temp_directory_path() / ("tiltgait-test-" + std::to_string(rd()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t line_count(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST_CASE("ini parsing") {
  const auto doc = IniDocument::parse("top = 1\n[a]\nx = 2 # c\n; full comment\n  y=  hello world \n[b]\n");
  CHECK(doc.sections.at("").at("top") == "1");
  CHECK(doc.sections.at("a").at("x") == "2");
  CHECK(doc.sections.at("a").at("y") == "hello world");
  CHECK(doc.sections.at("b").empty());
  CHECK_THROWS_AS(IniDocument::parse("[a\n"), ConfigError);
  CHECK_THROWS_AS(IniDocument::parse("[a]\nnovalue\n"), ConfigError);
  CHECK_THROWS_AS(IniDocument::parse("[a]\nx=1\nx=2\n"), ConfigError);
}

TEST_CASE("sweep config defaults and overrides") {
  const SweepConfig def = parse_sweep_config("");
  CHECK(def.expand().size() == 48);
  CHECK(def.scale_for("walk") == 3);
  CHECK(def.scale_for("run") == 1);

  const SweepConfig cfg = parse_sweep_config(
      "[vehicle]\nmass = 0.5\n"
      "[dynamics]\ncoriolis = on\n"
      "[controller]\nroll_kp = 25\nyaw_kd = 3\nlateral_allocation = torque_free\n"
      "[simulation]\nrectilinear_y = zero\nseed = 7\n"
      "[sweep]\ngaits = walk, run\nperiods = 1.5\ndecouplers = modified\nreferences = hover\n"
      "[scales]\nwalk = auto\n");
  CHECK(cfg.base.vehicle.mass == 0.5);
  CHECK(cfg.base.controller.dynamics.coriolis);
  CHECK(cfg.base.controller.attitude_gains.channel[0].kp == 25.0);
  CHECK(cfg.base.controller.attitude_gains.channel[2].kd == 3.0);
  CHECK(cfg.base.controller.lateral_allocation == LateralAllocation::kTorqueFree);
  CHECK(cfg.base.reference.rectilinear_y_zero);
  CHECK(cfg.base.seed == 7);
  const auto runs = cfg.expand();
  REQUIRE(runs.size() == 2);
  CHECK(runs[0].gait == "walk");
  CHECK(runs[0].period == 1.5);
  CHECK(runs[0].reference.kind == ReferenceKind::kHover);
  CHECK(runs[0].scale == min_scale(*builtin_gait("walk"), AttitudeBox{0.4, 0.4}, cfg.scan));

  CHECK_THROWS_WITH_AS(parse_sweep_config("[vehicle]\nmas = 1\n"), doctest::Contains("vehicle.mas"), ConfigError);
  CHECK_THROWS_AS(parse_sweep_config("[vehicle]\nmass = heavy\n"), ConfigError);
  CHECK_THROWS_AS(parse_sweep_config("[vehicle]\nmass = -1\n"), ConfigError);
  CHECK_THROWS_AS(parse_sweep_config("[sweep]\ndecouplers = fancy\n"), ConfigError);
  CHECK_THROWS_AS(parse_sweep_config("[sweep]\nperiods = \n"), ConfigError);
  CHECK_THROWS_AS(parse_sweep_config("[scales]\nwalk = 0\n"), ConfigError);
  CHECK_THROWS_AS(parse_sweep_config("[dynamics]\ncoriolis = maybe\n"), ConfigError);
}

TEST_CASE("config serialization round-trips") {
  const SweepConfig cfg = parse_sweep_config(
      "[controller]\nposition_kd = 1.7000000000000002\n[simulation]\nstep = 0.0005\nduration = 30\n"
      "[sweep]\nperiods = 0.1, 2, 3.3333333333333335\n[scales]\nrun = 2\n");
  const std::string text = serialize_sweep_config(cfg);
  const SweepConfig back = parse_sweep_config(text);
  CHECK(serialize_sweep_config(back) == text);
  CHECK(back.base.controller.position_gains.kd == 1.7000000000000002);
  CHECK(back.periods == std::vector<double>{0.1, 2.0, 3.3333333333333335});
  CHECK(back.scales.at("run") == 2);
}

TEST_CASE("shipped example config equals the defaults") {
  const SweepConfig shipped = load_sweep_config(std::string(TILTGAIT_DATA_DIR) + "/sweep.ini");
  CHECK(serialize_sweep_config(shipped) == serialize_sweep_config(SweepConfig{}));
}

TEST_CASE("sha256 and manifest") {
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(sweep_id_for("x") == sweep_id_for("x"));
  CHECK(sweep_id_for("x") != sweep_id_for("y"));

  TempDir tmp;
  RunManifest m;
  m.output_dir = tmp.path / "m";
  m.write_artifact("a/b.txt", "hello");
  m.save();
  CHECK(slurp(m.output_dir / "a/b.txt") == "hello");
  CHECK(m.artifacts.at(0).bytes == 5);
  CHECK(verify_artifacts(m.output_dir / "manifest.json").empty());
  std::ofstream(m.output_dir / "a/b.txt") << "tampered";
  CHECK(verify_artifacts(m.output_dir / "manifest.json") == std::vector<std::string>{"a/b.txt"});
}

TEST_CASE("simulate command") {
  TempDir tmp;
  const fs::path ini = tmp.path / "short.ini";
  std::ofstream(ini) << "[simulation]\nduration = 2\nsettle_time = 1\n[output]\nlog_every = 10\n";

  cli::SimulateOptions opts;
  opts.config_path = ini.string();
  opts.out_root = tmp.path / "out";
  opts.gait = "walk";
  opts.period = 1.0;
  opts.decoupler = "modified";
  opts.reference = "circular";
  std::ostringstream out;
  const auto res = cli::cmd_simulate(opts, out);
  CHECK(res.exit_code == cli::kExitOk);
  REQUIRE(res.configs.size() == 1);
  const fs::path run_dir = res.sweep_dir / "walk-n3-T1-modified-circular";
  CHECK(fs::exists(run_dir / "metrics.txt"));
  CHECK(line_count(slurp(run_dir / "log.csv")) == 1 + 201);
  CHECK(line_count(slurp(res.sweep_dir / "summary.csv")) == 2);
  CHECK(verify_artifacts(res.sweep_dir / "manifest.json").empty());
  CHECK(out.str().find("walk n=3") != std::string::npos);

  // Thin shell: the metrics record equals the library's for the same config.
  ExperimentConfig direct = res.configs[0];
  CHECK(slurp(run_dir / "metrics.txt") == metrics_record(direct, run_experiment(direct)));

  // Feeding the echoed config back reproduces the sweep id and the run.
  cli::SimulateOptions again;
  again.config_path = (res.sweep_dir / "config.ini").string();
  again.out_root = tmp.path / "again";
  const auto res2 = cli::cmd_simulate(again, out);
  CHECK(res2.sweep_dir.filename() == res.sweep_dir.filename());
  CHECK(slurp(res2.sweep_dir / "walk-n3-T1-modified-circular/metrics.txt") == slurp(run_dir / "metrics.txt"));

  const auto manifest = nlohmann::json::parse(slurp(res.sweep_dir / "manifest.json"));
  CHECK(manifest.at("runs").size() == 1);
  CHECK(manifest.at("axes").at("scales").at("walk") == 3);

  SUBCASE("unscaled walk is reported and the exit code flags it") {
    cli::SimulateOptions bad = opts;
    bad.scale = 1;
    const auto r = cli::cmd_simulate(bad, out);
    CHECK(r.exit_code == cli::kExitPartialFailure);
    CHECK(r.metrics.at(0).status == RunStatus::kSingularGait);
    const auto mj = nlohmann::json::parse(slurp(r.sweep_dir / "manifest.json"));
    CHECK(mj.at("runs").at(0).at("status") == "singular_gait");
  }
  SUBCASE("invalid overrides are config errors") {
    cli::SimulateOptions bad = opts;
    bad.decoupler = "fancy";
    CHECK_THROWS_AS(cli::cmd_simulate(bad, out), ConfigError);
    bad = opts;
    bad.gait = "no-such-gait";
    CHECK_THROWS_AS(cli::cmd_simulate(bad, out), ConfigError);
  }
}

TEST_CASE("locus command") {
  TempDir tmp;
  std::ostringstream out;
  cli::LocusOptions opts;
  opts.out_dir = tmp.path;
  opts.resolution = 61;
  CHECK(cli::cmd_locus(opts, out) == 0);
  for (int n : {1, 2, 3}) CHECK(fs::exists(tmp.path / ("locus_walk_n" + std::to_string(n) + ".csv")));
  CHECK(line_count(slurp(tmp.path / "locus_walk_n1.csv")) > 1);

  opts.gait = "hover";
  CHECK(cli::cmd_locus(opts, out) == 0);
  for (int n : {1, 2, 3}) CHECK(slurp(tmp.path / ("locus_hover_n" + std::to_string(n) + ".csv")) == "roll,pitch\n");
  CHECK(verify_artifacts(tmp.path / "manifest.json").empty());
}

TEST_CASE("minscale command") {
  std::ostringstream out;
  cli::MinScaleOptions opts;
  opts.gait = "run";
  CHECK(cli::cmd_minscale(opts, out) == 0);
  CHECK(out.str() == "1\n");
  opts.roll_max = 1.56;
  opts.pitch_max = 1.56;
  CHECK_THROWS_AS(cli::cmd_minscale(opts, out), ConfigError);
}

TEST_CASE("gait commands") {
  TempDir tmp;
  std::ostringstream out;

  cli::GaitEmitOptions emit;
  emit.gaits = {"walk"};
  emit.out_dir = tmp.path / "gaits";
  CHECK(cli::cmd_gait_emit(emit, out) == 0);
  const std::string trace = slurp(emit.out_dir / "walk_trace.csv");
  CHECK(line_count(trace) == 1001);
  CHECK(trace.substr(0, trace.find('\n')) == "t,alpha1,alpha2,alpha3,alpha4");
  CHECK(load_gait_file((emit.out_dir / "walk.gait").string())->knots().size() == 32);

  cli::GaitScaleOptions scale{"walk", 3, tmp.path / "walk3.gait"};
  CHECK(cli::cmd_gait_scale(scale, out) == 0);
  const auto w3 = load_gait_file(scale.out_file.string());
  const auto w = builtin_gait("walk");
  for (std::size_t i = 0; i < w->knots().size(); ++i) CHECK(w3->knots()[i].angles == w->knots()[i].angles / 3.0);

  cli::GaitValidateOptions val;
  val.gait = "walk";
  std::ostringstream report;
  CHECK(cli::cmd_gait_validate(val, report) == cli::kExitPartialFailure);
  CHECK(report.str().find("MARGIN VIOLATION") != std::string::npos);
  val.gait = scale.out_file.string();
  CHECK(cli::cmd_gait_validate(val, report) == cli::kExitOk);
  val.gait = "rotary_gallop";
  std::ostringstream gallop;
  cli::cmd_gait_validate(val, gallop);
  CHECK(gallop.str().find("asymmetric") != std::string::npos);
}
