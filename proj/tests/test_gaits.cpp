#include <doctest.h>

#include <cmath>
#include <random>

#include "test_support.hpp"
#include "tiltgait/gaits.hpp"

using namespace tiltgait;

namespace {

std::shared_ptr<const GaitWaveform> four_knot(Interpolation interp = Interpolation::kCubicPeriodic) {
  std::vector<GaitKnot> knots{{0.0, TiltAngles(0.1, -0.2, 0.3, -0.4)},
                              {0.25, TiltAngles(0.5, 0.0, -0.1, 0.2)},
                              {0.5, TiltAngles(-0.3, 0.4, 0.0, 0.1)},
                              {0.75, TiltAngles(0.0, -0.1, 0.2, -0.3)}};
  return std::make_shared<GaitWaveform>("test", knots, 0.5, interp);
}

}  // namespace

TEST_CASE("waveform validation") {
  std::vector<GaitKnot> three{{0.0, TiltAngles::Zero()}, {0.3, TiltAngles::Zero()}, {0.6, TiltAngles::Zero()}};
  CHECK_THROWS_AS(GaitWaveform("x", three, 1.0), GaitValidationError);

  std::vector<GaitKnot> dup{{0.0, TiltAngles::Zero()},
                            {0.25, TiltAngles::Zero()},
                            {0.25, TiltAngles::Zero()},
                            {0.5, TiltAngles::Zero()}};
  CHECK_THROWS_WITH_AS(GaitWaveform("x", dup, 1.0), doctest::Contains("phases strictly increasing"),
                       GaitValidationError);

  std::vector<GaitKnot> out{{0.0, TiltAngles::Zero()},
                            {0.25, TiltAngles::Zero()},
                            {0.5, TiltAngles::Zero()},
                            {1.0, TiltAngles::Zero()}};
  CHECK_THROWS_AS(GaitWaveform("x", out, 1.0), GaitValidationError);
}

TEST_CASE("interpolation passes through the knots and is periodic") {
  for (auto interp : {Interpolation::kLinear, Interpolation::kCubicPeriodic}) {
    const auto w = four_knot(interp);
    for (const auto& k : w->knots()) CHECK((w->evaluate(k.phase) - k.angles).norm() < 1e-14);
    CHECK((w->evaluate(1.0) - w->evaluate(0.0)).norm() < 1e-12);
    CHECK((w->evaluate(-0.3) - w->evaluate(0.7)).norm() < 1e-12);
    CHECK((w->evaluate(2.6) - w->evaluate(0.6)).norm() < 1e-12);
  }
  // Linear interpolation halfway between knots.
  const auto lin = four_knot(Interpolation::kLinear);
  CHECK((lin->evaluate(0.125) - 0.5 * (lin->knots()[0].angles + lin->knots()[1].angles)).norm() < 1e-14);
}

TEST_CASE("cubic spline is C1 across the wrap") {
  const auto w = four_knot();
  const double h = 1e-6;
  const TiltAngles left = (w->evaluate(1.0 - h) - w->evaluate(1.0 - 2 * h)) / h;
  const TiltAngles right = (w->evaluate(h) - w->evaluate(0.0)) / h;
  CHECK((left - right).norm() < 1e-3);
}

TEST_CASE("built-in gaits") {
  CHECK(builtin_gait_names() ==
        std::vector<std::string>{"walk", "run", "transverse_gallop", "rotary_gallop"});
  for (const auto& name : builtin_gait_names()) {
    const auto w = builtin_gait(name);
    CHECK(w->name() == name);
    CHECK(w->knots().size() == static_cast<std::size_t>(kDefaultGaitKnots));
    CHECK((w->evaluate(0.0) - w->evaluate(1.0)).norm() < 1e-12);
  }
  CHECK(builtin_gait("hover")->max_abs_angle() == 0.0);
  CHECK_THROWS(builtin_gait("trot"));
}

TEST_CASE("footfall offsets: symmetric and asymmetric gaits") {
  const auto walk = estimate_phase_offsets(*builtin_gait("walk"));
  CHECK(walk[0] == doctest::Approx(0.0).epsilon(0.01));
  CHECK(walk[1] == doctest::Approx(0.25).epsilon(0.01));
  CHECK(walk[2] == doctest::Approx(0.5).epsilon(0.01));
  CHECK(walk[3] == doctest::Approx(0.75).epsilon(0.01));
  CHECK(offsets_evenly_spaced(walk));
  CHECK(offsets_evenly_spaced(estimate_phase_offsets(*builtin_gait("run"))));
  CHECK_FALSE(offsets_evenly_spaced(estimate_phase_offsets(*builtin_gait("transverse_gallop"))));
  CHECK_FALSE(offsets_evenly_spaced(estimate_phase_offsets(*builtin_gait("rotary_gallop"))));
}

TEST_CASE("footfall construction matches the triangle wave") {
  FootfallPattern pat{{0.0, 0.25, 0.5, 0.75}, 0.75, 1.0};
  const auto w = make_footfall_gait("probe", pat, 64);
  // Rotor 1 starts its stance at +A and reaches -A at the duty fraction.
  CHECK(w->knots()[0].angles[0] == doctest::Approx(1.0));
  CHECK(w->knots()[48].angles[0] == doctest::Approx(-1.0));
  CHECK(w->knots()[24].angles[0] == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("schedule sampling and scaling") {
  const auto w = builtin_gait("walk");
  const GaitSchedule s(w, 1.0);
  CHECK(s.sample(0.0) == w->knots()[0].angles);

  std::mt19937_64 rng(11);
  const GaitSchedule s3 = s.scaled(3);
  for (int i = 0; i < 500; ++i) {
    const double t = test::uniform(rng, 0.0, 10.0);
    const TiltAngles a = s.sample(t);
    CHECK(s3.sample(t) == a / 3.0);  // exact
    CHECK((s.sample(t + 1.0) - a).norm() < 1e-12);
    CHECK(s.scaled(1).sample(t) == a);
    // Re-perioding is time dilation.
    const GaitSchedule slow = s.with_period(2.5);
    CHECK((slow.sample(2.5 * t) - a).norm() < 1e-12);
  }

  auto max_over_period = [](const GaitSchedule& g) {
    double m = 0.0;
    for (int k = 0; k < 1000; ++k) m = std::max(m, g.sample(k * g.period() / 1000).cwiseAbs().maxCoeff());
    return m;
  };
  const double base = max_over_period(s);
  CHECK(max_over_period(s.scaled(2)) == doctest::Approx(base / 2).epsilon(1e-12));
  CHECK(max_over_period(s.scaled(1000)) < 0.01 * base * 10);

  CHECK_THROWS_AS(s.scaled(0), std::invalid_argument);
  CHECK_THROWS_AS(GaitSchedule(w, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(GaitSchedule(w, 1.0, 0), std::invalid_argument);
}

TEST_CASE("scale_waveform divides every knot") {
  const auto w = builtin_gait("walk");
  const auto w3 = scale_waveform(*w, 3);
  CHECK(w3->name() == "walk_n3");
  for (std::size_t i = 0; i < w->knots().size(); ++i) {
    CHECK(w3->knots()[i].phase == w->knots()[i].phase);
    CHECK(w3->knots()[i].angles == w->knots()[i].angles / 3.0);
  }
  for (double ph : {0.013, 0.37, 0.81}) CHECK((w3->evaluate(ph) - w->evaluate(ph) / 3.0).norm() < 1e-15);
  CHECK_THROWS_AS(scale_waveform(*w, 0), std::invalid_argument);
}

TEST_CASE("gait file parsing") {
  const std::string text =
      "# four knots\n"
      "gait demo amplitude 0.5\n"
      "interpolation linear\n"
      "knot 0    0.1 -0.2 0.3 -0.4\n"
      "knot 0.25 0.5 0 -0.1 0.2   # trailing comment\n"
      "knot 0.5  -0.3 0.4 0 0.1\n"
      "knot 0.75 0 -0.1 0.2 -0.3\n";
  const auto w = parse_gait_file(text);
  CHECK(w->name() == "demo");
  CHECK(w->base_amplitude() == 0.5);
  CHECK(w->interpolation() == Interpolation::kLinear);
  REQUIRE(w->knots().size() == 4);
  CHECK(w->knots()[1].angles == TiltAngles(0.5, 0, -0.1, 0.2));

  CHECK_THROWS_AS(parse_gait_file(""), GaitParseError);
  CHECK_THROWS_WITH_AS(parse_gait_file("gait x amplitude 1\nknot 0 1 2 3\n"), doctest::Contains("line 2"),
                       GaitParseError);
  CHECK_THROWS_AS(parse_gait_file("gait x amplitude 1\nknot 0 a 0 0 0\n"), GaitParseError);
  CHECK_THROWS_AS(parse_gait_file("knot 0 0 0 0 0\n"), GaitParseError);
  CHECK_THROWS_AS(parse_gait_file("gait x amplitude 1\nwobble\n"), GaitParseError);
  CHECK_THROWS_WITH_AS(parse_gait_file("gait x amplitude 1\n"
                                       "knot 0 0 0 0 0\nknot 0.25 0 0 0 0\nknot 0.25 0 0 0 0\nknot 0.5 0 0 0 0\n"),
                       doctest::Contains("phases strictly increasing"), GaitValidationError);
}

TEST_CASE("serialize and parse round-trip bit-exactly") {
  for (const auto& name : builtin_gait_names()) {
    const auto w = builtin_gait(name);
    const auto back = parse_gait_file(serialize_gait(*w));
    CHECK(back->name() == w->name());
    CHECK(back->base_amplitude() == w->base_amplitude());
    CHECK(back->interpolation() == w->interpolation());
    REQUIRE(back->knots().size() == w->knots().size());
    for (std::size_t i = 0; i < w->knots().size(); ++i) {
      CHECK(back->knots()[i].phase == w->knots()[i].phase);
      CHECK(back->knots()[i].angles == w->knots()[i].angles);
    }
  }
}

TEST_CASE("shipped gait files equal the built-ins") {
  for (const auto& name : builtin_gait_names()) {
    const auto file = load_gait_file(std::string(TILTGAIT_DATA_DIR) + "/gaits/" + name + ".gait");
    const auto w = builtin_gait(name);
    for (std::size_t i = 0; i < w->knots().size(); ++i) CHECK(file->knots()[i].angles == w->knots()[i].angles);
  }
  CHECK(resolve_gait(std::string(TILTGAIT_DATA_DIR) + "/gaits/walk.gait")->name() == "walk");
  CHECK_THROWS(resolve_gait("/nonexistent/gait"));
}
