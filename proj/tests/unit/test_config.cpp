#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "config.hpp"
#include "fixtures.hpp"

using namespace monotomo;
using namespace monotomo::cli;

namespace {

RunConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

}  // namespace

TEST(CallParser, NestedExpressions) {
  const Call c = parse_call(" union( circle(0.2, -1e-1, 0.3), rect(0,0,1,1) ) ");
  EXPECT_EQ(c.name, "union");
  ASSERT_EQ(c.args.size(), 2u);
  const Call& circle = std::get<Call>(c.args[0]);
  EXPECT_EQ(circle.name, "circle");
  EXPECT_EQ(std::get<double>(circle.args[1]), -0.1);
  EXPECT_EQ(parse_call("tabulated(\"a b.csv\")").args.size(), 1u);
  EXPECT_EQ(std::get<std::string>(parse_call("tabulated(\"a b.csv\")").args[0]), "a b.csv");
  EXPECT_TRUE(parse_call("empty()").args.empty());
}

TEST(CallParser, SyntaxErrors) {
  for (const char* bad : {"circle(0.2, 0.1", "circle 0.2", "circle(0.2,,1)", "(1)", "circle(1) x", "tabulated(\"x)"}) {
    EXPECT_THROW(parse_call(bad), ConfigError) << bad;
  }
}

TEST(LawDsl, BuildsLaws) {
  EXPECT_DOUBLE_EQ(parse_law("linear(3)").gamma(7.0), 3.0);
  EXPECT_DOUBLE_EQ(parse_law("monomial(3, 2)").gamma(2.0), 4.0);
  const MaterialLaw mix = parse_law("superconducting-mixture()");
  EXPECT_DOUBLE_EQ(mix.gamma(1e3), laws::superconducting_mixture().gamma(1e3));
  EXPECT_DOUBLE_EQ(parse_law("steel-surrogate(80)").gamma(10.0), laws::steel_surrogate(80).gamma(10.0));
  EXPECT_DOUBLE_EQ(parse_law("saturating(8000, 50)").gamma(20.0),
                   MaterialLaw::saturating(8000, 50, 0.1, kMu0).gamma(20.0));
  EXPECT_THROW(parse_law("saturating(0.5, 50)"), ConfigError);
}

TEST(LawDsl, Errors) {
  EXPECT_THROW(parse_law("linear()"), ConfigError);
  EXPECT_THROW(parse_law("linear(1, 2)"), ConfigError);
  EXPECT_THROW(parse_law("linear(-1)"), ConfigError);
  EXPECT_THROW(parse_law("magic(1)"), ConfigError);
  EXPECT_THROW(parse_law("bruggeman(0.1, 1, 2)"), ConfigError);
  EXPECT_THROW(parse_law("tabulated(1)"), ConfigError);
  EXPECT_THROW(parse_law("tabulated(\"no-such-file.csv\")"), ConfigError);
}

TEST(LawDsl, TabulatedRelativeToBase) {
  const auto dir = std::filesystem::temp_directory_path() / "monotomo_config_tab";
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "law.csv") << "s,gamma\n0,2\n1,3\n2,3.5\n";
  const MaterialLaw law = parse_law("tabulated(\"law.csv\")", dir);
  EXPECT_DOUBLE_EQ(law.gamma(1.0), 3.0);
  std::filesystem::remove_all(dir);
}

TEST(RegionDsl, ScalesByRadius) {
  const Region c = parse_region("circle(0.5, 0, 0.25)", 2.0);
  EXPECT_TRUE(c.contains({1.0, 0.0}));
  EXPECT_TRUE(c.contains({1.45, 0.0}));
  EXPECT_FALSE(c.contains({1.55, 0.0}));
  const Region u = parse_region("union(rect(-0.5,-0.5,-0.4,-0.4), polygon(0,0, 0.2,0, 0,0.2))", 1.0);
  EXPECT_TRUE(u.contains({-0.45, -0.45}));
  EXPECT_TRUE(u.contains({0.05, 0.05}));
  EXPECT_FALSE(u.contains({0.3, 0.3}));
  EXPECT_TRUE(parse_region("hollow(0, 0, 0.6, 0.3)", 1.0).contains({0.45, 0.0}));
  EXPECT_FALSE(parse_region("hollow(0, 0, 0.6, 0.3)", 1.0).contains({0.0, 0.0}));
  EXPECT_FALSE(parse_region("empty()", 1.0).contains({0.0, 0.0}));
}

TEST(RegionDsl, Errors) {
  EXPECT_THROW(parse_region("circle(0, 0)", 1.0), ConfigError);
  EXPECT_THROW(parse_region("circle(0, 0, -1)", 1.0), ConfigError);
  EXPECT_THROW(parse_region("polygon(0, 0, 1, 0)", 1.0), ConfigError);
  EXPECT_THROW(parse_region("union(circle(0,0,0.1), 3)", 1.0), ConfigError);
  EXPECT_THROW(parse_region("star(0, 0, 1)", 1.0), ConfigError);
  EXPECT_THROW(parse_region("hollow(0, 0, 0.3, 0.6)", 1.0), ConfigError);
}

TEST(ConfigFile, ShippedScenarios) {
  const RunConfig steady = monotomo::testing::shipped_config("steady_currents");
  EXPECT_EQ(steady.physics, Physics::SteadyCurrents);
  EXPECT_EQ(steady.regime, Regime::Separated);
  const RunConfig mag = monotomo::testing::shipped_config("magnetostatic");
  EXPECT_EQ(mag.physics, Physics::Magnetostatic);
  EXPECT_EQ(mag.regime, Regime::Intersecting);
  EXPECT_DOUBLE_EQ(mag.background, kMu0);
  EXPECT_DOUBLE_EQ(mag.bounds.upper, 8000 * kMu0);
  EXPECT_EQ(mag.potentials.directions, 8);
  EXPECT_EQ(mag.noise.seed, 1u);
  EXPECT_DOUBLE_EQ(mag.max_reading, 20.0);
  const RunConfig lin = monotomo::testing::shipped_config("linear_disk");
  EXPECT_EQ(lin.noise.ranges.size(), 1u);
  EXPECT_EQ(lin.max_reading, 0.0);
}

TEST(ConfigFile, Defaults) {
  const RunConfig c = parse("");
  EXPECT_EQ(c.grid.n, 8);
  EXPECT_DOUBLE_EQ(c.grid.roi_fraction, 0.95);
  EXPECT_EQ(c.noise_preset, "keithley-2002");
  EXPECT_DOUBLE_EQ(c.max_reading, 20.0);
  EXPECT_EQ(c.out, "out");
}

TEST(ConfigFile, Quantities) {
  EXPECT_DOUBLE_EQ(parse("[scenario]\nbackground = mu0\n").background, kMu0);
  EXPECT_DOUBLE_EQ(parse("[scenario]\nbackground = 2.5 * mu0\n").background, 2.5 * kMu0);
  EXPECT_DOUBLE_EQ(parse("[scenario]\nbackground = 1e7\n").background, 1e7);
  EXPECT_THROW(parse("[scenario]\nbackground = 2mu0\n"), ConfigError);
  EXPECT_THROW(parse("[scenario]\nbackground = 1e7x\n"), ConfigError);
}

TEST(ConfigFile, RejectsUnknownAndBadValues) {
  EXPECT_THROW(parse("[scenario]\nradious = 1\n"), ConfigError);
  EXPECT_THROW(parse("[extras]\nx = 1\n"), ConfigError);
  EXPECT_THROW(parse("radius = 1\n"), ConfigError);
  EXPECT_THROW(parse("[grid]\nn = eight\n"), ConfigError);
  EXPECT_THROW(parse("[grid]\nn = 0\n"), ConfigError);
  EXPECT_THROW(parse("[grid]\nroi = 1\n"), ConfigError);
  EXPECT_THROW(parse("[scenario]\nregime = mixed\n"), ConfigError);
  EXPECT_THROW(parse("[scenario]\nphysics = acoustic\n"), ConfigError);
  EXPECT_THROW(parse("[potentials]\nconvex = maybe\n"), ConfigError);
  EXPECT_THROW(parse("[potentials]\nalpha = 1\n"), ConfigError);
  EXPECT_THROW(parse("[solver]\nmax_iter = 0\n"), ConfigError);
  EXPECT_THROW(parse("[scenario]\nrings = 0\n"), ConfigError);
}

TEST(ConfigFile, NoiseSection) {
  const RunConfig c = parse("[noise]\npreset = custom\nranges = 1:1e-3:0, 5:2e-3:1e-4\nseed = 9\n");
  ASSERT_EQ(c.noise.ranges.size(), 2u);
  EXPECT_DOUBLE_EQ(c.noise.ranges[1].eta2, 1e-4);
  EXPECT_EQ(c.noise.seed, 9u);
  EXPECT_DOUBLE_EQ(c.max_reading, 5.0);
  EXPECT_THROW(parse("[noise]\npreset = custom\nranges = 5:0:0, 1:0:0\n"), ConfigError);
  EXPECT_THROW(parse("[noise]\npreset = custom\nranges = 1:1:0\n"), ConfigError);
  EXPECT_THROW(parse("[noise]\npreset = custom\nranges = 1:0\n"), ConfigError);
  EXPECT_THROW(parse("[noise]\npreset = custom\n"), ConfigError);
  EXPECT_THROW(parse("[noise]\nranges = 1:0:0\n"), ConfigError);
  EXPECT_THROW(parse("[noise]\npreset = loud\n"), ConfigError);
  EXPECT_EQ(parse("[noise]\npreset = noiseless\n").max_reading, 0.0);
}

TEST(ConfigFile, BuildScenarioReportsProblems) {
  RunConfig c = parse("[scenario]\nbackground = 1e7\nlaw = linear(1e6)\nlower = 1e6\nupper = 1e6\n");
  try {
    c.build_scenario();
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("separated regime"), std::string::npos);
  }
  c = parse("[scenario]\nrings = 4\nmeasurement_rings = 8\nlaw = linear(2)\nlower = 2\nupper = 2\n");
  const Scenario s = c.build_scenario();
  ASSERT_TRUE(s.measurement_disc);
  EXPECT_GT(s.measurement_disc->mesh().num_nodes(), s.disc->mesh().num_nodes());
}

TEST(ConfigFile, MissingFile) { EXPECT_THROW(load_config("/nonexistent/monotomo.ini"), ConfigError); }

TEST(Traces, Parse) {
  EXPECT_DOUBLE_EQ(parse_trace("cos:2")(0.25), std::cos(0.5));
  EXPECT_DOUBLE_EQ(parse_trace("sin:1")(0.25), std::sin(0.25));
  EXPECT_EQ(parse_trace("zero")(1.0), 0.0);
  for (const char* bad : {"cos:0", "cos:x", "tan:1", "cos:1.5", "cos"}) EXPECT_THROW(parse_trace(bad), ConfigError) << bad;
}
