#include <gtest/gtest.h>

#include "gliderkit/commands.hpp"
#include "support.hpp"

using namespace gliderkit;
using testkit::run_command;

namespace {

const std::string kCli = GLIDERKIT_CLI_PATH;

std::string cli(const std::string& args) { return testkit::quoted(kCli) + " " + args; }

// One small scenario shared by every test in the suite.
class CommandsTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new testkit::TempDir("gk_cmd");
    write_file_atomic(params_file(), testkit::small_synth_params(21));
    ASSERT_EQ(run_command(cli("synth --params " + testkit::quoted(params_file()) + " --out " + testkit::quoted(scenario()))), 0);
  }
  static void TearDownTestSuite() {
    delete dir_;
    dir_ = nullptr;
  }
  static fs::path params_file() { return *dir_ / "synth.prm"; }
  static fs::path scenario() { return *dir_ / "scenario"; }
  static fs::path sample(const char* name) { return fs::path(GLIDERKIT_SAMPLES_DIR) / name; }
  static Params params_for(const char* sample_name) { return load_params(scenario(), sample(sample_name)); }

  static testkit::TempDir* dir_;
};

testkit::TempDir* CommandsTest::dir_ = nullptr;

}  // namespace

TEST_F(CommandsTest, SynthWritesTheScenarioTree) {
  for (const char* f : {"input.prm", "morphology.txt", "best_run.csv", "scores.log", "GA_Run1.csv", "GA_Run6.csv",
                        "fields/series.meta", "gliders/Bravo.log"}) {
    EXPECT_TRUE(fs::exists(scenario() / f)) << f;
  }
  EXPECT_FALSE(fs::exists(scenario().string() + ".partial"));
  EXPECT_EQ(read_runs_dir(scenario()).runs.size(), 6u);
}

TEST_F(CommandsTest, EvaluationsCli) {
  testkit::TempDir out;
  ASSERT_EQ(run_command(cli("evaluations --params " + testkit::quoted(sample("evaluations.prm")) + " --scenario " +
                            testkit::quoted(scenario()) + " --out " + testkit::quoted(out.path()))),
            0);
  for (const char* f : {"histogram.png", "top_runs.png", "all_ellipses.png", "ellipse_Alfa_h012.png",
                        "ellipse_Charlie_h048.png"}) {
    ASSERT_TRUE(fs::exists(out / f)) << f;
    EXPECT_GT(fs::file_size(out / f), 0u) << f;
  }
  const auto recs = read_confidence_file(testkit::slurp(out / "confidence.csv"));
  ASSERT_EQ(recs.size(), 12u);
  for (const auto& r : recs) {
    EXPECT_GE(r.major_radius_km, r.minor_radius_km);
    EXPECT_GE(r.angle_deg, 0.0);
    EXPECT_LT(r.angle_deg, 180.0);
  }
}

TEST_F(CommandsTest, VisualsCli) {
  testkit::TempDir out;
  ASSERT_EQ(run_command(cli("visuals --params " + testkit::quoted(sample("visuals.prm")) + " --scenario " + testkit::quoted(scenario()) +
                            " --out " + testkit::quoted(out.path()))),
            0);
  for (const char* f : {"full_map.png", "local_Alfa.png", "local_Bravo.png", "local_Charlie.png", "animation.gif",
                        "animation/frame_000.png"}) {
    ASSERT_TRUE(fs::exists(out / f)) << f;
    EXPECT_GT(fs::file_size(out / f), 0u) << f;
  }
  const auto gif = render::decode_gif(testkit::slurp_bytes(out / "animation.gif"));
  EXPECT_EQ(gif.frames.size(), 17u);  // 0..48 h every 3 h
  EXPECT_EQ(gif.delays_cs.front(), 50);
  const auto wps = read_waypoint_file(testkit::slurp(out / "waypoints.txt"));
  EXPECT_EQ(wps.size(), 15u);  // 3 platforms x 5 waypoints
}

TEST_F(CommandsTest, TrackerCli) {
  testkit::TempDir out;
  ASSERT_EQ(run_command(cli("tracker --params " + testkit::quoted(sample("tracker.prm")) + " --scenario " + testkit::quoted(scenario()) +
                            " --out " + testkit::quoted(out.path()))),
            0);
  for (const char* f : {"track_vs_path.png", "predicted_position.png"}) EXPECT_GT(fs::file_size(out / f), 0u) << f;
  std::istringstream in(testkit::slurp(out / "predicted_position.txt"));
  const auto entries = read_predicted_position(in);
  ASSERT_EQ(entries.size(), 3u);
  for (const auto& e : entries) EXPECT_LT(std::abs(e.position.lat_deg - 36.3), 1.0) << e.platform;
}

TEST_F(CommandsTest, MaskedMorphologyIsWhiteInTheFullMap) {
  const Params p = params_for("visuals.prm");
  const VisualsProducts v = build_visuals(p, scenario());
  const render::PlotSpec s = testkit::raster_only(v.full_map);
  const auto probe = testkit::probe_mask(s, render::render_raster(s));
  EXPECT_GT(probe.masked, 100u);
  EXPECT_EQ(probe.masked_not_white, 0u);
  EXPECT_EQ(probe.unmasked_coloured, probe.unmasked);
}

TEST_F(CommandsTest, MaskedMorphologyIsWhiteInRenderedPng) {
  testkit::TempDir out;
  const fs::path overlay = out / "overlay.prm";
  write_file_atomic(overlay, testkit::slurp(sample("visuals.prm")) +
                                 "Show_Vectors = 0\nShow_Gliders = 0\nShow_OpArea = 0\nMake_Animation = 0\n");
  ASSERT_EQ(run_command(cli("visuals --params " + testkit::quoted(overlay) + " --scenario " + testkit::quoted(scenario()) + " --out " +
                            testkit::quoted(out / "maps"))),
            0);
  const Params p = load_params(scenario(), overlay);
  const VisualsProducts v = build_visuals(p, scenario());
  const auto png = render::decode_png(testkit::slurp_bytes(out / "maps" / "full_map.png"));
  const auto probe = testkit::probe_mask(v.full_map, png);
  EXPECT_GT(probe.masked, 100u);
  EXPECT_EQ(probe.masked_not_white, 0u);
  EXPECT_FALSE(fs::exists(out / "maps" / "animation.gif"));
}

TEST_F(CommandsTest, EllipseRunsTopUsesTheTopRuns) {
  Params p = params_for("evaluations.prm");
  p.set("Ellipse_Runs", "top");
  const EvaluationProducts e = build_evaluations(p, scenario());
  ASSERT_FALSE(e.confidence.empty());
  for (const auto& hc : e.confidence) EXPECT_EQ(hc.run_indices, e.top_runs);
  p.set("Ellipse_Runs", "some");
  EXPECT_THROW((void)build_evaluations(p, scenario()), ConfigError);
}

TEST_F(CommandsTest, MissingScenarioFailsWithoutOutput) {
  testkit::TempDir out;
  EXPECT_NE(run_command(cli("evaluations --scenario " + testkit::quoted(out / "nope") + " --out " + testkit::quoted(out / "res"))), 0);
  EXPECT_FALSE(fs::exists(out / "res"));

  // A scenario missing its morphology fails after parsing and leaves nothing behind.
  const fs::path broken = out / "broken";
  fs::copy(scenario(), broken, fs::copy_options::recursive);
  fs::remove(broken / "morphology.txt");
  EXPECT_EQ(run_command(cli("tracker --scenario " + testkit::quoted(broken) + " --out " + testkit::quoted(out / "res"))), 1);
  EXPECT_FALSE(fs::exists(out / "res"));
  EXPECT_FALSE(fs::exists(out / "res.partial"));
}

TEST_F(CommandsTest, MalformedParamsNameTheFile) {
  testkit::TempDir out;
  write_file_atomic(out / "bad.prm", "STD = wide\n");
  try {
    (void)load_params(scenario(), out / "bad.prm");
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("bad.prm"), std::string::npos) << e.what();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("bad.prm"), std::string::npos) << e.what();
  }
}

TEST(OutputStageTest, CommitMovesAndAbandonCleans) {
  testkit::TempDir t;
  {
    OutputStage s(t / "a");
    s.write("x.txt", std::string_view("hi"));
    EXPECT_TRUE(fs::exists(t / "a.partial" / "x.txt"));
  }
  EXPECT_FALSE(fs::exists(t / "a.partial"));
  EXPECT_FALSE(fs::exists(t / "a"));
  {
    OutputStage s(t / "b");
    s.write("sub/y.txt", std::string_view("yo"));
    s.commit();
  }
  EXPECT_EQ(testkit::slurp(t / "b" / "sub" / "y.txt"), "yo");
  EXPECT_FALSE(fs::exists(t / "b.partial"));
}

TEST(Animation, ScheduleReusesTheLastForecastFrame) {
  FieldSeries s;
  s.delta_hours = 3.0;
  s.frames.assign(4, ScalarGrid({0.0, 1.0}, {0.0, 1.0}));
  const auto steps = animation_schedule(48.0, s);
  ASSERT_EQ(steps.size(), 17u);
  EXPECT_EQ(steps[2].forecast_frame, 2u);
  EXPECT_EQ(steps[3].forecast_frame, 3u);
  EXPECT_EQ(steps.back().forecast_frame, 3u);
  EXPECT_DOUBLE_EQ(steps.back().hour, 48.0);
  EXPECT_THROW((void)animation_schedule(48.0, FieldSeries{}), RangeError);
}

TEST(Animation, PositionInterpolatesBetweenWaypoints) {
  const CoordRef ref({-74.6, 36.3});
  const PlannedPath p{"Alfa", {{0, ref.to_geo({0, 0}), 0}, {12, ref.to_geo({12, 0}), 0}, {24, ref.to_geo({12, 6}), 0}}, 0};
  const LocalPoint a = ref.to_local(position_at_hour(p, 3.0));
  EXPECT_NEAR(a.x_km, 3.0, 1e-6);
  EXPECT_NEAR(a.y_km, 0.0, 1e-6);
  const LocalPoint b = ref.to_local(position_at_hour(p, 18.0));
  EXPECT_NEAR(b.x_km, 12.0, 1e-6);
  EXPECT_NEAR(b.y_km, 3.0, 1e-6);
  EXPECT_EQ(position_at_hour(p, 100.0), p.waypoints.back().position);
  EXPECT_EQ(position_at_hour(p, -5.0), p.waypoints.front().position);
}
