// Acceptance runner: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cstring>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "gliderkit/commands.hpp"
#include "support.hpp"

using namespace gliderkit;
using Clock = std::chrono::steady_clock;

namespace {

// Collects the first few failure notes for one criterion.
struct Check {
  std::vector<std::string> notes;
  void expect(bool ok, const std::string& what) {
    if (!ok && notes.size() < 5) notes.push_back(what);
  }
  bool ok() const { return notes.empty(); }
};

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

PointCloud cloud_of(const std::vector<LocalPoint>& pts) { return PointCloud::from_local(pts, CoordRef({-74.6, 36.3})); }

bool inside(const EllipseFit& f, LocalPoint q) {
  return testkit::quad_form(f.major_radius_km, f.minor_radius_km, f.angle_deg, q) <= 1.0 + 1e-9;
}

void ellipse_oracles(Check& c) {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(20140801);
  const EllipseFitConfig cfg{1.5, 0.005};
  std::size_t minimality_cases = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const auto rc = testkit::random_cloud(rng);
    const PointCloud cloud = cloud_of(rc.points);
    const std::string tag = "cloud " + std::to_string(trial) + ": ";

    // a. covariance fit against an Eigen eigendecomposition
    const auto o = testkit::eigen_oracle(rc.points);
    const EllipseFit a1 = fit_covariance(cloud, {1.0, 0.005});
    c.expect(std::abs(a1.major_radius_km - o.major) <= 1e-9, tag + "A major " + num(a1.major_radius_km) + " vs " + num(o.major));
    c.expect(std::abs(a1.minor_radius_km - o.minor) <= 1e-9, tag + "A minor " + num(a1.minor_radius_km) + " vs " + num(o.minor));
    if (o.gap > 1e-6) {
      c.expect(testkit::axis_angle_gap(a1.angle_deg, o.angle_deg) <= 1e-7,
               tag + "A angle " + num(a1.angle_deg) + " vs " + num(o.angle_deg));
    }

    // b. pointwise fit: containment and minimality
    const EllipseFit b = fit_pointwise(cloud, cfg);
    for (std::size_t k : b.inliers) c.expect(inside(b, cloud.offsets[k]), tag + "B inlier " + std::to_string(k) + " outside");
    if (b.minor_radius_km > 0.010) {
      ++minimality_cases;
      EllipseFit smaller = b;
      smaller.minor_radius_km -= 0.010;
      bool excluded = false;
      for (std::size_t k : b.inliers) excluded = excluded || !inside(smaller, cloud.offsets[k]);
      c.expect(excluded, tag + "B minor " + num(b.minor_radius_km) + " not minimal");
    }

    // c. combined fit
    const EllipseFit a = fit_covariance(cloud, cfg);
    const EllipseFit ab = fit_combined(cloud, cfg);
    for (std::size_t k : a.inliers) c.expect(inside(ab, cloud.offsets[k]), tag + "A inlier " + std::to_string(k) + " outside AB");
    if (std::includes(b.inliers.begin(), b.inliers.end(), a.inliers.begin(), a.inliers.end())) {
      c.expect(ab.major_radius_km <= b.major_radius_km + 1e-12, tag + "AB major exceeds B major");
    }
  }
  c.expect(minimality_cases > 400, "only " + std::to_string(minimality_cases) + " clouds exercised minimality");
  const double s = seconds_since(t0);
  c.expect(s < 10.0, "ellipse suite took " + num(s) + " s");
}

void scale_law(Check& c) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 200; ++trial) {
    const PointCloud cloud = cloud_of(testkit::random_cloud(rng).points);
    const EllipseFit one = fit_covariance(cloud, {1.0, 0.005});
    const EllipseFit two = fit_covariance(cloud, {2.0, 0.005});
    for (auto [r1, r2] : {std::pair{one.major_radius_km, two.major_radius_km}, std::pair{one.minor_radius_km, two.minor_radius_km}}) {
      const double rel = r1 > 0.0 ? std::abs(r2 - 2.0 * r1) / (2.0 * r1) : std::abs(r2);
      c.expect(rel < 1e-12, "scale 2 vs 1 relative error " + num(rel));
    }
  }
  const Params empty = read_params("");
  c.expect(empty.number("STD") == 1.5, "default STD is " + num(empty.number("STD")));
  c.expect(evaluation_window(empty).std_scale == 1.5, "default evaluation window scale");
}

void worked_example(Check& c) {
  const EllipseFit f = fit_pointwise(cloud_of({{3, 0}, {-3, 0}, {0, 1}, {0, -1}}), {1.5, 0.005});
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", f.major_radius_km);
  c.expect(std::string(buf) == "3.000", std::string("major ") + buf);
  std::snprintf(buf, sizeof buf, "%.3f", f.angle_deg);
  c.expect(std::string(buf) == "90.000", std::string("angle ") + buf);
  c.expect(f.minor_radius_km >= 1.0 - 1e-9 && f.minor_radius_km < 1.005, "minor " + num(f.minor_radius_km));
  c.expect(f.inliers.size() == 4, "all four points are inliers");
}

std::vector<std::string> split_tabs(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s) {
    if (ch == '\t') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

void format_fidelity(Check& c) {
  ConfidenceRecord r;
  r.platform = "Alfa";
  r.hour = 12;
  r.center = {-75.25, 36.25};
  r.major_radius_km = 8.99;
  r.minor_radius_km = 1.80;
  r.angle_deg = 2.171;
  const std::string row = format_confidence_row(r);
  const std::string tail = ",8.99km,1.80km,2.171";
  c.expect(row.size() >= tail.size() && row.compare(row.size() - tail.size(), tail.size(), tail) == 0, "confidence row " + row);
  c.expect(row.rfind("Alfa,12,36 N 15'", 0) == 0, "confidence row prefix " + row);
  c.expect(row.find(",75 W 15'") != std::string::npos, "confidence row longitude " + row);

  WaypointRecord w;
  w.hour = 0;
  w.lat_dms = format_dms(36.0 + 20.0 / 60.0 + 3.84 / 3600.0, Axis::lat);
  w.lon_dms = format_dms(-(74.0 + 43.0 / 60.0 + 1.92 / 3600.0), Axis::lon);
  w.platform = "Alfa";
  w.weight = 0.6130;
  const std::vector<std::string> want{"000", "36 N 20'03.840\"", "74 W 43'01.920\"", "Alfa", "Clear", "Clear", "0.6130"};
  const auto got = split_tabs(format_waypoint_row(w));
  c.expect(got == want, "waypoint row " + format_waypoint_row(w));
}

void dead_reckoning(Check& c) {
  const CoordRef ref({-74.6, 36.3});
  const Instant t0 = *parse_iso8601("2014-08-01T00:00:00Z");
  TrackerConfig cfg;
  cfg.speed_mps = 0.25;
  cfg.instruction_time = t0;
  cfg.next_instruction_time = add_hours(t0, 5.0);
  const Fix start{t0, ref.to_geo({0, 0})};

  const Prediction p = predict_position(start, std::vector<Waypoint>{{12, ref.to_geo({9.0, 0.0}), 90.0}}, cfg);
  const LocalPoint q = ref.to_local(p.position);
  c.expect(std::hypot(q.x_km - 4.5, q.y_km) <= 1e-3, "5 h case lands at " + num(q.x_km) + "," + num(q.y_km));

  // Budget exactly equal to the segment length ends on the waypoint.
  const Prediction edge = predict_position(start, std::vector<Waypoint>{{12, ref.to_geo({4.5, 0.0}), 90.0}}, cfg);
  const LocalPoint e = ref.to_local(edge.position);
  c.expect(std::abs(e.x_km - 4.5) <= 1e-9 && std::abs(e.y_km) <= 1e-9, "boundary case " + num(e.x_km));
  c.expect(std::abs(edge.surplus_km) <= 1e-9, "boundary surplus " + num(edge.surplus_km));

  // Budget beyond the polyline clamps at the last waypoint.
  cfg.next_instruction_time = add_hours(t0, 24.0);
  const Prediction clamp = predict_position(
      start, std::vector<Waypoint>{{12, ref.to_geo({3.0, 0.0}), 90.0}, {24, ref.to_geo({3.0, 4.0}), 0.0}}, cfg);
  const LocalPoint k = ref.to_local(clamp.position);
  c.expect(std::abs(k.x_km - 3.0) <= 1e-9 && std::abs(k.y_km - 4.0) <= 1e-9, "clamp lands at " + num(k.x_km) + "," + num(k.y_km));
  c.expect(std::abs(clamp.surplus_km - (0.9 * 24.0 - 7.0)) <= 1e-9, "clamp surplus " + num(clamp.surplus_km));
}

void round_trips(Check& c) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> lat(-89.999, 89.999), lon(-179.999, 179.999);
  double worst_dms = 0.0;
  for (int k = 0; k < 10000; ++k) {
    const double a = lat(rng), o = lon(rng);
    worst_dms = std::max(worst_dms, std::abs(parse_dms(format_dms(a, Axis::lat), Axis::lat) - a));
    worst_dms = std::max(worst_dms, std::abs(parse_dms(format_dms(o, Axis::lon), Axis::lon) - o));
  }
  c.expect(worst_dms <= 5e-7, "DMS round-trip error " + num(worst_dms));

  std::uniform_real_distribution<double> olat(-80.0, 80.0), d(-4.9, 4.9);
  double worst_geo = 0.0;
  for (int k = 0; k < 10000; ++k) {
    const GeoPoint origin{lon(rng), olat(rng)};
    const CoordRef ref(origin);
    const GeoPoint p{origin.lon_deg + d(rng), origin.lat_deg + d(rng)};
    const GeoPoint back = ref.to_geo(ref.to_local(p));
    worst_geo = std::max({worst_geo, std::abs(back.lon_deg - p.lon_deg), std::abs(back.lat_deg - p.lat_deg)});
  }
  c.expect(worst_geo <= 1e-9, "projection round-trip error " + num(worst_geo));
}

void histogram(Check& c) {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> len(1, 80);
  std::uniform_real_distribution<double> val(0.0, 1000.0);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> s(static_cast<std::size_t>(len(rng)));
    for (auto& v : s) v = val(rng);
    s[0] = std::max(s[0], 1.0);
    const auto h = histogram_groups(s);
    c.expect(h.counts[0] + h.counts[1] + h.counts[2] + h.counts[3] == s.size(), "counts do not sum to N");
  }
  c.expect(score_group(0.75) == 2 && score_group(0.5) == 3 && score_group(0.25) == 4, "boundary values");
  c.expect(score_group(0.7500001) == 1 && score_group(0.5000001) == 2 && score_group(0.2500001) == 3, "just above boundaries");
  const auto w = histogram_groups(std::vector<double>{1.0, 0.8, 0.6, 0.3, 0.1});
  c.expect(w.counts == std::array<std::size_t, 4>{2, 1, 1, 1}, "worked case");
}

void ga_properties(Check& c) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    SynthConfig cfg = testkit::small_config(seed);
    cfg.generations = 50;
    cfg.runs = 4;
    cfg.threads = 4;
    const Morphology m = generate_morphology(cfg);
    FitnessContext ctx;
    ctx.combined = &m.combined;
    const GaResult r = run_ga(cfg, ctx);
    for (std::size_t run = 0; run < r.histories.size(); ++run) {
      const auto& h = r.histories[run];
      c.expect(h.size() == 51, "seed " + std::to_string(seed) + " history length " + std::to_string(h.size()));
      for (std::size_t g = 1; g < h.size(); ++g) {
        c.expect(h[g] >= h[g - 1], "seed " + std::to_string(seed) + " run " + std::to_string(run) + " generation " +
                                       std::to_string(g) + " fitness dropped");
      }
    }
  }
  testkit::TempDir a, b;
  write_scenario(a.path(), generate_scenario(testkit::small_config(33)));
  write_scenario(b.path(), generate_scenario(testkit::small_config(33)));
  const auto ta = testkit::tree_contents(a.path()), tb = testkit::tree_contents(b.path());
  c.expect(!ta.empty() && ta == tb, "same seed produced different scenario trees");
}

int run(const std::string& cmd) { return testkit::run_command(cmd); }

void end_to_end(Check& c) {
  const auto t0 = Clock::now();
  const fs::path samples = GLIDERKIT_SAMPLES_DIR;
  const std::string cli = testkit::quoted(GLIDERKIT_CLI_PATH);
  testkit::TempDir dir("gk_accept");
  const fs::path scenario = dir / "scenario";
  c.expect(run(cli + " synth --params " + testkit::quoted(samples / "synth.prm") + " --out " + testkit::quoted(scenario)) == 0,
           "synth failed");
  if (!c.ok()) return;
  const RunSet rs = read_runs_dir(scenario);
  c.expect(rs.runs.size() == 20 && rs.best().paths.size() == 3, "scenario shape");

  auto cmd = [&](const char* name, const char* prm, const fs::path& out) {
    return run(cli + " " + name + " --params " + testkit::quoted(samples / prm) + " --scenario " + testkit::quoted(scenario) +
               " --out " + testkit::quoted(out));
  };
  c.expect(cmd("evaluations", "evaluations.prm", dir / "eval") == 0, "evaluations failed");
  c.expect(cmd("visuals", "visuals.prm", dir / "vis") == 0, "visuals failed");
  c.expect(cmd("tracker", "tracker.prm", dir / "track") == 0, "tracker failed");
  if (!c.ok()) return;

  const auto recs = read_confidence_file(testkit::slurp(dir / "eval" / "confidence.csv"));
  c.expect(recs.size() == 12, "confidence records: " + std::to_string(recs.size()));
  for (const auto& r : recs) {
    c.expect(r.major_radius_km >= r.minor_radius_km, "DR < dr for " + r.platform);
    c.expect(r.angle_deg >= 0.0 && r.angle_deg < 180.0, "angle out of range for " + r.platform);
  }

  std::vector<fs::path> images{dir / "eval" / "histogram.png", dir / "eval" / "top_runs.png",
                               dir / "eval" / "all_ellipses.png", dir / "vis" / "full_map.png",
                               dir / "vis" / "animation.gif", dir / "track" / "track_vs_path.png",
                               dir / "track" / "predicted_position.png"};
  for (const char* n : {"Alfa", "Bravo", "Charlie"}) {
    images.push_back(dir / "vis" / (std::string("local_") + n + ".png"));
    for (int h : {12, 24, 36, 48}) images.push_back(dir / "eval" / ("ellipse_" + std::string(n) + "_h" + hour_label(h) + ".png"));
  }
  for (const auto& img : images) c.expect(fs::exists(img) && fs::file_size(img) > 0, "missing or empty " + img.filename().string());

  // Raster-only full map through the CLI, probed at every masked node.
  const fs::path overlay = dir / "raster_only.prm";
  write_file_atomic(overlay, testkit::slurp(samples / "visuals.prm") +
                                 "Show_Vectors = 0\nShow_Gliders = 0\nShow_OpArea = 0\nMake_Animation = 0\n");
  c.expect(run(cli + " visuals --params " + testkit::quoted(overlay) + " --scenario " + testkit::quoted(scenario) + " --out " +
               testkit::quoted(dir / "raster")) == 0,
           "raster-only visuals failed");
  const VisualsProducts v = build_visuals(load_params(scenario, overlay), scenario);
  const auto probe = testkit::probe_mask(v.full_map, render::decode_png(testkit::slurp_bytes(dir / "raster" / "full_map.png")));
  c.expect(probe.masked > 0, "no masked cells probed");
  c.expect(probe.masked_not_white == 0, std::to_string(probe.masked_not_white) + " masked cells not white");
  c.expect(probe.unmasked_coloured == probe.unmasked, "unmasked cells left white");

  const double s = seconds_since(t0);
  c.expect(s < 120.0, "pipeline took " + num(s) + " s");
}

void field_transforms(Check& c) {
  std::mt19937_64 rng(10);
  std::normal_distribution<double> n(0.0, 5.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> lons, lats;
    for (int i = 0; i < 9 + trial % 5; ++i) lons.push_back(-75.0 + 0.05 * i);
    for (int j = 0; j < 8 + trial % 3; ++j) lats.push_back(36.0 + 0.05 * j);
    ScalarGrid g(lons, lats);
    for (auto& v : g.values) v = n(rng);
    const ScalarGrid norm = normalize(g);
    const auto range = value_range(norm);
    c.expect(range && range->first == 0.0 && range->second == 1.0, "normalized range not [0,1]");
    for (std::size_t rings = 0; rings <= 3; ++rings) {
      const ScalarGrid cr = crop_boundary(g, rings);
      for (std::size_t j = 0; j < g.ny(); ++j) {
        for (std::size_t i = 0; i < g.nx(); ++i) {
          const std::size_t ring = std::min({i, j, g.nx() - 1 - i, g.ny() - 1 - j});
          c.expect(cr.masked(j, i) == (ring < rings), "crop ring mismatch");
        }
      }
    }
  }
  std::vector<double> axis;
  for (int k = 0; k < 9; ++k) axis.push_back(0.1 * k);
  VectorFrame f{ScalarGrid(axis, axis), ScalarGrid(axis, axis)};
  for (auto* comp : {&f.u, &f.v}) {
    for (auto& v : comp->values) v = n(rng);
  }
  VectorFrame t = thin_vectors(f, 3);
  c.expect(t.u.nx() == 3 && t.u.ny() == 3, "thinned shape");
  for (std::size_t j = 0; j < 3 && c.ok(); ++j) {
    for (std::size_t i = 0; i < 3; ++i) {
      c.expect(std::memcmp(&t.u.at(j, i), &f.u.at(3 * j, 3 * i), sizeof(double)) == 0 &&
                   std::memcmp(&t.v.at(j, i), &f.v.at(3 * j, 3 * i), sizeof(double)) == 0,
               "thinned value differs");
    }
  }
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<void(Check&)>>> criteria{
      {"ellipse oracle suite", ellipse_oracles},
      {"scale-factor law and default STD", scale_law},
      {"worked pointwise example", worked_example},
      {"format fidelity", format_fidelity},
      {"dead reckoning", dead_reckoning},
      {"DMS and projection round-trips", round_trips},
      {"histogram partition", histogram},
      {"GA elitism and determinism", ga_properties},
      {"end-to-end pipeline", end_to_end},
      {"field transforms", field_transforms},
  };
  int failures = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    Check c;
    const auto t0 = Clock::now();
    try {
      criteria[k].second(c);
    } catch (const std::exception& e) {
      c.notes.push_back(std::string("exception: ") + e.what());
    }
    std::printf("%s %zu %s (%.2f s)\n", c.ok() ? "PASS" : "FAIL", k + 1, criteria[k].first.c_str(), seconds_since(t0));
    for (const auto& n : c.notes) std::printf("    %s\n", n.c_str());
    failures += !c.ok();
  }
  std::fflush(stdout);
  return failures == 0 ? 0 : 1;
}
