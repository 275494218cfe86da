#pragma once

// The four commands: tracker, visuals, evaluations, synth. Each command first
// builds its products (plot specs and text) from the scenario, then renders
// everything into a staging directory that is renamed into place only when
// every output succeeded.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <system_error>
#include <vector>

#include "gliderkit/ellipse.hpp"
#include "gliderkit/error.hpp"
#include "gliderkit/field.hpp"
#include "gliderkit/geo.hpp"
#include "gliderkit/params.hpp"
#include "gliderkit/render/gif.hpp"
#include "gliderkit/render/plot.hpp"
#include "gliderkit/runeval.hpp"
#include "gliderkit/scenario_io.hpp"
#include "gliderkit/synth.hpp"
#include "gliderkit/tracker.hpp"

namespace gliderkit {

/// Writes into `<out>.partial`; commit() moves the results into `out`.
/// Without a commit the staging directory is removed on destruction.
class OutputStage {
 public:
  explicit OutputStage(fs::path out) : out_(fs::absolute(std::move(out))) {
    stage_ = out_;
    stage_ += ".partial";
    fs::remove_all(stage_);
    fs::create_directories(stage_);
  }
  OutputStage(const OutputStage&) = delete;
  OutputStage& operator=(const OutputStage&) = delete;
  ~OutputStage() {
    if (!committed_) {
      std::error_code ec;
      fs::remove_all(stage_, ec);
    }
  }

  const fs::path& root() const noexcept { return stage_; }

  void write(const fs::path& rel, std::string_view text) { write_file_atomic(stage_ / rel, text); }
  void write(const fs::path& rel, const std::vector<std::uint8_t>& bytes) {
    write_file_atomic(stage_ / rel, std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
  }

  void commit() {
    fs::create_directories(out_);
    for (const auto& e : fs::directory_iterator(stage_)) {
      const fs::path dest = out_ / e.path().filename();
      fs::remove_all(dest);
      fs::rename(e.path(), dest);
    }
    fs::remove_all(stage_);
    committed_ = true;
  }

 private:
  fs::path out_;
  fs::path stage_;
  bool committed_ = false;
};

// ---------------------------------------------------------------------------
// shared inputs

/// Scenario parameters (`<scenario>/input.prm`) overlaid with an optional file.
inline Params load_params(const fs::path& scenario, const std::optional<fs::path>& overlay) {
  auto read = [](const fs::path& p, std::string_view role) {
    try {
      return read_params(read_text_file(p, role));
    } catch (const ParseError& e) {
      throw ParseError(p.filename().string() + ": " + e.what(), e.line(), e.column());
    } catch (const ConfigError& e) {
      throw ConfigError(p.filename().string() + ": " + e.what());
    }
  };
  Params p = read(scenario / kInputParamsName, "scenario parameters");
  if (overlay) p.merge(read(*overlay, "tool parameters"));
  return p;
}

inline Morphology load_morphology(const fs::path& scenario) {
  const fs::path path = scenario / kMorphologyName;
  std::istringstream in(read_text_file(path, "morphology grid"));
  try {
    return read_morphology(in);
  } catch (const ParseError& e) {
    throw ParseError(path.filename().string() + ": " + e.what(), e.line(), e.column());
  }
}

inline Run load_best_run(const fs::path& scenario) {
  const fs::path path = scenario / kBestRunName;
  std::istringstream in(read_text_file(path, "best GA run"));
  try {
    return read_run_csv(in);
  } catch (const ParseError& e) {
    throw ParseError(path.filename().string() + ": " + e.what(), e.line(), e.column());
  }
}

inline std::vector<std::string> platform_list(const Params& p, const Run& run) {
  std::vector<std::string> names;
  if (p.has("Glider_names")) {
    names = p.names("Glider_names");
  } else {
    for (const auto& path : run.paths) names.push_back(path.platform);
  }
  for (const auto& n : names) {
    if (!run.path_for(n)) throw IntegrityError("no planned path for platform '" + n + "'");
  }
  return names;
}

inline render::AxisMode axis_mode(const Params& p) {
  return p.flag("set_dms") ? render::AxisMode::dms : render::AxisMode::decimal;
}

inline constexpr std::size_t kSmoothFactor = 4;

/// Cropped, normalized (globally or over `region`) and smoothed morphology for display.
inline ScalarGrid display_morphology(const ScalarGrid& combined, const Params& p,
                                     const std::optional<BoundingBox>& region = std::nullopt) {
  const auto rings = p.integer("Crop_Morph");
  if (rings < 0) throw ConfigError("parameter 'Crop_Morph' must be >= 0");
  const ScalarGrid cropped = crop_boundary(combined, static_cast<std::size_t>(rings));
  const ScalarGrid norm = normalize(cropped, region);
  const SmoothScheme scheme = smooth_scheme_from_level(static_cast<int>(p.integer("Smooth_Image")));
  return smooth(norm, scheme, scheme == SmoothScheme::none ? 1 : kSmoothFactor);
}

inline const std::vector<render::Rgb>& platform_colors() {
  static const std::vector<render::Rgb> c = {render::colors::orange, render::colors::magenta, render::colors::navy,
                                             render::colors::red, render::colors::green, render::colors::blue};
  return c;
}

inline std::string hour_label(int hour) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%03d", hour);
  return buf;
}

inline render::Polyline op_area_outline(const Params& p) {
  return render::geo_polyline(p.points("op_area"), render::colors::black, 2, true);
}

inline void add_path_layer(render::PlotSpec& s, const PlannedPath& path, render::Rgb color, int width,
                           bool labels = true, bool dashed = false) {
  s.paths.push_back(render::geo_polyline(path.positions(), color, width, false, dashed));
  for (const auto& w : path.waypoints) {
    s.waypoints.push_back({render::geo_px(w.position), color, 3.0, render::MarkerShape::disc,
                           labels ? std::to_string(w.hour) : std::string()});
  }
}

// ---------------------------------------------------------------------------
// tracker

struct TrackerProducts {
  render::PlotSpec track_vs_path;
  render::PlotSpec predicted;
  std::vector<PlatformPrediction> predictions;
  std::string predicted_text;
};

inline TrackerConfig tracker_config(const Params& p) {
  TrackerConfig c;
  c.speed_mps = p.number("speed_mps");
  c.max_track_hours = p.number("Max_track_hours");
  c.max_path_hours = p.number("Max_path_hours");
  c.instruction_time = p.time("instruction_time");
  c.next_instruction_time = p.time("next_instruction_time");
  c.validate();
  return c;
}

inline TrackerProducts build_tracker(const Params& p, const fs::path& scenario) {
  const TrackerConfig cfg = tracker_config(p);
  const Run best = load_best_run(scenario);
  const Morphology morph = load_morphology(scenario);
  const auto names = platform_list(p, best);

  TrackerProducts out;
  render::PlotSpec base;
  base.axis = axis_mode(p);
  base.raster = display_morphology(morph.combined, p);
  base.show_gliders = p.flag("Show_Gliders");
  base.show_oparea = p.flag("Show_OpArea");
  base.show_colorbar = p.flag("Show_Colorbar");
  if (p.has("op_area")) base.op_area.push_back(op_area_outline(p));

  render::PlotSpec a = base, b = base;
  a.title = "Glider track vs suggested path";
  b.title = "Predicted position at next instruction";
  std::vector<GeoPoint> frame_a, frame_b;
  for (std::size_t k = 0; k < names.size(); ++k) {
    const auto color = platform_colors()[k % platform_colors().size()];
    const GliderTrack track =
        truncate_track(read_glider_log_file(scenario / kGlidersDir / (names[k] + ".log")), cfg.max_track_hours);
    const PlannedPath& full = *best.path_for(names[k]);
    const PlannedPath path = truncate_path(full, cfg.max_path_hours);

    std::vector<GeoPoint> fixes;
    for (const auto& f : track.fixes) fixes.push_back(f.position);
    add_path_layer(a, path, render::colors::white, 2);
    a.track.push_back(render::geo_polyline(fixes, color, 2));
    for (const auto& f : fixes) a.track_fixes.push_back({render::geo_px(f), color, 2.0, render::MarkerShape::disc, ""});
    frame_a.insert(frame_a.end(), fixes.begin(), fixes.end());
    for (const auto& w : path.waypoints) frame_a.push_back(w.position);

    const Fix& last = track.fixes.back();
    const auto remaining = remaining_waypoints(full, last.time, cfg);
    const Prediction pred = predict_position(last, remaining, cfg);
    out.predictions.push_back({names[k], pred});

    std::vector<GeoPoint> suggested{last.position};
    for (const auto& w : remaining) suggested.push_back(w.position);
    b.paths.push_back(render::geo_polyline(suggested, render::colors::white, 2, false, true));
    for (const auto& w : remaining) {
      b.waypoints.push_back({render::geo_px(w.position), render::colors::white, 3.0, render::MarkerShape::disc,
                             std::to_string(w.hour)});
    }
    b.track.push_back(render::geo_polyline(fixes, color, 1));
    b.track.push_back(render::geo_polyline(pred.travelled, render::colors::black, 2));
    b.markers.push_back({render::geo_px(last.position), render::colors::yellow, 8.0, render::MarkerShape::star, names[k]});
    b.markers.push_back({render::geo_px(pred.position), render::colors::red, 6.0, render::MarkerShape::ring,
                         pred.stationary ? "stationary" : "predicted"});
    frame_b.insert(frame_b.end(), fixes.begin(), fixes.end());
    frame_b.insert(frame_b.end(), suggested.begin(), suggested.end());
    frame_b.push_back(pred.position);
  }
  a.extent = render::padded_extent(frame_a);
  b.extent = render::padded_extent(frame_b);
  a.legend = {"white: suggested path", "colour: glider track"};
  b.legend = {"dashed: suggested", "solid black: predicted travel", "star: last fix"};
  out.track_vs_path = std::move(a);
  out.predicted = std::move(b);
  out.predicted_text = write_predicted_position(out.predictions);
  return out;
}

inline void cmd_tracker(const Params& p, const fs::path& scenario, const fs::path& out_dir) {
  const TrackerProducts t = build_tracker(p, scenario);
  OutputStage stage(out_dir);
  stage.write("track_vs_path.png", render::render_png(t.track_vs_path));
  stage.write("predicted_position.png", render::render_png(t.predicted));
  stage.write("predicted_position.txt", t.predicted_text);
  stage.commit();
}

// ---------------------------------------------------------------------------
// visuals

struct AnimationStep {
  int index = 0;
  double hour = 0.0;
  std::size_t forecast_frame = 0;
};

/// One frame every `delta_hours` from 0 through the end of the path; once the
/// forecast runs out its last frame is reused.
inline std::vector<AnimationStep> animation_schedule(double path_end_hours, const FieldSeries& series) {
  if (series.frames.empty()) throw RangeError("animation needs at least one forecast frame");
  std::vector<AnimationStep> out;
  const auto n = static_cast<int>(std::floor(path_end_hours / series.delta_hours + 1e-9));
  for (int k = 0; k <= std::max(0, n); ++k) {
    const double h = k * series.delta_hours;
    out.push_back({k, h, series.frame_index_at(h)});
  }
  return out;
}

/// Position at `hour` by linear interpolation between scheduled waypoints.
inline GeoPoint position_at_hour(const PlannedPath& path, double hour) {
  const auto& w = path.waypoints;
  if (w.empty()) throw RangeError("path has no waypoints");
  if (hour <= w.front().hour) return w.front().position;
  for (std::size_t k = 1; k < w.size(); ++k) {
    if (hour <= w[k].hour) {
      const double t = (hour - w[k - 1].hour) / static_cast<double>(w[k].hour - w[k - 1].hour);
      const CoordRef ref(w[k - 1].position);
      const LocalPoint b = ref.to_local(w[k].position);
      return ref.to_geo({t * b.x_km, t * b.y_km});
    }
  }
  return w.back().position;
}

struct VisualsProducts {
  render::PlotSpec full_map;
  std::vector<std::pair<std::string, render::PlotSpec>> local_maps;  // file name, spec
  std::vector<WaypointRecord> waypoints;
  std::string waypoint_text;
  std::vector<AnimationStep> schedule;
  std::vector<render::PlotSpec> frames;
  int frame_delay_ms = 500;
};

inline VisualsProducts build_visuals(const Params& p, const fs::path& scenario) {
  const RunSet rs = read_runs_dir(scenario);
  const Run& best = rs.best();
  const Morphology morph = load_morphology(scenario);
  const auto names = platform_list(p, best);
  const OpArea area(p.points("op_area"));
  const fs::path fields = scenario / kFieldsDir;
  FieldSeries u = read_field_series(fields, "u");
  FieldSeries v = read_field_series(fields, "v");
  u.validate();
  v.validate();
  if (u.size() != v.size() || !u.frames[0].same_lattice(v.frames[0])) {
    throw IntegrityError("u and v current series do not match");
  }
  std::optional<FieldSeries> temp;
  if (fs::exists(fields / frame_file_name("temp", 0))) temp = read_field_series(fields, "temp");

  const auto density = p.integer("Field_Density");
  if (density < 1) throw ConfigError("parameter 'Field_Density' must be >= 1");
  const double min_mag = p.number("Mask_Vectors");
  const double ref_vec = p.number("Ref_Vector");
  const double ani_ref_vec = p.number("Ani_Ref_Vector");
  if (!(ref_vec > 0.0) || !(ani_ref_vec > 0.0)) throw ConfigError("reference vector sizes must be > 0");

  VisualsProducts out;
  out.frame_delay_ms = static_cast<int>(p.integer("Frame_Delay_ms"));

  render::PlotSpec base;
  base.axis = axis_mode(p);
  base.show_gliders = p.flag("Show_Gliders");
  base.show_vectors = p.flag("Show_Vectors");
  base.show_oparea = p.flag("Show_OpArea");
  base.show_colorbar = p.flag("Show_Colorbar");
  base.op_area.push_back(op_area_outline(p));

  // Full map: global normalization, vectors of the first forecast frame, every best path.
  {
    render::PlotSpec s = base;
    s.title = "Morphology, currents and suggested paths";
    s.raster = display_morphology(morph.combined, p);
    s.extent = morph.combined.hull();
    s.vectors = render::vector_glyphs({u.frames[0], v.frames[0]}, static_cast<std::size_t>(density), min_mag);
    s.vector_px_per_mps = 25.0 / ref_vec;
    for (std::size_t k = 0; k < names.size(); ++k) add_path_layer(s, *best.path_for(names[k]), render::colors::white, 2);
    s.legend = {"white: suggested paths", "arrows: currents"};
    out.full_map = std::move(s);
  }

  // Per-glider maps and waypoint rows, both from the localized normalization.
  std::vector<PlannedPath> best_paths;
  for (const auto& n : names) best_paths.push_back(*best.path_for(n));
  const auto close = flag_too_close(best_paths, p.number("min_separation_km"));
  const auto rings = p.integer("Crop_Morph");
  const ScalarGrid cropped = crop_boundary(morph.combined, static_cast<std::size_t>(std::max<long long>(0, rings)));
  for (std::size_t k = 0; k < best_paths.size(); ++k) {
    const PlannedPath& path = best_paths[k];
    const auto positions = path.positions();
    const BoundingBox region = local_region(positions, morph.combined);
    const ScalarGrid localized = normalize(cropped, region);
    const auto recs = build_waypoint_records(path, localized, flag_out_of_bounds(path, area), close[k]);
    out.waypoints.insert(out.waypoints.end(), recs.begin(), recs.end());
    if (p.flag("Show_SingleGL")) {
      render::PlotSpec s = base;
      s.title = path.platform + ": localized morphology";
      s.raster = display_morphology(morph.combined, p, region);
      s.extent = region;
      s.vectors.clear();
      add_path_layer(s, path, render::colors::white, 2);
      out.local_maps.emplace_back("local_" + path.platform + ".png", std::move(s));
    }
  }
  std::stable_sort(out.waypoints.begin(), out.waypoints.end(),
                   [](const WaypointRecord& a, const WaypointRecord& b) { return a.platform < b.platform; });
  out.waypoint_text = write_waypoint_file(out.waypoints);

  if (p.flag("Make_Animation")) {
    int end_hour = 0;
    for (const auto& path : best_paths) end_hour = std::max(end_hour, path.waypoints.back().hour);
    out.schedule = animation_schedule(end_hour, u);
    for (const auto& step : out.schedule) {
      render::PlotSpec s = base;
      s.width = 560;
      s.height = 460;
      char title[64];
      std::snprintf(title, sizeof title, "Hour %03.0f (forecast frame %zu)", step.hour, step.forecast_frame);
      s.title = title;
      s.extent = morph.combined.hull();
      if (temp) {
        s.raster = normalize(temp->frames[temp->frame_index_at(step.hour)]);
      } else {
        s.raster = display_morphology(morph.combined, p);
      }
      s.vectors = render::vector_glyphs({u.frames[step.forecast_frame], v.frames[step.forecast_frame]},
                                        static_cast<std::size_t>(density), min_mag);
      s.vector_px_per_mps = 25.0 / ani_ref_vec;
      for (std::size_t k = 0; k < best_paths.size(); ++k) {
        const PlannedPath& path = best_paths[k];
        s.paths.push_back(render::geo_polyline(path.positions(), render::colors::light_gray, 1, false, true));
        std::vector<GeoPoint> done;
        for (const auto& w : path.waypoints) {
          if (w.hour <= step.hour) done.push_back(w.position);
        }
        const GeoPoint now = position_at_hour(path, step.hour);
        done.push_back(now);
        s.paths.push_back(render::geo_polyline(done, render::colors::white, 2));
        s.waypoints.push_back({render::geo_px(now), platform_colors()[k % platform_colors().size()], 4.0,
                               render::MarkerShape::disc, path.platform});
      }
      out.frames.push_back(std::move(s));
    }
  }
  return out;
}

inline void cmd_visuals(const Params& p, const fs::path& scenario, const fs::path& out_dir) {
  const VisualsProducts v = build_visuals(p, scenario);
  OutputStage stage(out_dir);
  stage.write("full_map.png", render::render_png(v.full_map));
  for (const auto& [name, spec] : v.local_maps) stage.write(name, render::render_png(spec));
  stage.write("waypoints.txt", v.waypoint_text);
  if (!v.frames.empty()) {
    std::vector<render::Canvas> canvases;
    for (std::size_t k = 0; k < v.frames.size(); ++k) {
      canvases.push_back(render::render_raster(v.frames[k]));
      char name[32];
      std::snprintf(name, sizeof name, "frame_%03zu.png", k);
      stage.write(fs::path("animation") / name, render::encode_png(canvases.back()));
    }
    stage.write("animation.gif", render::encode_gif(canvases, v.frame_delay_ms));
  }
  stage.commit();
}

// ---------------------------------------------------------------------------
// evaluations

struct EllipsePlot {
  std::string file_name;
  std::string platform;
  int hour = 0;
  render::PlotSpec spec;
};

struct EvaluationProducts {
  HistogramGroups groups;
  std::vector<std::size_t> top_runs;
  render::PlotSpec histogram;
  render::PlotSpec top_runs_map;
  std::vector<EllipsePlot> ellipse_plots;
  render::PlotSpec all_ellipses;
  std::vector<HourlyConfidence> confidence;
  std::string confidence_text;
};

inline EvaluationWindow evaluation_window(const Params& p) {
  EvaluationWindow w;
  w.start_hour = static_cast<int>(p.integer("Start_hour"));
  w.stop_hour = static_cast<int>(p.integer("Stop_hour"));
  w.std_scale = p.number("STD");
  w.method = parse_method(p.text("Ellipse_Method"));
  w.validate();
  return w;
}

inline render::Rgb quadrant_color(int q) {
  switch (q) {
    case 1: return render::colors::yellow;
    case 2: return render::colors::green;
    case 3: return render::colors::blue;
    default: return render::colors::red;
  }
}

/// Ellipse plot in the cloud's own km frame (origin at the cloud mean).
inline render::PlotSpec ellipse_plot(const HourlyConfidence& hc) {
  const EllipseFit& fit = hc.fit;
  render::PlotSpec s;
  s.width = 640;
  s.height = 640;
  s.axis = render::AxisMode::km;
  char title[96];
  std::snprintf(title, sizeof title, "%s hour %03d (%s)", hc.record.platform.c_str(), hc.record.hour,
                std::string(method_name(fit.method)).c_str());
  s.title = title;
  double reach = std::max(fit.major_radius_km, 0.5);
  for (const auto& q : hc.cloud.offsets) reach = std::max(reach, std::max(std::abs(q.x_km), std::abs(q.y_km)));
  reach = std::max(reach, std::max(std::abs(hc.best_offset.x_km), std::abs(hc.best_offset.y_km)));
  reach *= 1.15;
  s.extent = {-reach, reach, -reach, reach};

  render::Polyline outline{{}, render::colors::green, 2, true, false};
  for (const auto& q : ellipse_outline(fit.major_radius_km, fit.minor_radius_km, fit.angle_deg)) {
    outline.points.push_back({q.x_km, q.y_km});
  }
  s.ellipses.push_back(std::move(outline));
  const double a = deg2rad(fit.angle_deg);
  const render::PointPx major{fit.major_radius_km * std::sin(a), fit.major_radius_km * std::cos(a)};
  const render::PointPx minor{-fit.minor_radius_km * std::cos(a), fit.minor_radius_km * std::sin(a)};
  s.ellipses.push_back({{{-major.x, -major.y}, {major.x, major.y}}, render::colors::gray, 1, false, true});
  s.ellipses.push_back({{{-minor.x, -minor.y}, {minor.x, minor.y}}, render::colors::gray, 1, false, true});

  std::vector<bool> inlier(hc.cloud.size(), false);
  for (std::size_t k : fit.inliers) inlier[k] = true;
  for (std::size_t k = 0; k < hc.cloud.size(); ++k) {
    const auto& q = hc.cloud.offsets[k];
    const render::Rgb c = inlier[k] ? quadrant_color(quadrant_of(fit, q)) : render::colors::black;
    s.markers.push_back({{q.x_km, q.y_km}, c, 4.0, render::MarkerShape::disc, ""});
  }
  s.markers.push_back({{hc.best_offset.x_km, hc.best_offset.y_km}, render::colors::magenta, 8.0,
                       render::MarkerShape::ring, "best"});
  s.markers.push_back({{0.0, 0.0}, render::colors::black, 6.0, render::MarkerShape::cross, ""});
  char dims[96];
  std::snprintf(dims, sizeof dims, "DR %.2f km  dr %.2f km  angle %.3f", fit.major_radius_km, fit.minor_radius_km,
                fit.angle_deg);
  s.legend = {dims, "Q1 yellow Q2 green Q3 blue Q4 red, outliers black"};
  return s;
}

inline EvaluationProducts build_evaluations(const Params& p, const fs::path& scenario) {
  const RunSet rs = read_runs_dir(scenario);
  const Morphology morph = load_morphology(scenario);
  const auto names = platform_list(p, rs.best());
  const EvaluationWindow window = evaluation_window(p);

  EvaluationProducts out;
  const auto scores = rs.scores();
  out.groups = histogram_groups(scores);
  out.top_runs = select_top_runs(rs);

  {
    render::PlotSpec s;
    s.width = 640;
    s.height = 480;
    s.axis = render::AxisMode::decimal;
    s.title = "Normalized score groups (" + std::to_string(rs.runs.size()) + " runs)";
    const auto top = *std::max_element(out.groups.counts.begin(), out.groups.counts.end());
    s.extent = {0.0, 4.0, 0.0, static_cast<double>(top) * 1.2 + 1.0};
    const render::Rgb group_colors[4] = {render::colors::red, render::colors::orange, render::colors::green,
                                         render::colors::blue};
    for (std::size_t g = 0; g < 4; ++g) {
      s.bars.push_back({static_cast<double>(g) + 0.1, static_cast<double>(g) + 0.9,
                        static_cast<double>(out.groups.counts[g]), group_colors[g], std::to_string(out.groups.counts[g])});
    }
    s.legend = {"group 1 >75%", "2: 50-75%", "3: 25-50%", "4: <=25%"};
    out.histogram = std::move(s);
  }

  render::PlotSpec map_base;
  map_base.axis = axis_mode(p);
  map_base.raster = display_morphology(morph.combined, p);
  map_base.show_oparea = p.flag("Show_OpArea");
  map_base.show_colorbar = p.flag("Show_Colorbar");
  map_base.show_gliders = p.flag("Show_Gliders");
  if (p.has("op_area")) map_base.op_area.push_back(op_area_outline(p));

  std::vector<GeoPoint> everything;
  {
    render::PlotSpec s = map_base;
    s.title = "All runs (gray), top runs (black), mean (white)";
    for (const auto& run : rs.runs) {
      for (const auto& path : run.paths) {
        s.paths.push_back(render::geo_polyline(path.positions(), render::colors::gray, 1));
        const auto pos = path.positions();
        everything.insert(everything.end(), pos.begin(), pos.end());
      }
    }
    for (std::size_t r : out.top_runs) {
      const int width = r == rs.best_index ? 4 : 2;
      for (const auto& path : rs.runs[r].paths) s.paths.push_back(render::geo_polyline(path.positions(), render::colors::black, width));
    }
    for (const auto& n : names) {
      const PlannedPath mean = mean_path(rs, n);
      s.paths.push_back(render::geo_polyline(mean.positions(), render::colors::white, 2));
      for (const auto& w : mean.waypoints) {
        s.waypoints.push_back({render::geo_px(w.position), render::colors::white, 3.0, render::MarkerShape::disc, ""});
      }
    }
    s.extent = render::padded_extent(everything);
    out.top_runs_map = std::move(s);
  }

  std::optional<std::vector<std::size_t>> subset;
  if (p.has("Ellipse_Runs") && p.text("Ellipse_Runs") == "top") subset = out.top_runs;
  else if (p.has("Ellipse_Runs") && p.text("Ellipse_Runs") != "all") {
    throw ConfigError("parameter 'Ellipse_Runs' must be 'all' or 'top'");
  }

  render::PlotSpec all = map_base;
  all.title = "Confidence ellipses";
  std::vector<ConfidenceRecord> records;
  for (const auto& n : names) {
    auto hours = subset ? build_confidence(rs, n, window, std::span<const std::size_t>(*subset))
                        : build_confidence(rs, n, window);
    const PlannedPath mean = mean_path(rs, n);
    add_path_layer(all, *rs.best().path_for(n), render::colors::black, 2, false);
    all.paths.push_back(render::geo_polyline(mean.positions(), render::colors::white, 1));
    for (auto& hc : hours) {
      records.push_back(hc.record);
      const auto outline = ellipse_outline_geo(hc.fit);
      all.ellipses.push_back(render::geo_polyline(outline, render::colors::green, 2, true));
      everything.insert(everything.end(), outline.begin(), outline.end());
      all.markers.push_back({render::geo_px(hc.fit.center), render::colors::white, 3.0, render::MarkerShape::disc,
                             std::to_string(hc.record.hour)});
      out.ellipse_plots.push_back({"ellipse_" + n + "_h" + hour_label(hc.record.hour) + ".png", n, hc.record.hour,
                                   ellipse_plot(hc)});
      out.confidence.push_back(std::move(hc));
    }
  }
  all.extent = render::padded_extent(everything);
  out.all_ellipses = std::move(all);
  out.confidence_text = write_confidence_file(records);
  return out;
}

inline void cmd_evaluations(const Params& p, const fs::path& scenario, const fs::path& out_dir) {
  const EvaluationProducts e = build_evaluations(p, scenario);
  OutputStage stage(out_dir);
  stage.write("histogram.png", render::render_png(e.histogram));
  stage.write("top_runs.png", render::render_png(e.top_runs_map));
  for (const auto& ep : e.ellipse_plots) stage.write(ep.file_name, render::render_png(ep.spec));
  stage.write("all_ellipses.png", render::render_png(e.all_ellipses));
  stage.write("confidence.csv", e.confidence_text);
  stage.commit();
}

// ---------------------------------------------------------------------------
// synth

inline void cmd_synth(const Params& p, const fs::path& out_dir) {
  const SynthConfig cfg = synth_config_from_params(p);
  const Scenario s = generate_scenario(cfg);
  OutputStage stage(out_dir);
  write_scenario(stage.root(), s);
  stage.commit();
}

}  // namespace gliderkit
