#pragma once

// Grading of the GA run population: score histogram, top-run selection, mean
// path, per-hour point clouds and confidence ellipses, and the feasibility
// flags and weights that go into the waypoint file.

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gliderkit/ellipse.hpp"
#include "gliderkit/error.hpp"
#include "gliderkit/field.hpp"
#include "gliderkit/geo.hpp"
#include "gliderkit/scenario_io.hpp"

namespace gliderkit {

struct HistogramGroups {
  std::array<std::size_t, 4> counts{};  // groups 1..4
  std::vector<double> normalized;      // score / max score
  std::vector<int> group_of;           // 1..4 per run
};

/// Group 1: s' > 0.75, group 2: (0.5, 0.75], group 3: (0.25, 0.5], group 4: <= 0.25.
inline int score_group(double normalized) {
  if (normalized > 0.75) return 1;
  if (normalized > 0.5) return 2;
  if (normalized > 0.25) return 3;
  return 4;
}

inline HistogramGroups histogram_groups(std::span<const double> scores) {
  if (scores.empty()) throw RangeError("histogram of an empty score list");
  const double top = *std::max_element(scores.begin(), scores.end());
  if (!(top > 0.0)) throw RangeError("top score must be positive to normalize scores");
  HistogramGroups h;
  for (double s : scores) {
    const double n = s / top;
    const int g = score_group(n);
    h.normalized.push_back(n);
    h.group_of.push_back(g);
    ++h.counts[static_cast<std::size_t>(g - 1)];
  }
  return h;
}

inline constexpr std::size_t kMaxHighlightedRuns = 5;

/// Group-1 runs by descending score (ties: lower index first), at most five.
inline std::vector<std::size_t> select_top_runs(const RunSet& rs) {
  if (rs.runs.empty()) throw RangeError("no runs to select from");
  const auto scores = rs.scores();
  const double top = *std::max_element(scores.begin(), scores.end());
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  std::vector<std::size_t> out;
  for (std::size_t k : idx) {
    const bool group1 = top > 0.0 ? scores[k] / top > 0.75 : scores[k] == top;
    if (group1 && out.size() < kMaxHighlightedRuns) out.push_back(k);
  }
  return out;
}

namespace detail {

inline const PlannedPath& path_of(const Run& run, const std::string& platform, std::size_t run_index) {
  const PlannedPath* p = run.path_for(platform);
  if (!p) throw RangeError("run " + std::to_string(run_index + 1) + " has no path for platform '" + platform + "'");
  return *p;
}

}  // namespace detail

/// Every run's position for one platform at one hour (optionally only `subset` runs).
inline std::vector<GeoPoint> waypoint_cloud(const RunSet& rs, const std::string& platform, int hour,
                                            std::optional<std::span<const std::size_t>> subset = std::nullopt) {
  std::vector<std::size_t> runs;
  if (subset) runs.assign(subset->begin(), subset->end());
  else {
    runs.resize(rs.runs.size());
    std::iota(runs.begin(), runs.end(), std::size_t{0});
  }
  std::vector<GeoPoint> out;
  for (std::size_t r : runs) {
    const Waypoint* w = detail::path_of(rs.runs.at(r), platform, r).at_hour(hour);
    if (!w) throw RangeError("hour " + std::to_string(hour) + " is not on the waypoint grid of '" + platform + "'");
    out.push_back(w->position);
  }
  return out;
}

/// Per-hour mean position across all runs.
inline PlannedPath mean_path(const RunSet& rs, const std::string& platform) {
  if (rs.runs.empty()) throw RangeError("mean path of an empty run set");
  const PlannedPath& first = detail::path_of(rs.runs.front(), platform, 0);
  PlannedPath out{platform, {}, 0.0};
  double score = 0.0;
  for (const auto& r : rs.runs) score += r.score;
  out.score = score / static_cast<double>(rs.runs.size());
  for (const auto& w : first.waypoints) {
    const auto cloud = waypoint_cloud(rs, platform, w.hour);
    out.waypoints.push_back({w.hour, mean_point(cloud), 0.0});
  }
  for (std::size_t k = 0; k < out.waypoints.size(); ++k) {
    const std::size_t a = k + 1 < out.waypoints.size() ? k : (k > 0 ? k - 1 : k);
    const std::size_t b = a + 1 < out.waypoints.size() ? a + 1 : a;
    if (a == b) continue;
    const CoordRef ref(out.waypoints[a].position);
    const LocalPoint d = ref.to_local(out.waypoints[b].position);
    out.waypoints[k].bearing_deg = bearing_deg(d.x_km, d.y_km);
  }
  return out;
}

struct EvaluationWindow {
  int start_hour = 12;
  int stop_hour = 48;
  double std_scale = 1.5;
  EllipseMethod method = EllipseMethod::AB;

  void validate() const {
    if (!(start_hour > 0 && start_hour <= stop_hour)) throw ConfigError("evaluation window needs 0 < Start_hour <= Stop_hour");
    if (!(std_scale > 0.0 && std_scale <= 3.0)) throw ConfigError("STD must lie in (0, 3]");
  }
};

struct HourlyConfidence {
  ConfidenceRecord record;
  EllipseFit fit;
  PointCloud cloud;
  std::vector<std::size_t> run_indices;  // cloud point k came from run run_indices[k]
  GeoPoint best_position;
  LocalPoint best_offset;
};

/// One ellipse per waypoint hour inside [start, stop], ordered by hour.
inline std::vector<HourlyConfidence> build_confidence(const RunSet& rs, const std::string& platform,
                                                      const EvaluationWindow& window,
                                                      std::optional<std::span<const std::size_t>> subset = std::nullopt,
                                                      double contraction_step_km = 0.005) {
  window.validate();
  std::vector<std::size_t> runs;
  if (subset) runs.assign(subset->begin(), subset->end());
  else {
    runs.resize(rs.runs.size());
    std::iota(runs.begin(), runs.end(), std::size_t{0});
  }
  if (runs.empty()) throw RangeError("no runs selected for confidence ellipses");
  const PlannedPath& grid = detail::path_of(rs.runs.at(runs.front()), platform, runs.front());
  const PlannedPath& best = detail::path_of(rs.best(), platform, rs.best_index);
  const EllipseFitConfig cfg{window.std_scale, contraction_step_km};

  std::vector<HourlyConfidence> out;
  for (const auto& w : grid.waypoints) {
    if (w.hour < window.start_hour || w.hour > window.stop_hour) continue;
    HourlyConfidence hc;
    const auto pts = waypoint_cloud(rs, platform, w.hour, std::span<const std::size_t>(runs));
    hc.cloud = build_cloud(pts);
    hc.run_indices = runs;
    // A and A+B need two points; a single run degenerates to a zero-size ellipse.
    const EllipseMethod method = hc.cloud.size() < 2 ? EllipseMethod::B : window.method;
    hc.fit = fit_ellipse(hc.cloud, method, cfg);
    const Waypoint* bw = best.at_hour(w.hour);
    hc.best_position = bw ? bw->position : hc.fit.center;
    const LocalPoint mean_local = hc.cloud.reference.to_local(hc.cloud.reference.origin());
    const LocalPoint b = hc.cloud.reference.to_local(hc.best_position);
    hc.best_offset = {b.x_km - mean_local.x_km, b.y_km - mean_local.y_km};
    hc.record = {platform, w.hour, hc.fit.center, hc.fit.major_radius_km, hc.fit.minor_radius_km, hc.fit.angle_deg};
    out.push_back(std::move(hc));
  }
  if (out.empty()) {
    throw RangeError("no waypoint hours of '" + platform + "' fall inside [" + std::to_string(window.start_hour) +
                     ", " + std::to_string(window.stop_hour) + "]");
  }
  return out;
}

// ---------------------------------------------------------------------------
// feasibility flags

inline bool point_on_segment(LocalPoint p, LocalPoint a, LocalPoint b, double tol_km = 1e-9) {
  const double dx = b.x_km - a.x_km, dy = b.y_km - a.y_km;
  const double len2 = dx * dx + dy * dy;
  double t = len2 > 0.0 ? ((p.x_km - a.x_km) * dx + (p.y_km - a.y_km) * dy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return std::hypot(p.x_km - (a.x_km + t * dx), p.y_km - (a.y_km + t * dy)) <= tol_km;
}

/// Ray casting; points on the boundary count as inside.
inline bool point_in_polygon(LocalPoint p, std::span<const LocalPoint> poly) {
  const std::size_t n = poly.size();
  for (std::size_t k = 0; k < n; ++k) {
    if (point_on_segment(p, poly[k], poly[(k + 1) % n])) return true;
  }
  bool inside = false;
  for (std::size_t k = 0, m = n - 1; k < n; m = k++) {
    const auto& a = poly[k];
    const auto& b = poly[m];
    if ((a.y_km > p.y_km) != (b.y_km > p.y_km)) {
      const double x = (b.x_km - a.x_km) * (p.y_km - a.y_km) / (b.y_km - a.y_km) + a.x_km;
      if (p.x_km < x) inside = !inside;
    }
  }
  return inside;
}

/// Operational-area polygon projected onto a local plane at its vertex mean.
class OpArea {
 public:
  explicit OpArea(std::vector<GeoPoint> vertices) : vertices_(std::move(vertices)) {
    if (vertices_.size() < 3) throw DegenerateError("operational area needs at least 3 vertices");
    ref_ = CoordRef(mean_point(vertices_));
    for (const auto& v : vertices_) local_.push_back(ref_.to_local(v));
    double area2 = 0.0;
    for (std::size_t k = 0; k < local_.size(); ++k) {
      const auto& a = local_[k];
      const auto& b = local_[(k + 1) % local_.size()];
      area2 += a.x_km * b.y_km - b.x_km * a.y_km;
    }
    if (std::abs(area2) <= 1e-12) throw DegenerateError("operational area polygon has zero area");
  }

  bool contains(GeoPoint p) const {
    const double dlon = std::abs(p.lon_deg - ref_.origin().lon_deg);
    const double dlat = std::abs(p.lat_deg - ref_.origin().lat_deg);
    if (dlon > kProjectionWindowDeg || dlat > kProjectionWindowDeg) return false;
    return point_in_polygon(ref_.to_local(p), local_);
  }

  const std::vector<GeoPoint>& vertices() const noexcept { return vertices_; }
  const CoordRef& reference() const noexcept { return ref_; }
  std::span<const LocalPoint> local() const noexcept { return local_; }

 private:
  std::vector<GeoPoint> vertices_;
  CoordRef ref_;
  std::vector<LocalPoint> local_;
};

inline std::vector<Flag> flag_out_of_bounds(const PlannedPath& path, const OpArea& area) {
  std::vector<Flag> out;
  for (const auto& w : path.waypoints) out.push_back(area.contains(w.position) ? Flag::clear : Flag::flagged);
  return out;
}

/// A waypoint is flagged when another platform's same-hour waypoint is
/// strictly closer than min_separation_km.
inline std::vector<std::vector<Flag>> flag_too_close(std::span<const PlannedPath> paths, double min_separation_km) {
  std::vector<std::vector<Flag>> out;
  for (std::size_t p = 0; p < paths.size(); ++p) {
    std::vector<Flag> flags;
    for (const auto& w : paths[p].waypoints) {
      const CoordRef ref(w.position);
      Flag f = Flag::clear;
      for (std::size_t q = 0; q < paths.size() && f == Flag::clear; ++q) {
        if (q == p) continue;
        const Waypoint* other = paths[q].at_hour(w.hour);
        if (other && dist_km(w.position, other->position, ref) < min_separation_km) f = Flag::flagged;
      }
      flags.push_back(f);
    }
    out.push_back(std::move(flags));
  }
  return out;
}

/// Waypoint-file rows for one platform; weight sampled from the localized grid.
inline std::vector<WaypointRecord> build_waypoint_records(const PlannedPath& best, const ScalarGrid& localized,
                                                          std::span<const Flag> out_of_bounds,
                                                          std::span<const Flag> too_close) {
  if (out_of_bounds.size() != best.waypoints.size() || too_close.size() != best.waypoints.size()) {
    throw IntegrityError("flag lists do not match the waypoint count of '" + best.platform + "'");
  }
  std::vector<WaypointRecord> out;
  for (std::size_t k = 0; k < best.waypoints.size(); ++k) {
    const Waypoint& w = best.waypoints[k];
    double weight = 0.0;
    try {
      weight = sample_bilinear(localized, w.position);
    } catch (const RangeError& e) {
      char name[32];
      std::snprintf(name, sizeof name, "%03d", w.hour);
      throw RangeError("waypoint " + std::string(name) + " of '" + best.platform + "': " + e.what());
    }
    out.push_back({w.hour, format_dms(w.position.lat_deg, Axis::lat), format_dms(w.position.lon_deg, Axis::lon),
                   best.platform, out_of_bounds[k], too_close[k], std::clamp(weight, 0.0, 1.0)});
  }
  return out;
}

}  // namespace gliderkit
