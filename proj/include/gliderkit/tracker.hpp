#pragma once

// Track-versus-path comparison and dead-reckoning prediction of where a glider
// will be at the next instruction time (constant speed, ocean at rest).

#include <algorithm>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "gliderkit/error.hpp"
#include "gliderkit/geo.hpp"
#include "gliderkit/scenario_io.hpp"
#include "gliderkit/timeutil.hpp"

namespace gliderkit {

struct TrackerConfig {
  double speed_mps = 0.25;
  double max_track_hours = 148.0;
  double max_path_hours = 48.0;
  Instant instruction_time{};
  Instant next_instruction_time{};

  void validate() const {
    if (!(speed_mps > 0.0)) throw ConfigError("glider speed must be > 0");
    if (!(next_instruction_time > instruction_time)) {
      throw ConfigError("next instruction time must follow the instruction time");
    }
    if (!(max_track_hours > 0.0) || !(max_path_hours > 0.0)) throw ConfigError("track/path hour limits must be > 0");
  }
};

/// Keeps the fixes within `max_hours` of the last fix (window inclusive).
inline GliderTrack truncate_track(const GliderTrack& track, double max_hours) {
  if (track.fixes.empty()) throw RangeError("glider track '" + track.platform + "' has no fixes");
  if (!(max_hours > 0.0)) throw RangeError("max track hours must be > 0");
  const Instant last = track.fixes.back().time;
  GliderTrack out{track.platform, {}};
  for (const auto& f : track.fixes) {
    if (hours_between(f.time, last) <= max_hours + 1e-9) out.fixes.push_back(f);
  }
  return out;
}

/// Waypoints scheduled after `last_fix_time` and no later than max_path_hours.
inline std::vector<Waypoint> remaining_waypoints(const PlannedPath& path, Instant last_fix_time,
                                                 const TrackerConfig& cfg) {
  if (path.waypoints.empty()) throw RangeError("path for '" + path.platform + "' has no waypoints");
  const double elapsed = hours_between(cfg.instruction_time, last_fix_time);
  std::vector<Waypoint> out;
  for (const auto& w : path.waypoints) {
    if (static_cast<double>(w.hour) > elapsed && static_cast<double>(w.hour) <= cfg.max_path_hours) out.push_back(w);
  }
  return out;
}

/// Waypoints up to max_path_hours (the plotted portion of a suggested path).
inline PlannedPath truncate_path(const PlannedPath& path, double max_path_hours) {
  PlannedPath out{path.platform, {}, path.score};
  for (const auto& w : path.waypoints) {
    if (static_cast<double>(w.hour) <= max_path_hours) out.waypoints.push_back(w);
  }
  return out;
}

struct WaypointEta {
  int hour = 0;
  double along_km = 0.0;  // distance from the last fix along the polyline
  Instant eta;
};

struct Prediction {
  GeoPoint position;
  Instant last_fix_time;
  Instant prediction_time;
  double budget_km = 0.0;
  double travelled_km = 0.0;
  double surplus_km = 0.0;  // budget left after reaching the final waypoint
  bool stationary = false;  // no waypoints remained
  std::vector<WaypointEta> etas;
  std::vector<GeoPoint> travelled;  // polyline from the last fix to the prediction
};

/// Walks last_fix -> wp1 -> wp2 ... consuming speed x horizon kilometres.
inline Prediction predict_position(const Fix& last_fix, const std::vector<Waypoint>& remaining,
                                   const TrackerConfig& cfg) {
  if (!(cfg.speed_mps > 0.0)) throw ConfigError("glider speed must be > 0");
  const double horizon_h = hours_between(last_fix.time, cfg.next_instruction_time);
  if (horizon_h < 0.0) throw RangeError("next instruction time precedes the last fix");
  const double km_per_hour = cfg.speed_mps * 3.6;

  Prediction pred;
  pred.last_fix_time = last_fix.time;
  pred.prediction_time = cfg.next_instruction_time;
  pred.budget_km = km_per_hour * horizon_h;
  pred.position = last_fix.position;
  pred.travelled.push_back(last_fix.position);
  if (remaining.empty()) {
    pred.stationary = true;
    pred.surplus_km = pred.budget_km;
    return pred;
  }

  const CoordRef ref(last_fix.position);
  LocalPoint from = ref.to_local(last_fix.position);
  double along = 0.0;
  double budget = pred.budget_km;
  bool placed = false;
  for (const auto& w : remaining) {
    const LocalPoint to = ref.to_local(w.position);
    const double seg = dist_km(from, to);
    along += seg;
    pred.etas.push_back({w.hour, along, add_hours(last_fix.time, along / km_per_hour)});
    if (!placed) {
      if (budget <= seg) {
        const double t = seg > 0.0 ? budget / seg : 0.0;
        const LocalPoint at{from.x_km + t * (to.x_km - from.x_km), from.y_km + t * (to.y_km - from.y_km)};
        pred.position = t >= 1.0 ? w.position : ref.to_geo(at);
        pred.travelled.push_back(pred.position);
        pred.travelled_km = pred.budget_km;
        placed = true;
      } else {
        budget -= seg;
        pred.travelled.push_back(w.position);
      }
    }
    from = to;
  }
  if (!placed) {
    pred.position = remaining.back().position;
    pred.travelled_km = along;
    pred.surplus_km = budget;
  }
  return pred;
}

struct PlatformPrediction {
  std::string platform;
  Prediction prediction;
};

inline std::string write_predicted_position(const std::vector<PlatformPrediction>& preds) {
  std::string out = "# dead-reckoning prediction from the last fix (constant speed, ocean at rest)\n";
  char buf[256];
  for (const auto& pp : preds) {
    const Prediction& p = pp.prediction;
    out += "platform = " + pp.platform + "\n";
    out += "last_fix_time = " + format_iso8601(p.last_fix_time) + "\n";
    out += "prediction_time = " + format_iso8601(p.prediction_time) + "\n";
    std::snprintf(buf, sizeof buf, "lon = %.8f\nlat = %.8f\n", p.position.lon_deg, p.position.lat_deg);
    out += buf;
    out += "lat_dms = " + format_dms(p.position.lat_deg, Axis::lat) + "\n";
    out += "lon_dms = " + format_dms(p.position.lon_deg, Axis::lon) + "\n";
    std::snprintf(buf, sizeof buf, "budget_km = %.3f\ntravelled_km = %.3f\nsurplus_km = %.3f\nstationary = %d\n",
                  p.budget_km, p.travelled_km, p.surplus_km, p.stationary ? 1 : 0);
    out += buf;
    for (const auto& e : p.etas) {
      std::snprintf(buf, sizeof buf, "eta %03d %.3f %s\n", e.hour, e.along_km, format_iso8601(e.eta).c_str());
      out += buf;
    }
    out += "\n";
  }
  return out;
}

struct PredictedPositionEntry {
  std::string platform;
  GeoPoint position;
  bool stationary = false;
};

/// Reads back the per-platform positions (the next planning cycle's start positions).
inline std::vector<PredictedPositionEntry> read_predicted_position(std::istream& in) {
  std::vector<PredictedPositionEntry> out;
  std::string line;
  std::size_t lineno = 0;
  bool have_lon = false, have_lat = false;
  while (std::getline(in, line)) {
    ++lineno;
    detail::strip_cr(line);
    const std::string t = detail::trim(line);
    if (t.empty() || t[0] == '#' || t.rfind("eta ", 0) == 0) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ParseError("expected 'key = value'", lineno, 1);
    const std::string key = detail::trim(t.substr(0, eq));
    const std::string val = detail::trim(t.substr(eq + 1));
    if (key == "platform") {
      out.push_back({val, {}, false});
      have_lon = have_lat = false;
      continue;
    }
    if (out.empty()) throw ParseError("value before the first 'platform' entry", lineno, 1);
    if (key == "lon" || key == "lat") {
      const auto v = detail::to_double(val);
      if (!v) throw ParseError("bad " + key, lineno, 1);
      (key == "lon" ? out.back().position.lon_deg : out.back().position.lat_deg) = *v;
      (key == "lon" ? have_lon : have_lat) = true;
    } else if (key == "stationary") {
      out.back().stationary = val == "1";
    }
  }
  if (!out.empty() && !(have_lon && have_lat)) throw ParseError("last platform entry lacks lon/lat", lineno);
  return out;
}

}  // namespace gliderkit
