#pragma once

// Readers and writers for every file the pipeline touches: morphology
// lattices, GA run CSVs and score logs, glider logs, gridded field series,
// and the two text deliverables (waypoint and confidence files).

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <regex>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "gliderkit/error.hpp"
#include "gliderkit/field.hpp"
#include "gliderkit/geo.hpp"
#include "gliderkit/params.hpp"
#include "gliderkit/timeutil.hpp"

namespace gliderkit {

namespace fs = std::filesystem;

struct Waypoint {
  int hour = 0;  // hours since the instruction time
  GeoPoint position;
  double bearing_deg = 0.0;  // clockwise from north
};

struct PlannedPath {
  std::string platform;
  std::vector<Waypoint> waypoints;
  double score = 0.0;

  std::vector<GeoPoint> positions() const {
    std::vector<GeoPoint> out;
    out.reserve(waypoints.size());
    for (const auto& w : waypoints) out.push_back(w.position);
    return out;
  }

  const Waypoint* at_hour(int hour) const {
    for (const auto& w : waypoints) {
      if (w.hour == hour) return &w;
    }
    return nullptr;
  }
};

/// One GA run: one path per platform.
struct Run {
  std::vector<PlannedPath> paths;
  double score = 0.0;

  const PlannedPath* path_for(std::string_view platform) const {
    for (const auto& p : paths) {
      if (p.platform == platform) return &p;
    }
    return nullptr;
  }
};

struct RunSet {
  std::vector<Run> runs;
  std::size_t best_index = 0;

  const Run& best() const { return runs.at(best_index); }

  std::vector<double> scores() const {
    std::vector<double> s;
    for (const auto& r : runs) s.push_back(r.score);
    return s;
  }

  std::vector<std::string> platforms() const {
    std::vector<std::string> out;
    if (!runs.empty()) {
      for (const auto& p : runs.front().paths) out.push_back(p.platform);
    }
    return out;
  }

  // Index of the maximal score; ties go to the lowest index.
  static std::size_t argmax(const std::vector<double>& scores) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < scores.size(); ++k) {
      if (scores[k] > scores[best]) best = k;
    }
    return best;
  }
};

struct Fix {
  Instant time;
  GeoPoint position;
};

struct GliderTrack {
  std::string platform;
  std::vector<Fix> fixes;
};

enum class Flag { clear, flagged };

inline const char* flag_text(Flag f) { return f == Flag::clear ? "Clear" : "FLAG"; }

struct WaypointRecord {
  int hour = 0;
  std::string lat_dms;
  std::string lon_dms;
  std::string platform;
  Flag out_of_bounds = Flag::clear;
  Flag too_close = Flag::clear;
  double weight = 0.0;
};

struct ConfidenceRecord {
  std::string platform;
  int hour = 0;
  GeoPoint center;
  double major_radius_km = 0.0;
  double minor_radius_km = 0.0;
  double angle_deg = 0.0;
};

/// Gridded cost surface: the combined cost plus each constituent column.
struct Morphology {
  ScalarGrid combined;
  std::vector<ScalarGrid> ccfs;
  std::vector<double> weights;  // from a `# weights:` header line, if present
};

// ---------------------------------------------------------------------------
// helpers

namespace detail {

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t k = 0; k <= s.size(); ++k) {
    if (k == s.size() || s[k] == sep) {
      out.emplace_back(s.substr(start, k - start));
      start = k + 1;
    }
  }
  return out;
}

inline std::vector<std::string> split_ws(std::string_view s) {
  std::istringstream in{std::string(s)};
  std::vector<std::string> out;
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

inline std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

inline void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

}  // namespace detail

inline std::string read_text_file(const fs::path& path, std::string_view role) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("missing input '" + path.string() + "' (" + std::string(role) + ")");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Writes through a sibling temporary and renames it into place.
inline void write_file_atomic(const fs::path& path, std::string_view content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write '" + tmp.string() + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw InputError("write failed for '" + tmp.string() + "'");
  }
  fs::rename(tmp, path);
}

// ---------------------------------------------------------------------------
// morphology / lattice text

inline Morphology read_morphology(std::istream& in) {
  struct Row {
    double lon, lat;
    std::vector<double> vals;
    std::size_t line;
  };
  std::vector<Row> rows;
  std::vector<double> weights;
  std::size_t columns = 0;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    detail::strip_cr(line);
    const std::string t = detail::trim(line);
    if (t.empty()) continue;
    if (t[0] == '#') {
      const std::string body = detail::trim(t.substr(1));
      if (body.rfind("weights:", 0) == 0) {
        const auto w = detail::numeric_tokens(body.substr(8));
        if (!w) throw ParseError("malformed weights header", lineno, 1);
        weights = *w;
      }
      continue;
    }
    const auto tok = detail::split_ws(t);
    if (tok.size() < 3) throw ParseError("expected 'lon lat value...' with at least 3 columns", lineno, 1);
    if (columns == 0) columns = tok.size();
    if (tok.size() != columns) {
      throw ParseError("ragged row: " + std::to_string(tok.size()) + " columns, expected " + std::to_string(columns),
                       lineno, 1);
    }
    Row r{};
    r.line = lineno;
    for (std::size_t k = 0; k < tok.size(); ++k) {
      const auto v = detail::to_double(tok[k]);
      if (!v || (k < 2 && !std::isfinite(*v))) {
        throw ParseError("bad number '" + tok[k] + "' in column " + std::to_string(k + 1), lineno, 1);
      }
      if (k == 0) r.lon = *v;
      else if (k == 1) r.lat = *v;
      else r.vals.push_back(*v);
    }
    rows.push_back(std::move(r));
  }
  if (rows.empty()) throw ParseError("lattice file contains no data rows", lineno);

  std::set<double> lon_set, lat_set;
  for (const auto& r : rows) {
    lon_set.insert(r.lon);
    lat_set.insert(r.lat);
  }
  std::vector<double> lons(lon_set.begin(), lon_set.end());
  std::vector<double> lats(lat_set.begin(), lat_set.end());
  const std::size_t nvals = columns - 2;
  Morphology m;
  m.weights = std::move(weights);
  m.combined = ScalarGrid(lons, lats);
  m.ccfs.assign(nvals - 1, ScalarGrid(lons, lats));
  std::vector<std::uint8_t> seen(lons.size() * lats.size(), 0);
  for (const auto& r : rows) {
    const auto i = static_cast<std::size_t>(std::lower_bound(lons.begin(), lons.end(), r.lon) - lons.begin());
    const auto j = static_cast<std::size_t>(std::lower_bound(lats.begin(), lats.end(), r.lat) - lats.begin());
    const std::size_t idx = m.combined.index(j, i);
    if (seen[idx]) throw ParseError("duplicate lattice cell (" + detail::fmt("%.17g", r.lon) + ", " +
                                        detail::fmt("%.17g", r.lat) + ")", r.line, 1);
    seen[idx] = 1;
    auto put = [&](ScalarGrid& g, double v) {
      g.values[idx] = std::isfinite(v) ? v : 0.0;
      g.mask[idx] = std::isfinite(v) ? 0 : 1;
    };
    put(m.combined, r.vals.back());
    for (std::size_t k = 0; k + 1 < nvals; ++k) put(m.ccfs[k], r.vals[k]);
  }
  if (rows.size() != seen.size()) {
    throw ParseError("incomplete lattice: " + std::to_string(rows.size()) + " of " + std::to_string(seen.size()) +
                         " cells present",
                     rows.back().line);
  }
  return m;
}

inline Morphology read_morphology(std::string_view text) {
  std::istringstream in{std::string(text)};
  return read_morphology(in);
}

inline std::string write_morphology(const Morphology& m) {
  const ScalarGrid& g = m.combined;
  std::string out = "# columns: lon lat";
  for (std::size_t k = 0; k < m.ccfs.size(); ++k) out += " ccf_" + std::to_string(k + 1);
  out += " combined\n";
  if (!m.weights.empty()) {
    out += "# weights:";
    for (double w : m.weights) out += " " + detail::fmt("%.17g", w);
    out += "\n";
  }
  auto cell = [](const ScalarGrid& s, std::size_t j, std::size_t i) {
    return s.masked(j, i) ? std::string("nan") : detail::fmt("%.17g", s.at(j, i));
  };
  for (std::size_t j = 0; j < g.ny(); ++j) {
    for (std::size_t i = 0; i < g.nx(); ++i) {
      out += detail::fmt("%.17g", g.lons[i]) + " " + detail::fmt("%.17g", g.lats[j]);
      for (const auto& c : m.ccfs) out += " " + cell(c, j, i);
      out += " " + cell(g, j, i) + "\n";
    }
  }
  return out;
}

inline ScalarGrid read_lattice(std::istream& in) { return read_morphology(in).combined; }

inline std::string write_lattice(const ScalarGrid& g) { return write_morphology(Morphology{g, {}, {}}); }

// ---------------------------------------------------------------------------
// GA runs

inline constexpr std::string_view kRunCsvHeader = "hour,platform,lon,lat,bearing";

inline Run read_run_csv(std::istream& in) {
  Run run;
  std::string line;
  std::size_t lineno = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++lineno;
    detail::strip_cr(line);
    if (detail::trim(line).empty()) continue;
    if (!header) {
      if (detail::trim(line) != kRunCsvHeader) {
        throw ParseError("expected header '" + std::string(kRunCsvHeader) + "'", lineno, 1);
      }
      header = true;
      continue;
    }
    const auto f = detail::split(line, ',');
    if (f.size() != 5) throw ParseError("expected 5 comma-separated fields", lineno, 1);
    const auto hour = detail::to_integer(f[0]);
    const auto lon = detail::to_double(f[2]);
    const auto lat = detail::to_double(f[3]);
    const auto bearing = detail::to_double(f[4]);
    const std::string platform = detail::trim(f[1]);
    if (!hour || *hour < 0) throw ParseError("bad hour '" + f[0] + "'", lineno, 1);
    if (platform.empty()) throw ParseError("empty platform name", lineno, 1);
    if (!lon || !lat || !std::isfinite(*lon) || !std::isfinite(*lat)) throw ParseError("bad lon/lat", lineno, 1);
    if (!bearing || !std::isfinite(*bearing)) throw ParseError("bad bearing", lineno, 1);
    if (std::abs(*lat) > 90.0 || std::abs(*lon) > 180.0) throw ParseError("lon/lat outside valid range", lineno, 1);
    PlannedPath* path = nullptr;
    for (auto& p : run.paths) {
      if (p.platform == platform) path = &p;
    }
    if (!path) {
      run.paths.push_back(PlannedPath{platform, {}, 0.0});
      path = &run.paths.back();
    }
    if (!path->waypoints.empty() && path->waypoints.back().hour >= *hour) {
      throw ParseError("hours for platform '" + platform + "' are not strictly increasing", lineno, 1);
    }
    path->waypoints.push_back({static_cast<int>(*hour), {*lon, *lat}, *bearing});
  }
  if (!header) throw ParseError("empty run file", lineno);
  if (run.paths.empty()) throw ParseError("run file has no waypoints", lineno);
  return run;
}

inline Run read_run_csv(std::string_view text) {
  std::istringstream in{std::string(text)};
  return read_run_csv(in);
}

inline std::string write_run_csv(const Run& run) {
  std::string out = std::string(kRunCsvHeader) + "\n";
  char buf[256];
  for (const auto& p : run.paths) {
    for (const auto& w : p.waypoints) {
      std::snprintf(buf, sizeof buf, "%d,%s,%.8f,%.8f,%.3f\n", w.hour, p.platform.c_str(), w.position.lon_deg,
                    w.position.lat_deg, w.bearing_deg);
      out += buf;
    }
  }
  return out;
}

struct ScoreLog {
  std::map<int, double> scores;  // 1-based run number -> score
  std::optional<int> best;
};

/// Lines `run <k> score <float>` and `best <k>`; other stdout noise is ignored.
inline ScoreLog read_score_log(std::istream& in) {
  ScoreLog log;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    detail::strip_cr(line);
    const auto tok = detail::split_ws(line);
    if (tok.empty()) continue;
    if (tok[0] == "run") {
      const auto k = tok.size() == 4 ? detail::to_integer(tok[1]) : std::nullopt;
      const auto s = tok.size() == 4 ? detail::to_double(tok[3]) : std::nullopt;
      if (!k || tok[2] != "score" || !s || !std::isfinite(*s) || *k < 1) {
        throw ParseError("expected 'run <k> score <float>'", lineno, 1);
      }
      if (log.scores.count(static_cast<int>(*k))) throw ParseError("duplicate score for run " + tok[1], lineno, 1);
      log.scores[static_cast<int>(*k)] = *s;
    } else if (tok[0] == "best") {
      const auto k = tok.size() == 2 ? detail::to_integer(tok[1]) : std::nullopt;
      if (!k || *k < 1) throw ParseError("expected 'best <k>'", lineno, 1);
      if (log.best) throw ParseError("duplicate best line", lineno, 1);
      log.best = static_cast<int>(*k);
    }
  }
  return log;
}

inline std::string write_score_log(const std::vector<double>& scores, std::size_t best_index) {
  std::string out;
  char buf[96];
  for (std::size_t k = 0; k < scores.size(); ++k) {
    std::snprintf(buf, sizeof buf, "run %zu score %.17g\n", k + 1, scores[k]);
    out += buf;
  }
  out += "best " + std::to_string(best_index + 1) + "\n";
  return out;
}

inline constexpr std::string_view kScoreLogName = "scores.log";
inline constexpr std::string_view kBestRunName = "best_run.csv";

inline fs::path run_csv_name(std::size_t run_index) { return "GA_Run" + std::to_string(run_index + 1) + ".csv"; }

/// Cross-checks a run set: shared platforms/hour grids, finite scores, best = argmax.
inline void check_runset(const RunSet& rs) {
  if (rs.runs.empty()) throw IntegrityError("run set is empty");
  const Run& first = rs.runs.front();
  for (std::size_t r = 0; r < rs.runs.size(); ++r) {
    const Run& run = rs.runs[r];
    if (!std::isfinite(run.score)) throw IntegrityError("run " + std::to_string(r + 1) + " has a non-finite score");
    if (run.paths.size() != first.paths.size()) {
      throw IntegrityError("run " + std::to_string(r + 1) + " has a different platform list");
    }
    for (std::size_t p = 0; p < run.paths.size(); ++p) {
      const auto& a = run.paths[p];
      const auto& b = first.paths[p];
      if (a.platform != b.platform) throw IntegrityError("run " + std::to_string(r + 1) + " has a different platform list");
      if (a.waypoints.size() != b.waypoints.size()) {
        throw IntegrityError("run " + std::to_string(r + 1) + " platform " + a.platform + " has a different hour grid");
      }
      for (std::size_t w = 0; w < a.waypoints.size(); ++w) {
        if (a.waypoints[w].hour != b.waypoints[w].hour) {
          throw IntegrityError("run " + std::to_string(r + 1) + " platform " + a.platform + " has a different hour grid");
        }
      }
    }
  }
  if (rs.best_index >= rs.runs.size() || rs.best_index != RunSet::argmax(rs.scores())) {
    throw IntegrityError("best run " + std::to_string(rs.best_index + 1) + " does not carry the maximal score");
  }
}

/// Assembles a RunSet from `GA_Run<k>.csv` files and the score log.
inline RunSet read_runs_dir(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw InputError("missing input '" + dir.string() + "' (scenario directory)");
  const std::regex pattern(R"(GA_Run([0-9]+)\.csv)");
  std::map<int, fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    std::smatch m;
    const std::string name = entry.path().filename().string();
    if (std::regex_match(name, m, pattern)) files[std::stoi(m[1].str())] = entry.path();
  }
  if (files.empty()) throw InputError("no GA_Run<k>.csv files in '" + dir.string() + "' (GA run data)");
  std::istringstream log_in(read_text_file(dir / kScoreLogName, "GA score log"));
  const ScoreLog log = read_score_log(log_in);

  RunSet rs;
  int expected = 1;
  for (const auto& [k, path] : files) {
    if (k != expected) throw IntegrityError("run files are not numbered contiguously from 1 (missing GA_Run" +
                                            std::to_string(expected) + ".csv)");
    ++expected;
    std::istringstream in(read_text_file(path, "GA run data"));
    Run run;
    try {
      run = read_run_csv(in);
    } catch (const ParseError& e) {
      throw ParseError(path.filename().string() + ": " + e.what(), e.line(), e.column());
    }
    const auto s = log.scores.find(k);
    if (s == log.scores.end()) throw IntegrityError("score log has no score for run " + std::to_string(k));
    run.score = s->second;
    for (auto& p : run.paths) p.score = run.score;
    rs.runs.push_back(std::move(run));
  }
  for (const auto& [k, s] : log.scores) {
    if (!files.count(k)) throw IntegrityError("score log mentions run " + std::to_string(k) + " with no run file");
  }
  if (!log.best) throw IntegrityError("score log has no 'best <k>' line");
  if (*log.best < 1 || static_cast<std::size_t>(*log.best) > rs.runs.size()) {
    throw IntegrityError("score log best run " + std::to_string(*log.best) + " does not exist");
  }
  rs.best_index = static_cast<std::size_t>(*log.best - 1);
  check_runset(rs);
  return rs;
}

inline void write_runs_dir(const fs::path& dir, const RunSet& rs) {
  for (std::size_t r = 0; r < rs.runs.size(); ++r) write_file_atomic(dir / run_csv_name(r), write_run_csv(rs.runs[r]));
  write_file_atomic(dir / kBestRunName, write_run_csv(rs.best()));
  write_file_atomic(dir / kScoreLogName, write_score_log(rs.scores(), rs.best_index));
}

// ---------------------------------------------------------------------------
// glider logs

/// Rows `timestamp_iso8601,lon,lat`; an optional header row starting with "timestamp".
inline GliderTrack read_glider_log(std::istream& in, std::string platform) {
  GliderTrack track{std::move(platform), {}};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    detail::strip_cr(line);
    const std::string t = detail::trim(line);
    if (t.empty() || t[0] == '#') continue;
    if (track.fixes.empty() && t.rfind("timestamp", 0) == 0) continue;
    const auto f = detail::split(t, ',');
    if (f.size() != 3) throw ParseError("expected 'timestamp,lon,lat'", lineno, 1);
    const auto when = parse_iso8601(detail::trim(f[0]));
    if (!when) throw ParseError("unparseable timestamp '" + f[0] + "'", lineno, 1);
    const auto lon = detail::to_double(f[1]);
    const auto lat = detail::to_double(f[2]);
    if (!lon || !lat || !std::isfinite(*lon) || !std::isfinite(*lat) || std::abs(*lat) > 90.0 ||
        std::abs(*lon) > 180.0) {
      throw ParseError("bad lon/lat", lineno, 1);
    }
    if (!track.fixes.empty() && *when < track.fixes.back().time) {
      throw ParseError("timestamps decrease", lineno, 1);
    }
    track.fixes.push_back({*when, {*lon, *lat}});
  }
  return track;
}

inline GliderTrack read_glider_log_file(const fs::path& path) {
  std::istringstream in(read_text_file(path, "glider log"));
  try {
    return read_glider_log(in, path.stem().string());
  } catch (const ParseError& e) {
    throw ParseError(path.filename().string() + ": " + e.what(), e.line(), e.column());
  }
}

inline std::string write_glider_log(const GliderTrack& track) {
  std::string out = "timestamp,lon,lat\n";
  char buf[128];
  for (const auto& f : track.fixes) {
    std::snprintf(buf, sizeof buf, "%s,%.8f,%.8f\n", format_iso8601(f.time).c_str(), f.position.lon_deg,
                  f.position.lat_deg);
    out += buf;
  }
  return out;
}

// ---------------------------------------------------------------------------
// field series

inline constexpr std::string_view kSeriesMetaName = "series.meta";

inline fs::path frame_file_name(std::string_view var, std::size_t k) {
  return std::string(var) + "_t" + std::to_string(k) + ".txt";
}

/// Frames `<var>_t<k>.txt` for k = 0..T-1 plus `series.meta` (start_time, delta_hours).
inline FieldSeries read_field_series(const fs::path& dir, std::string_view var) {
  const Params meta = read_params(read_text_file(dir / kSeriesMetaName, "field series metadata"));
  FieldSeries s;
  s.start_time = meta.time("start_time");
  s.delta_hours = meta.number("delta_hours");
  if (!(s.delta_hours > 0.0)) throw ConfigError("series.meta: delta_hours must be > 0");
  for (std::size_t k = 0;; ++k) {
    const fs::path p = dir / frame_file_name(var, k);
    if (!fs::exists(p)) break;
    std::istringstream in(read_text_file(p, "forecast frame"));
    try {
      s.frames.push_back(read_lattice(in));
    } catch (const ParseError& e) {
      throw ParseError(p.filename().string() + ": " + e.what(), e.line(), e.column());
    }
    if (!s.frames.back().same_lattice(s.frames.front())) {
      throw IntegrityError("frame " + p.filename().string() + " is on a different lattice than frame 0");
    }
  }
  if (s.frames.empty()) {
    throw InputError("missing input '" + (dir / frame_file_name(var, 0)).string() + "' (forecast frame)");
  }
  return s;
}

inline void write_field_series(const fs::path& dir, std::string_view var, const FieldSeries& s) {
  for (std::size_t k = 0; k < s.frames.size(); ++k) write_file_atomic(dir / frame_file_name(var, k), write_lattice(s.frames[k]));
  write_file_atomic(dir / kSeriesMetaName, "start_time = " + format_iso8601(s.start_time) + "\ndelta_hours = " +
                                               detail::fmt("%.17g", s.delta_hours) + "\n");
}

// ---------------------------------------------------------------------------
// waypoint file

inline constexpr std::string_view kWaypointHeader = "Time\tLatitude\tLongitude\tPlatform\tOut Of Bounds?\tToo Close?\tWeight";

inline std::string format_waypoint_row(const WaypointRecord& r) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%03d\t%s\t%s\t%s\t%s\t%s\t%.4f", r.hour, r.lat_dms.c_str(), r.lon_dms.c_str(),
                r.platform.c_str(), flag_text(r.out_of_bounds), flag_text(r.too_close), r.weight);
  return buf;
}

inline std::string write_waypoint_file(const std::vector<WaypointRecord>& records) {
  std::string out = std::string(kWaypointHeader) + "\n";
  for (const auto& r : records) out += format_waypoint_row(r) + "\n";
  return out;
}

inline std::vector<WaypointRecord> read_waypoint_file(std::istream& in) {
  std::vector<WaypointRecord> out;
  std::string line;
  std::size_t lineno = 0;
  bool header = false;
  auto parse_flag = [&](const std::string& s) {
    if (s == "Clear") return Flag::clear;
    if (s == "FLAG") return Flag::flagged;
    throw ParseError("expected Clear or FLAG, got '" + s + "'", lineno, 1);
  };
  while (std::getline(in, line)) {
    ++lineno;
    detail::strip_cr(line);
    if (detail::trim(line).empty()) continue;
    if (!header) {
      if (line != kWaypointHeader) throw ParseError("missing waypoint file header", lineno, 1);
      header = true;
      continue;
    }
    const auto f = detail::split(line, '\t');
    if (f.size() != 7) throw ParseError("expected 7 tab-separated fields", lineno, 1);
    WaypointRecord r;
    const auto hour = detail::to_integer(f[0]);
    const auto w = detail::to_double(f[6]);
    if (!hour || *hour < 0) throw ParseError("bad time '" + f[0] + "'", lineno, 1);
    if (!w || !(*w >= 0.0 && *w <= 1.0)) throw ParseError("weight outside [0,1]", lineno, 1);
    try {
      (void)parse_dms(f[1], Axis::lat);
      (void)parse_dms(f[2], Axis::lon);
    } catch (const ParseError& e) {
      throw ParseError(e.what(), lineno, e.column());
    }
    r.hour = static_cast<int>(*hour);
    r.lat_dms = f[1];
    r.lon_dms = f[2];
    r.platform = f[3];
    r.out_of_bounds = parse_flag(f[4]);
    r.too_close = parse_flag(f[5]);
    r.weight = *w;
    out.push_back(std::move(r));
  }
  return out;
}

// ---------------------------------------------------------------------------
// confidence file

inline constexpr std::string_view kConfidenceHeader = "Platform,Time,Latitude,Longitude,DR,dr,Angle";

// Three decimals; a value that would print as 180.000 wraps to 0.000.
inline std::string format_angle(double deg) {
  double a = std::round(normalize_axis_deg(deg) * 1000.0) / 1000.0;
  if (a >= 180.0) a = 0.0;
  return detail::fmt("%.3f", a);
}

inline std::string format_confidence_row(const ConfidenceRecord& r) {
  return r.platform + "," + std::to_string(r.hour) + "," + format_dms(r.center.lat_deg, Axis::lat) + "," +
         format_dms(r.center.lon_deg, Axis::lon) + "," + detail::fmt("%.2f", r.major_radius_km) + "km," +
         detail::fmt("%.2f", r.minor_radius_km) + "km," + format_angle(r.angle_deg);
}

inline std::string write_confidence_file(const std::vector<ConfidenceRecord>& records) {
  std::string out = std::string(kConfidenceHeader) + "\n";
  for (const auto& r : records) out += format_confidence_row(r) + "\n";
  return out;
}

inline std::vector<ConfidenceRecord> read_confidence_file(std::istream& in) {
  std::vector<ConfidenceRecord> out;
  std::string line;
  std::size_t lineno = 0;
  bool header = false;
  auto radius = [&](std::string s) {
    s = detail::trim(s);
    if (s.size() < 3 || s.substr(s.size() - 2) != "km") throw ParseError("radius must end in 'km'", lineno, 1);
    const auto v = detail::to_double(s.substr(0, s.size() - 2));
    if (!v || !(*v >= 0.0) || !std::isfinite(*v)) throw ParseError("bad radius '" + s + "'", lineno, 1);
    return *v;
  };
  while (std::getline(in, line)) {
    ++lineno;
    detail::strip_cr(line);
    if (detail::trim(line).empty()) continue;
    if (!header) {
      if (detail::trim(line) != kConfidenceHeader) throw ParseError("missing confidence file header", lineno, 1);
      header = true;
      continue;
    }
    const auto f = detail::split(line, ',');
    if (f.size() != 7) throw ParseError("expected 7 comma-separated fields", lineno, 1);
    ConfidenceRecord r;
    r.platform = f[0];
    const auto hour = detail::to_integer(f[1]);
    if (!hour || *hour < 0) throw ParseError("bad time '" + f[1] + "'", lineno, 1);
    r.hour = static_cast<int>(*hour);
    try {
      r.center.lat_deg = parse_dms(f[2], Axis::lat);
      r.center.lon_deg = parse_dms(f[3], Axis::lon);
    } catch (const ParseError& e) {
      throw ParseError(e.what(), lineno, e.column());
    }
    r.major_radius_km = radius(f[4]);
    r.minor_radius_km = radius(f[5]);
    const auto angle = detail::to_double(f[6]);
    if (!angle || !(*angle >= 0.0 && *angle < 180.0)) throw ParseError("angle outside [0,180)", lineno, 1);
    r.angle_deg = *angle;
    if (r.minor_radius_km > r.major_radius_km) {
      throw IntegrityError("line " + std::to_string(lineno) + ": minor radius exceeds major radius");
    }
    out.push_back(std::move(r));
  }
  if (!header) throw ParseError("empty confidence file", lineno);
  return out;
}

inline std::vector<ConfidenceRecord> read_confidence_file(std::string_view text) {
  std::istringstream in{std::string(text)};
  return read_confidence_file(in);
}

inline std::vector<WaypointRecord> read_waypoint_file(std::string_view text) {
  std::istringstream in{std::string(text)};
  return read_waypoint_file(in);
}

}  // namespace gliderkit
