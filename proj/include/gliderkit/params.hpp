#pragma once

// `key = value` parameter files. Key names follow the option tables of the
// original tool packages (Max_track_hours, STD, ...) plus the planner inputs
// (speed_mps, op_area, ...). Unknown keys are preserved verbatim.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "gliderkit/error.hpp"
#include "gliderkit/geo.hpp"
#include "gliderkit/timeutil.hpp"

namespace gliderkit {

enum class ParamKind { number, integer, flag, text, point, points, names, numbers, time };

namespace detail {

inline std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

inline std::optional<double> to_double(std::string_view s) {
  const std::string t = trim(s);
  if (t.empty()) return std::nullopt;
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (end != t.c_str() + t.size()) return std::nullopt;
  return v;
}

inline std::optional<long long> to_integer(std::string_view s) {
  const std::string t = trim(s);
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
    // Accept integral floats such as "148." or "3.0".
    const auto d = to_double(t);
    if (d && std::isfinite(*d) && std::floor(*d) == *d && std::abs(*d) < 9.0e15) return static_cast<long long>(*d);
    return std::nullopt;
  }
  return v;
}

// All numeric tokens of a list-ish value: "[(1, 2), (3, 4)]", "1 2; 3 4", ...
inline std::optional<std::vector<double>> numeric_tokens(std::string_view s) {
  std::string t(s);
  for (char& c : t) {
    if (c == '[' || c == ']' || c == '(' || c == ')' || c == ',' || c == ';') c = ' ';
  }
  std::istringstream in(t);
  std::vector<double> out;
  std::string tok;
  while (in >> tok) {
    const auto v = to_double(tok);
    if (!v || !std::isfinite(*v)) return std::nullopt;
    out.push_back(*v);
  }
  return out;
}

inline std::string unquote(std::string_view s) {
  std::string t = trim(s);
  if (t.size() >= 2 && (t.front() == '\'' || t.front() == '"') && t.back() == t.front()) {
    return t.substr(1, t.size() - 2);
  }
  return t;
}

}  // namespace detail

class Params {
 public:
  static const std::map<std::string, ParamKind>& known_keys() {
    static const std::map<std::string, ParamKind> keys = {
        // tool options
        {"set_dms", ParamKind::flag},
        {"Show_Gliders", ParamKind::flag},
        {"Show_Vectors", ParamKind::flag},
        {"Show_OpArea", ParamKind::flag},
        {"Show_SingleGL", ParamKind::flag},
        {"Show_Colorbar", ParamKind::flag},
        {"Make_Animation", ParamKind::flag},
        {"Max_track_hours", ParamKind::number},
        {"Max_path_hours", ParamKind::number},
        {"Smooth_Image", ParamKind::integer},
        {"Field_Density", ParamKind::integer},
        {"Mask_Vectors", ParamKind::number},
        {"Ref_Vector", ParamKind::number},
        {"Ani_Ref_Vector", ParamKind::number},
        {"Crop_Morph", ParamKind::integer},
        {"Start_hour", ParamKind::integer},
        {"Stop_hour", ParamKind::integer},
        {"STD", ParamKind::number},
        {"Ellipse_Method", ParamKind::text},
        {"Ellipse_Runs", ParamKind::text},
        {"Frame_Delay_ms", ParamKind::integer},
        // common
        {"Glider_names", ParamKind::names},
        {"REGION", ParamKind::text},
        {"ensrun", ParamKind::integer},
        // planner / scenario inputs
        {"speed_mps", ParamKind::number},
        {"op_area", ParamKind::points},
        {"cords_init", ParamKind::points},
        {"rendezvous", ParamKind::point},
        {"runs", ParamKind::integer},
        {"individuals", ParamKind::integer},
        {"generations", ParamKind::integer},
        {"delta_hours", ParamKind::number},
        {"mission_hours", ParamKind::integer},
        {"waypoint_interval_hours", ParamKind::integer},
        {"min_separation_km", ParamKind::number},
        {"current_max_mps", ParamKind::number},
        {"seed", ParamKind::integer},
        {"instruction_time", ParamKind::time},
        {"next_instruction_time", ParamKind::time},
        {"cycle_hours", ParamKind::number},
        {"grid_size", ParamKind::integer},
        {"field_frames", ParamKind::integer},
        {"track_hours", ParamKind::integer},
        {"selection_fraction", ParamKind::number},
        {"mutation_sigma_km", ParamKind::number},
        {"immigrant_fraction", ParamKind::number},
        {"ccf_weights", ParamKind::numbers},
    };
    return keys;
  }

  static const std::map<std::string, std::string>& defaults() {
    static const std::map<std::string, std::string> d = {
        {"Max_track_hours", "148"}, {"Max_path_hours", "48"}, {"Field_Density", "3"},
        {"Mask_Vectors", "0"},      {"Ref_Vector", "1"},      {"Crop_Morph", "3"},
        {"Smooth_Image", "1"},      {"Start_hour", "12"},     {"Stop_hour", "48"},
        {"STD", "1.5"},             {"set_dms", "1"},         {"Show_Gliders", "1"},
        {"Show_Vectors", "1"},      {"Show_OpArea", "1"},     {"Show_SingleGL", "1"},
        {"Show_Colorbar", "0"},     {"Make_Animation", "1"},  {"Ani_Ref_Vector", "1"},
        {"Ellipse_Method", "AB"},   {"Frame_Delay_ms", "500"}, {"cycle_hours", "24"},
        {"Ellipse_Runs", "all"},
    };
    return d;
  }

  bool has(const std::string& key) const { return values_.count(key) || defaults().count(key); }
  bool explicitly_set(const std::string& key) const { return values_.count(key) != 0; }

  std::optional<std::string> raw(const std::string& key) const {
    if (auto it = values_.find(key); it != values_.end()) return it->second;
    if (auto it = defaults().find(key); it != defaults().end()) return it->second;
    return std::nullopt;
  }

  /// Sets a value, checking it against the key's type when the key is known.
  void set(const std::string& key, const std::string& value) {
    check(key, value);
    values_[key] = detail::trim(value);
  }

  // Copies every explicitly set entry of `overlay` over this one.
  void merge(const Params& overlay) {
    for (const auto& [k, v] : overlay.values_) values_[k] = v;
  }

  const std::map<std::string, std::string>& entries() const noexcept { return values_; }

  double number(const std::string& key) const {
    const auto v = detail::to_double(require(key));
    if (!v || !std::isfinite(*v)) throw mismatch(key, "a number");
    return *v;
  }
  long long integer(const std::string& key) const {
    const auto v = detail::to_integer(require(key));
    if (!v) throw mismatch(key, "an integer");
    return *v;
  }
  bool flag(const std::string& key) const { return integer(key) != 0; }
  std::string text(const std::string& key) const { return detail::unquote(require(key)); }

  std::vector<double> numbers(const std::string& key) const {
    const auto v = detail::numeric_tokens(require(key));
    if (!v) throw mismatch(key, "a list of numbers");
    return *v;
  }
  std::vector<GeoPoint> points(const std::string& key) const {
    const auto v = detail::numeric_tokens(require(key));
    if (!v || v->size() % 2 != 0 || v->empty()) throw mismatch(key, "a list of 'lon lat' pairs");
    std::vector<GeoPoint> out;
    for (std::size_t k = 0; k < v->size(); k += 2) out.push_back({(*v)[k], (*v)[k + 1]});
    return out;
  }
  GeoPoint point(const std::string& key) const {
    const auto pts = points(key);
    if (pts.size() != 1) throw mismatch(key, "a single 'lon lat' pair");
    return pts.front();
  }
  std::vector<std::string> names(const std::string& key) const {
    std::string t = require(key);
    for (char& c : t) {
      if (c == '[' || c == ']' || c == ',' || c == '\'' || c == '"') c = ' ';
    }
    std::istringstream in(t);
    std::vector<std::string> out;
    std::string tok;
    while (in >> tok) out.push_back(tok);
    if (out.empty()) throw mismatch(key, "a non-empty list of names");
    return out;
  }
  Instant time(const std::string& key) const {
    const auto t = parse_iso8601(detail::unquote(require(key)));
    if (!t) throw mismatch(key, "an ISO-8601 UTC timestamp");
    return *t;
  }

 private:
  std::string require(const std::string& key) const {
    auto v = raw(key);
    if (!v) throw ConfigError("missing required parameter '" + key + "'");
    return *v;
  }

  static ConfigError mismatch(const std::string& key, const std::string& expected) {
    return ConfigError("parameter '" + key + "' must be " + expected);
  }

  void check(const std::string& key, const std::string& value) const {
    const auto it = known_keys().find(key);
    if (it == known_keys().end()) return;
    Params probe;
    probe.values_[key] = detail::trim(value);
    switch (it->second) {
      case ParamKind::number: (void)probe.number(key); break;
      case ParamKind::integer: (void)probe.integer(key); break;
      case ParamKind::flag: (void)probe.flag(key); break;
      case ParamKind::text: break;
      case ParamKind::point: (void)probe.point(key); break;
      case ParamKind::points: (void)probe.points(key); break;
      case ParamKind::names: (void)probe.names(key); break;
      case ParamKind::numbers: (void)probe.numbers(key); break;
      case ParamKind::time: (void)probe.time(key); break;
    }
    if (key == "speed_mps" && !(probe.number(key) > 0.0)) throw ConfigError("parameter 'speed_mps' must be > 0");
    if (key == "delta_hours" && !(probe.number(key) > 0.0)) throw ConfigError("parameter 'delta_hours' must be > 0");
    if (key == "op_area" && probe.points(key).size() < 3) {
      throw ConfigError("parameter 'op_area' needs at least 3 vertices");
    }
  }

  std::map<std::string, std::string> values_;
};

/// Reads `key = value` lines; `#` starts a comment anywhere on a line.
inline Params read_params(std::istream& in) {
  Params p;
  std::string line;
  std::size_t lineno = 0;
  std::string doc_quote;  // set while inside a docstring block
  while (std::getline(in, line)) {
    ++lineno;
    // Option files carry Python-style docstring blocks of prose; skip them.
    const std::string raw = detail::trim(line);
    if (!doc_quote.empty()) {
      if (raw.find(doc_quote) != std::string::npos) doc_quote.clear();
      continue;
    }
    if (raw.rfind("'''", 0) == 0 || raw.rfind("\"\"\"", 0) == 0) {
      const std::string q = raw.substr(0, 3);
      if (raw.find(q, 3) == std::string::npos) doc_quote = q;
      continue;
    }
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string t = detail::trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ParseError("expected 'key = value'", lineno, 1);
    const std::string key = detail::trim(t.substr(0, eq));
    if (key.empty()) throw ParseError("empty parameter name", lineno, 1);
    try {
      p.set(key, t.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return p;
}

inline Params read_params(std::string_view text) {
  std::istringstream in{std::string(text)};
  return read_params(in);
}

inline std::string write_params(const Params& p) {
  std::string out;
  for (const auto& [k, v] : p.entries()) out += k + " = " + v + "\n";
  return out;
}

}  // namespace gliderkit
