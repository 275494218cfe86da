#pragma once

// Coordinate handling: lon/lat <-> local kilometre plane, planar distances,
// and degrees-minutes-seconds text.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "gliderkit/error.hpp"

namespace gliderkit {

struct GeoPoint {
  double lon_deg = 0.0;
  double lat_deg = 0.0;

  friend bool operator==(const GeoPoint&, const GeoPoint&) = default;
};

struct LocalPoint {
  double x_km = 0.0;  // east of the reference origin
  double y_km = 0.0;  // north of the reference origin

  friend bool operator==(const LocalPoint&, const LocalPoint&) = default;
};

inline constexpr double kKmPerDegLat = 110.574;
inline constexpr double kKmPerDegLonEquator = 111.320;
// Half-width of the window (degrees) in which the tangent plane is trusted.
inline constexpr double kProjectionWindowDeg = 5.0;

inline double deg2rad(double d) { return d * std::numbers::pi / 180.0; }
inline double rad2deg(double r) { return r * 180.0 / std::numbers::pi; }

// Fold an axis direction onto [0, 180).
inline double normalize_axis_deg(double deg) {
  double a = std::fmod(deg, 180.0);
  if (a < 0.0) a += 180.0;
  if (a >= 180.0) a -= 180.0;
  return a;
}

// Clockwise-from-north angle of the vector (east, north), in [0, 360).
inline double bearing_deg(double east, double north) {
  double b = rad2deg(std::atan2(east, north));
  if (b < 0.0) b += 360.0;
  if (b >= 360.0) b -= 360.0;
  return b;
}

/// Local equirectangular reference frame anchored at an origin.
class CoordRef {
 public:
  explicit CoordRef(GeoPoint origin = {})
      : origin_(origin),
        km_per_deg_lon_(kKmPerDegLonEquator * std::cos(deg2rad(origin.lat_deg))) {
    if (!(origin.lat_deg >= -90.0 && origin.lat_deg <= 90.0) ||
        !(origin.lon_deg >= -180.0 && origin.lon_deg <= 180.0)) {
      throw RangeError("reference origin outside lon/lat range");
    }
    if (km_per_deg_lon_ < 0.0) km_per_deg_lon_ = 0.0;
  }

  const GeoPoint& origin() const noexcept { return origin_; }
  double km_per_deg_lat() const noexcept { return kKmPerDegLat; }
  double km_per_deg_lon() const noexcept { return km_per_deg_lon_; }

  LocalPoint to_local(GeoPoint p) const {
    const double dlon = p.lon_deg - origin_.lon_deg;
    const double dlat = p.lat_deg - origin_.lat_deg;
    if (!(std::abs(dlon) <= kProjectionWindowDeg) || !(std::abs(dlat) <= kProjectionWindowDeg)) {
      throw RangeError("point (" + std::to_string(p.lon_deg) + ", " + std::to_string(p.lat_deg) +
                       ") lies outside the local projection window of the reference origin");
    }
    return {dlon * km_per_deg_lon_, dlat * kKmPerDegLat};
  }

  GeoPoint to_geo(LocalPoint q) const {
    if (!std::isfinite(q.x_km) || !std::isfinite(q.y_km)) {
      throw RangeError("non-finite local coordinate");
    }
    // cos(90 deg) is ~6e-17 in floating point, not zero.
    if (km_per_deg_lon_ < 1e-9) {
      throw DegenerateError("local projection is degenerate at a polar origin");
    }
    return {origin_.lon_deg + q.x_km / km_per_deg_lon_, origin_.lat_deg + q.y_km / kKmPerDegLat};
  }

 private:
  GeoPoint origin_;
  double km_per_deg_lon_;
};

inline LocalPoint to_local(const CoordRef& ref, GeoPoint p) { return ref.to_local(p); }
inline GeoPoint to_geo(const CoordRef& ref, LocalPoint q) { return ref.to_geo(q); }

inline double dist_km(LocalPoint a, LocalPoint b) {
  return std::hypot(a.x_km - b.x_km, a.y_km - b.y_km);
}

inline double dist_km(GeoPoint a, GeoPoint b, const CoordRef& ref) {
  return dist_km(ref.to_local(a), ref.to_local(b));
}

// Arithmetic mean of lon/lat; adequate at glider scales (no antimeridian).
inline GeoPoint mean_point(std::span<const GeoPoint> pts) {
  if (pts.empty()) throw DegenerateError("mean of an empty point set");
  double lon = 0.0, lat = 0.0;
  for (const auto& p : pts) {
    lon += p.lon_deg;
    lat += p.lat_deg;
  }
  const auto n = static_cast<double>(pts.size());
  return {lon / n, lat / n};
}

enum class Axis { lat, lon };

/// Formats `DD H MM'SS.sss"`, e.g. 36.3344 (lat) -> `36 N 20'03.840"`.
inline std::string format_dms(double deg, Axis axis) {
  const double limit = axis == Axis::lat ? 90.0 : 180.0;
  if (!(std::abs(deg) <= limit)) throw RangeError("coordinate outside axis range");
  // Round once to whole milliarcseconds so that 59.9996" never prints as 60.000".
  const auto mas = static_cast<std::int64_t>(std::llround(std::abs(deg) * 3600.0 * 1000.0));
  const auto d = mas / 3'600'000;
  const auto m = (mas / 60'000) % 60;
  const auto s_whole = (mas / 1000) % 60;
  const auto s_frac = mas % 1000;
  const bool negative = deg < 0.0 && mas != 0;
  char hemi = axis == Axis::lat ? (negative ? 'S' : 'N') : (negative ? 'W' : 'E');
  char buf[48];
  std::snprintf(buf, sizeof buf, "%02lld %c %02lld'%02lld.%03lld\"", static_cast<long long>(d), hemi,
                static_cast<long long>(m), static_cast<long long>(s_whole), static_cast<long long>(s_frac));
  return buf;
}

namespace detail {

class DmsCursor {
 public:
  explicit DmsCursor(std::string_view text) : text_(text) {}

  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError("malformed DMS '" + std::string(text_) + "': " + what, 0, pos_ + 1);
  }
  // Blames the character just consumed.
  [[noreturn]] void fail_previous(const std::string& what) const {
    throw ParseError("malformed DMS '" + std::string(text_) + "': " + what, 0, pos_);
  }

  bool done() const { return pos_ >= text_.size(); }
  char peek() const { return done() ? '\0' : text_[pos_]; }

  void expect(char c) {
    if (peek() != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  // Reads one or more decimal digits; returns the value and the digit count.
  std::pair<long long, int> digits() {
    long long v = 0;
    int n = 0;
    while (!done() && peek() >= '0' && peek() <= '9') {
      if (n > 12) fail("numeric field too long");
      v = v * 10 + (peek() - '0');
      ++pos_;
      ++n;
    }
    if (n == 0) fail("expected digit");
    return {v, n};
  }

  char take() {
    if (done()) fail("unexpected end of text");
    return text_[pos_++];
  }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace detail

/// Inverse of format_dms. When `axis` is given, the hemisphere letter must match it.
inline double parse_dms(std::string_view text, std::optional<Axis> axis = std::nullopt) {
  detail::DmsCursor cur(text);
  const auto [deg, deg_digits] = cur.digits();
  cur.expect(' ');
  const char hemi = cur.take();
  Axis found;
  double sign = 1.0;
  switch (hemi) {
    case 'N': found = Axis::lat; break;
    case 'S': found = Axis::lat; sign = -1.0; break;
    case 'E': found = Axis::lon; break;
    case 'W': found = Axis::lon; sign = -1.0; break;
    default: cur.fail_previous("expected hemisphere letter N, S, E or W");
  }
  if (axis && *axis != found) cur.fail_previous("hemisphere letter does not match the expected axis");
  cur.expect(' ');
  const auto [minutes, min_digits] = cur.digits();
  if (min_digits != 2) cur.fail("minutes must have two digits");
  cur.expect('\'');
  const auto [sec_whole, sec_digits] = cur.digits();
  if (sec_digits != 2) cur.fail("seconds must have two digits");
  double seconds = static_cast<double>(sec_whole);
  if (cur.peek() == '.') {
    cur.expect('.');
    const auto [frac, frac_digits] = cur.digits();
    seconds += static_cast<double>(frac) / std::pow(10.0, frac_digits);
  }
  cur.expect('"');
  if (!cur.done()) cur.fail("trailing characters");
  if (minutes >= 60) cur.fail("minutes out of range");
  if (seconds >= 60.0) cur.fail("seconds out of range");
  (void)deg_digits;
  const double value = static_cast<double>(deg) + static_cast<double>(minutes) / 60.0 + seconds / 3600.0;
  const double limit = found == Axis::lat ? 90.0 : 180.0;
  if (value > limit) cur.fail("value exceeds axis range");
  return sign * value;
}

}  // namespace gliderkit
