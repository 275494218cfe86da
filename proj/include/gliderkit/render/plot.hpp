#pragma once

// Layered map plots. A PlotSpec holds data in plot coordinates (lon/lat for
// maps, km for the local ellipse frame); render_raster draws the layers in a
// fixed z-order onto a canvas.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gliderkit/error.hpp"
#include "gliderkit/field.hpp"
#include "gliderkit/geo.hpp"
#include "gliderkit/render/image.hpp"
#include "gliderkit/render/png.hpp"

namespace gliderkit::render {

enum class AxisMode { none, decimal, dms, km };

struct Polyline {
  std::vector<PointPx> points;  // plot coordinates
  Rgb color = colors::black;
  int width = 1;
  bool closed = false;
  bool dashed = false;
};

enum class MarkerShape { disc, ring, star, cross };

struct Marker {
  PointPx at;  // plot coordinates
  Rgb color = colors::black;
  double radius_px = 3.0;
  MarkerShape shape = MarkerShape::disc;
  std::string label;
};

struct Glyph {
  PointPx at;
  double u = 0.0, v = 0.0;  // m/s east, north
};

struct Bar {
  double x0 = 0.0, x1 = 0.0, height = 0.0;
  Rgb color = colors::blue;
  std::string label;
};

struct PlotSpec {
  int width = 800;
  int height = 640;
  std::string title;
  AxisMode axis = AxisMode::decimal;
  BoundingBox extent{0.0, 1.0, 0.0, 1.0};  // x range = lon range, y range = lat range

  // Layers, drawn in this order.
  std::optional<ScalarGrid> raster;  // values in [0,1]; masked nodes drawn white
  std::vector<Bar> bars;
  std::vector<Glyph> vectors;
  double vector_px_per_mps = 20.0;
  std::vector<Polyline> op_area;
  std::vector<Polyline> paths;
  std::vector<Marker> waypoints;
  std::vector<Polyline> track;
  std::vector<Marker> track_fixes;
  std::vector<Polyline> ellipses;
  std::vector<Marker> markers;

  bool show_gliders = true;  // paths, waypoints and tracks
  bool show_vectors = true;
  bool show_oparea = true;
  bool show_colorbar = false;
  std::vector<std::string> legend;
};

/// 0 maps to cool blue, 1 to warm red; never white.
inline Rgb colormap(double t) {
  t = std::clamp(std::isfinite(t) ? t : 0.0, 0.0, 1.0);
  struct Stop {
    double t;
    Rgb c;
  };
  static constexpr Stop stops[] = {{0.0, {20, 40, 160}},  {0.25, {30, 140, 230}}, {0.5, {60, 200, 120}},
                                   {0.75, {245, 215, 40}}, {1.0, {205, 30, 30}}};
  for (std::size_t k = 1; k < std::size(stops); ++k) {
    if (t <= stops[k].t) {
      const double f = (t - stops[k - 1].t) / (stops[k].t - stops[k - 1].t);
      auto mix = [f](std::uint8_t a, std::uint8_t b) {
        return static_cast<std::uint8_t>(std::lround(a + f * (static_cast<double>(b) - a)));
      };
      return {mix(stops[k - 1].c.r, stops[k].c.r), mix(stops[k - 1].c.g, stops[k].c.g), mix(stops[k - 1].c.b, stops[k].c.b)};
    }
  }
  return stops[std::size(stops) - 1].c;
}

/// Glyphs left after thinning by `density` and masking below `min_mag`.
inline std::vector<Glyph> vector_glyphs(const VectorFrame& frame, std::size_t density, double min_mag) {
  const VectorFrame f = mask_vectors(thin_vectors(frame, density), min_mag);
  std::vector<Glyph> out;
  for (std::size_t j = 0; j < f.u.ny(); ++j) {
    for (std::size_t i = 0; i < f.u.nx(); ++i) {
      if (!f.masked(j, i)) out.push_back({{f.u.lons[i], f.u.lats[j]}, f.u.at(j, i), f.v.at(j, i)});
    }
  }
  return out;
}

namespace detail {

inline double nice_step(double span, int target) {
  const double raw = span / std::max(1, target);
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 2.5, 5.0, 10.0}) {
    if (m * mag >= raw) return m * mag;
  }
  return 10.0 * mag;
}

}  // namespace detail

/// Tick positions and their text. DMS labels are produced by format_dms, so
/// they parse back through parse_dms.
inline std::vector<std::pair<double, std::string>> axis_tick_labels(double lo, double hi, AxisMode mode, Axis axis,
                                                                     int target = 5) {
  std::vector<std::pair<double, std::string>> out;
  if (mode == AxisMode::none || !(hi > lo)) return out;
  const double step = detail::nice_step(hi - lo, target);
  const double first = std::ceil(lo / step - 1e-9) * step;
  for (double v = first; v <= hi + 1e-9 * step; v += step) {
    const double t = std::abs(v) < 1e-12 * step ? 0.0 : v;
    std::string s;
    if (mode == AxisMode::dms) {
      s = format_dms(t, axis);
    } else {
      char buf[32];
      const int decimals = std::clamp(static_cast<int>(std::ceil(-std::log10(step) + 1e-9)), 0, 6);
      std::snprintf(buf, sizeof buf, "%.*f", decimals, t);
      s = buf;
    }
    out.emplace_back(t, std::move(s));
  }
  return out;
}

/// Maps plot coordinates to pixels inside the frame.
class Frame {
 public:
  Frame(const PlotSpec& s)
      : ext_(s.extent),
        left_(s.axis == AxisMode::dms ? 104 : 64),
        top_(s.title.empty() ? 12 : 30),
        right_(s.width - (s.show_colorbar ? 72 : 16)),
        bottom_(s.height - (s.axis == AxisMode::none ? 12 : 36) - (s.legend.empty() ? 0 : 12)) {
    if (!(ext_.lon_max > ext_.lon_min) || !(ext_.lat_max > ext_.lat_min)) throw RangeError("plot extent is empty");
  }

  PointPx to_px(PointPx p) const {
    return {left_ + (p.x - ext_.lon_min) / (ext_.lon_max - ext_.lon_min) * (right_ - left_),
            bottom_ - (p.y - ext_.lat_min) / (ext_.lat_max - ext_.lat_min) * (bottom_ - top_)};
  }
  PointPx to_plot(double px, double py) const {
    return {ext_.lon_min + (px - left_) / (right_ - left_) * (ext_.lon_max - ext_.lon_min),
            ext_.lat_min + (bottom_ - py) / (bottom_ - top_) * (ext_.lat_max - ext_.lat_min)};
  }
  int left() const { return left_; }
  int top() const { return top_; }
  int right() const { return right_; }
  int bottom() const { return bottom_; }
  bool valid() const { return right_ > left_ + 4 && bottom_ > top_ + 4; }

 private:
  BoundingBox ext_;
  int left_, top_, right_, bottom_;
};

namespace detail {

// Index of the lattice node nearest to v (axis ascending).
inline std::size_t nearest_index(const std::vector<double>& axis, double v) {
  const auto it = std::lower_bound(axis.begin(), axis.end(), v);
  if (it == axis.begin()) return 0;
  if (it == axis.end()) return axis.size() - 1;
  const std::size_t hi = static_cast<std::size_t>(it - axis.begin());
  return (v - axis[hi - 1] <= axis[hi] - v) ? hi - 1 : hi;
}

inline double half_spacing(const std::vector<double>& axis) {
  return axis.size() > 1 ? 0.5 * (axis.back() - axis.front()) / static_cast<double>(axis.size() - 1) : 0.5;
}

inline void draw_raster(Canvas& c, const Frame& f, const ScalarGrid& g) {
  if (g.nx() == 0 || g.ny() == 0) return;
  const double hx = half_spacing(g.lons), hy = half_spacing(g.lats);
  for (int py = f.top(); py <= f.bottom(); ++py) {
    for (int px = f.left(); px <= f.right(); ++px) {
      const PointPx p = f.to_plot(px, py);
      if (p.x < g.lons.front() - hx || p.x > g.lons.back() + hx || p.y < g.lats.front() - hy || p.y > g.lats.back() + hy) {
        continue;
      }
      const std::size_t i = nearest_index(g.lons, p.x), j = nearest_index(g.lats, p.y);
      c.set(px, py, g.masked(j, i) ? colors::white : colormap(g.at(j, i)));
    }
  }
}

inline void draw_polylines(Canvas& c, const Frame& f, const std::vector<Polyline>& lines) {
  for (const auto& l : lines) {
    std::vector<PointPx> px;
    for (const auto& p : l.points) px.push_back(f.to_px(p));
    c.polyline(px, l.color, l.width, l.closed, l.dashed);
  }
}

inline void draw_markers(Canvas& c, const Frame& f, const std::vector<Marker>& ms) {
  for (const auto& m : ms) {
    const PointPx p = f.to_px(m.at);
    switch (m.shape) {
      case MarkerShape::disc: c.disc(p, m.radius_px, m.color); break;
      case MarkerShape::ring: c.ring(p, m.radius_px, m.color, 2); break;
      case MarkerShape::star: c.star(p, m.radius_px, m.color, colors::black); break;
      case MarkerShape::cross:
        c.line({p.x - m.radius_px, p.y}, {p.x + m.radius_px, p.y}, m.color, 2);
        c.line({p.x, p.y - m.radius_px}, {p.x, p.y + m.radius_px}, m.color, 2);
        break;
    }
  }
  for (const auto& m : ms) {
    if (m.label.empty()) continue;
    const PointPx p = f.to_px(m.at);
    c.label(static_cast<int>(std::lround(p.x + m.radius_px + 2)), static_cast<int>(std::lround(p.y - 10)), m.label, colors::black);
  }
}

}  // namespace detail

inline Canvas render_raster(const PlotSpec& s) {
  if (s.width <= 0 || s.height <= 0) throw RangeError("plot canvas has zero size");
  Canvas c(s.width, s.height, colors::white);
  const Frame f(s);
  if (!f.valid()) throw RangeError("plot canvas is too small for its frame");

  if (s.raster) detail::draw_raster(c, f, *s.raster);
  for (const auto& b : s.bars) {
    const PointPx a = f.to_px({b.x0, 0.0}), z = f.to_px({b.x1, b.height});
    c.fill_rect(static_cast<int>(std::lround(a.x)), static_cast<int>(std::lround(z.y)), static_cast<int>(std::lround(z.x)) - 1,
                static_cast<int>(std::lround(a.y)), b.color);
    if (!b.label.empty()) {
      const int w = Canvas::text_width(b.label);
      c.text(static_cast<int>(std::lround(0.5 * (a.x + z.x))) - w / 2, static_cast<int>(std::lround(z.y)) - 10, b.label,
             colors::black);
    }
  }
  if (s.show_vectors) {
    for (const auto& g : s.vectors) {
      const PointPx tail = f.to_px(g.at);
      const PointPx tip{tail.x + g.u * s.vector_px_per_mps, tail.y - g.v * s.vector_px_per_mps};
      c.arrow(tail, tip, colors::black);
    }
  }
  if (s.show_oparea) detail::draw_polylines(c, f, s.op_area);
  if (s.show_gliders) {
    detail::draw_polylines(c, f, s.paths);
    detail::draw_markers(c, f, s.waypoints);
    detail::draw_polylines(c, f, s.track);
    detail::draw_markers(c, f, s.track_fixes);
  }
  detail::draw_polylines(c, f, s.ellipses);
  detail::draw_markers(c, f, s.markers);

  // Frame, ticks and labels on top of everything inside the plot area.
  c.fill_rect(0, 0, s.width - 1, f.top() - 1, colors::white);
  c.fill_rect(0, f.bottom() + 1, s.width - 1, s.height - 1, colors::white);
  c.fill_rect(0, 0, f.left() - 1, s.height - 1, colors::white);
  c.fill_rect(f.right() + 1, 0, s.width - 1, s.height - 1, colors::white);
  if (s.axis != AxisMode::none) c.rect(f.left(), f.top(), f.right(), f.bottom(), colors::black);
  if (!s.title.empty()) c.text(std::max(2, (s.width - Canvas::text_width(s.title, 2)) / 2), 6, s.title, colors::black, 2);

  const Axis xa = Axis::lon, ya = Axis::lat;
  for (const auto& [v, text] : axis_tick_labels(s.extent.lon_min, s.extent.lon_max, s.axis, xa)) {
    const int x = static_cast<int>(std::lround(f.to_px({v, s.extent.lat_min}).x));
    c.line({double(x), double(f.bottom())}, {double(x), double(f.bottom() + 4)}, colors::black);
    c.text(std::clamp(x - Canvas::text_width(text) / 2, 0, s.width - Canvas::text_width(text)), f.bottom() + 7, text,
           colors::black);
  }
  for (const auto& [v, text] : axis_tick_labels(s.extent.lat_min, s.extent.lat_max, s.axis, ya)) {
    const int y = static_cast<int>(std::lround(f.to_px({s.extent.lon_min, v}).y));
    c.line({double(f.left() - 4), double(y)}, {double(f.left()), double(y)}, colors::black);
    c.text(std::max(0, f.left() - 6 - Canvas::text_width(text)), y - 3, text, colors::black);
  }
  if (s.axis == AxisMode::km) {
    c.text(f.right() - Canvas::text_width("km east"), f.bottom() + 20, "km east", colors::black);
    c.text(2, f.top() - 10 >= 0 ? f.top() - 10 : 0, "km north", colors::black);
  }
  if (!s.legend.empty()) {
    int x = f.left();
    for (const auto& item : s.legend) {
      c.text(x, s.height - 11, item, colors::black);
      x += Canvas::text_width(item) + 12;
    }
  }
  if (s.show_colorbar) {
    const int x0 = f.right() + 12, x1 = x0 + 14;
    for (int y = f.top(); y <= f.bottom(); ++y) {
      const double t = static_cast<double>(f.bottom() - y) / std::max(1, f.bottom() - f.top());
      c.fill_rect(x0, y, x1, y, colormap(t));
    }
    c.rect(x0, f.top(), x1, f.bottom(), colors::black);
    c.text(x1 + 3, f.top(), "1", colors::black);
    c.text(x1 + 3, f.bottom() - 7, "0", colors::black);
  }
  return c;
}

inline std::vector<std::uint8_t> render_png(const PlotSpec& s) { return encode_png(render_raster(s)); }

/// Lon/lat box padded by `pad` of its size (at least `min_pad_deg`).
inline BoundingBox padded_extent(const std::vector<GeoPoint>& pts, double pad = 0.15, double min_pad_deg = 0.02) {
  if (pts.empty()) throw RangeError("cannot frame an empty point set");
  BoundingBox b{pts[0].lon_deg, pts[0].lon_deg, pts[0].lat_deg, pts[0].lat_deg};
  for (const auto& p : pts) {
    b.lon_min = std::min(b.lon_min, p.lon_deg);
    b.lon_max = std::max(b.lon_max, p.lon_deg);
    b.lat_min = std::min(b.lat_min, p.lat_deg);
    b.lat_max = std::max(b.lat_max, p.lat_deg);
  }
  const double px = std::max(pad * (b.lon_max - b.lon_min), min_pad_deg);
  const double py = std::max(pad * (b.lat_max - b.lat_min), min_pad_deg);
  return {b.lon_min - px, b.lon_max + px, b.lat_min - py, b.lat_max + py};
}

inline PointPx geo_px(GeoPoint p) { return {p.lon_deg, p.lat_deg}; }

inline Polyline geo_polyline(const std::vector<GeoPoint>& pts, Rgb color, int width = 1, bool closed = false,
                             bool dashed = false) {
  Polyline l{{}, color, width, closed, dashed};
  for (const auto& p : pts) l.points.push_back(geo_px(p));
  return l;
}

}  // namespace gliderkit::render
