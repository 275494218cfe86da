#pragma once

// RGB canvas and the handful of raster primitives the plots need.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>
#include <vector>

#include "gliderkit/error.hpp"
#include "gliderkit/render/font5x7.hpp"

namespace gliderkit::render {

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  friend bool operator==(Rgb, Rgb) = default;
};

namespace colors {
inline constexpr Rgb white{255, 255, 255};
inline constexpr Rgb black{0, 0, 0};
inline constexpr Rgb gray{150, 150, 150};
inline constexpr Rgb light_gray{210, 210, 210};
inline constexpr Rgb red{220, 30, 30};
inline constexpr Rgb green{20, 170, 40};
inline constexpr Rgb blue{30, 70, 220};
inline constexpr Rgb yellow{240, 210, 0};
inline constexpr Rgb magenta{200, 0, 200};
inline constexpr Rgb orange{245, 140, 0};
inline constexpr Rgb navy{10, 20, 90};
}  // namespace colors

struct PointPx {
  double x = 0.0, y = 0.0;
};

class Canvas {
 public:
  Canvas(int width, int height, Rgb fill = colors::white) : w_(width), h_(height) {
    if (width <= 0 || height <= 0) throw RangeError("canvas size must be positive");
    px_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * 3, 0);
    clear(fill);
  }

  int width() const noexcept { return w_; }
  int height() const noexcept { return h_; }
  const std::vector<std::uint8_t>& data() const noexcept { return px_; }

  void clear(Rgb c) {
    for (std::size_t k = 0; k < px_.size(); k += 3) {
      px_[k] = c.r;
      px_[k + 1] = c.g;
      px_[k + 2] = c.b;
    }
  }

  bool inside(int x, int y) const noexcept { return x >= 0 && y >= 0 && x < w_ && y < h_; }

  void set(int x, int y, Rgb c) {
    if (!inside(x, y)) return;
    const std::size_t k = (static_cast<std::size_t>(y) * static_cast<std::size_t>(w_) + static_cast<std::size_t>(x)) * 3;
    px_[k] = c.r;
    px_[k + 1] = c.g;
    px_[k + 2] = c.b;
  }

  Rgb get(int x, int y) const {
    if (!inside(x, y)) throw RangeError("pixel probe outside the canvas");
    const std::size_t k = (static_cast<std::size_t>(y) * static_cast<std::size_t>(w_) + static_cast<std::size_t>(x)) * 3;
    return {px_[k], px_[k + 1], px_[k + 2]};
  }

  void fill_rect(int x0, int y0, int x1, int y1, Rgb c) {
    x0 = std::max(x0, 0);
    y0 = std::max(y0, 0);
    x1 = std::min(x1, w_ - 1);
    y1 = std::min(y1, h_ - 1);
    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) set(x, y, c);
    }
  }

  void rect(int x0, int y0, int x1, int y1, Rgb c) {
    line({double(x0), double(y0)}, {double(x1), double(y0)}, c);
    line({double(x1), double(y0)}, {double(x1), double(y1)}, c);
    line({double(x1), double(y1)}, {double(x0), double(y1)}, c);
    line({double(x0), double(y1)}, {double(x0), double(y0)}, c);
  }

  void disc(PointPx p, double radius, Rgb c) {
    const int r = static_cast<int>(std::ceil(radius));
    const int cx = static_cast<int>(std::lround(p.x)), cy = static_cast<int>(std::lround(p.y));
    for (int dy = -r; dy <= r; ++dy) {
      for (int dx = -r; dx <= r; ++dx) {
        if (dx * dx + dy * dy <= radius * radius + 0.25) set(cx + dx, cy + dy, c);
      }
    }
  }

  void ring(PointPx p, double radius, Rgb c, int thickness = 1) {
    const int r = static_cast<int>(std::ceil(radius)) + thickness;
    const int cx = static_cast<int>(std::lround(p.x)), cy = static_cast<int>(std::lround(p.y));
    for (int dy = -r; dy <= r; ++dy) {
      for (int dx = -r; dx <= r; ++dx) {
        const double d = std::hypot(dx, dy);
        if (d >= radius - 0.5 && d <= radius + thickness - 0.5) set(cx + dx, cy + dy, c);
      }
    }
  }

  // Bresenham; `width` > 1 stamps discs along the line.
  void line(PointPx a, PointPx b, Rgb c, int width = 1) {
    walk(a, b, [&](int x, int y, long) { stamp(x, y, c, width); });
  }

  void dashed_line(PointPx a, PointPx b, Rgb c, int width = 1, int on = 6, int off = 4) {
    walk(a, b, [&](int x, int y, long step) {
      if (step % (on + off) < on) stamp(x, y, c, width);
    });
  }

  void polyline(const std::vector<PointPx>& pts, Rgb c, int width = 1, bool closed = false, bool dashed = false) {
    for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
      dashed ? dashed_line(pts[k], pts[k + 1], c, width) : line(pts[k], pts[k + 1], c, width);
    }
    if (closed && pts.size() > 2) {
      dashed ? dashed_line(pts.back(), pts.front(), c, width) : line(pts.back(), pts.front(), c, width);
    }
  }

  // Even-odd scanline fill.
  void fill_polygon(const std::vector<PointPx>& pts, Rgb c) {
    if (pts.size() < 3) return;
    double ymin = pts[0].y, ymax = pts[0].y;
    for (const auto& p : pts) {
      ymin = std::min(ymin, p.y);
      ymax = std::max(ymax, p.y);
    }
    for (int y = std::max(0, static_cast<int>(std::floor(ymin))); y <= std::min(h_ - 1, static_cast<int>(std::ceil(ymax))); ++y) {
      const double sy = y + 0.5;
      std::vector<double> xs;
      for (std::size_t k = 0, m = pts.size() - 1; k < pts.size(); m = k++) {
        const auto& a = pts[k];
        const auto& b = pts[m];
        if ((a.y > sy) != (b.y > sy)) xs.push_back(a.x + (sy - a.y) * (b.x - a.x) / (b.y - a.y));
      }
      std::sort(xs.begin(), xs.end());
      for (std::size_t k = 0; k + 1 < xs.size(); k += 2) {
        for (int x = static_cast<int>(std::ceil(xs[k] - 0.5)); x <= static_cast<int>(std::floor(xs[k + 1] - 0.5)); ++x) {
          set(x, y, c);
        }
      }
    }
  }

  void star(PointPx p, double radius, Rgb fill, Rgb edge) {
    std::vector<PointPx> pts;
    for (int k = 0; k < 10; ++k) {
      const double a = std::numbers::pi * static_cast<double>(k) / 5.0;
      const double r = (k % 2 == 0) ? radius : radius * 0.45;
      pts.push_back({p.x + r * std::sin(a), p.y - r * std::cos(a)});
    }
    fill_polygon(pts, fill);
    polyline(pts, edge, 1, true);
  }

  // Shaft from `tail` to `tip` with a two-stroke head.
  void arrow(PointPx tail, PointPx tip, Rgb c, double head_px = 4.0) {
    line(tail, tip, c);
    const double dx = tip.x - tail.x, dy = tip.y - tail.y;
    const double len = std::hypot(dx, dy);
    if (len < 1e-9) return;
    const double ux = dx / len, uy = dy / len;
    const double h = std::min(head_px, 0.5 * len + 1.0);
    line(tip, {tip.x - h * (ux - 0.5 * uy), tip.y - h * (uy + 0.5 * ux)}, c);
    line(tip, {tip.x - h * (ux + 0.5 * uy), tip.y - h * (uy - 0.5 * ux)}, c);
  }

  static int text_width(std::string_view s, int scale = 1) { return static_cast<int>(s.size()) * 6 * scale; }

  void text(int x, int y, std::string_view s, Rgb c, int scale = 1) {
    for (char ch : s) {
      const int code = static_cast<unsigned char>(ch);
      const auto& glyph = kFont5x7[(code >= 32 && code <= 126) ? code - 32 : '?' - 32];
      for (int col = 0; col < 5; ++col) {
        for (int row = 0; row < 7; ++row) {
          if (glyph[static_cast<std::size_t>(col)] & (1u << row)) {
            fill_rect(x + col * scale, y + row * scale, x + col * scale + scale - 1, y + row * scale + scale - 1, c);
          }
        }
      }
      x += 6 * scale;
    }
  }

  // Text on a white box so it stays readable over a raster.
  void label(int x, int y, std::string_view s, Rgb c, int scale = 1) {
    fill_rect(x - 1, y - 1, x + text_width(s, scale), y + 7 * scale, colors::white);
    text(x, y, s, c, scale);
  }

 private:
  void stamp(int x, int y, Rgb c, int width) {
    if (width <= 1) {
      set(x, y, c);
    } else {
      disc({double(x), double(y)}, 0.5 * width, c);
    }
  }

  template <typename F>
  void walk(PointPx a, PointPx b, F&& f) {
    if (!std::isfinite(a.x) || !std::isfinite(a.y) || !std::isfinite(b.x) || !std::isfinite(b.y)) return;
    // Clamp absurd coordinates so a stray point cannot stall the walk.
    const double lim = 4.0 * (w_ + h_);
    auto cl = [&](double v) { return std::clamp(v, -lim, lim); };
    int x0 = static_cast<int>(std::lround(cl(a.x))), y0 = static_cast<int>(std::lround(cl(a.y)));
    const int x1 = static_cast<int>(std::lround(cl(b.x))), y1 = static_cast<int>(std::lround(cl(b.y)));
    const int dx = std::abs(x1 - x0), sx = x0 < x1 ? 1 : -1;
    const int dy = -std::abs(y1 - y0), sy = y0 < y1 ? 1 : -1;
    int err = dx + dy;
    long step = 0;
    for (;;) {
      f(x0, y0, step++);
      if (x0 == x1 && y0 == y1) break;
      const int e2 = 2 * err;
      if (e2 >= dy) {
        err += dy;
        x0 += sx;
      }
      if (e2 <= dx) {
        err += dx;
        y0 += sy;
      }
    }
  }

  int w_, h_;
  std::vector<std::uint8_t> px_;
};

}  // namespace gliderkit::render
