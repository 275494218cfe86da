#pragma once

// Gridded scalar/vector fields and the transforms used to prepare them for
// display: normalization, boundary cropping, smoothing, bilinear sampling,
// vector thinning and magnitude masking. Every transform returns a new grid.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gliderkit/error.hpp"
#include "gliderkit/geo.hpp"
#include "gliderkit/timeutil.hpp"

namespace gliderkit {

struct BoundingBox {
  double lon_min = 0.0;
  double lon_max = 0.0;
  double lat_min = 0.0;
  double lat_max = 0.0;

  bool contains(double lon, double lat) const {
    return lon >= lon_min && lon <= lon_max && lat >= lat_min && lat <= lat_max;
  }
  bool contains(GeoPoint p) const { return contains(p.lon_deg, p.lat_deg); }
};

/// Lon/lat lattice with one value per node. `values` and `mask` are row-major
/// [lat][lon]; a set mask entry marks a node whose value carries no meaning.
struct ScalarGrid {
  std::vector<double> lons;  // ascending
  std::vector<double> lats;  // ascending
  std::vector<double> values;
  std::vector<std::uint8_t> mask;

  ScalarGrid() = default;
  ScalarGrid(std::vector<double> lon_axis, std::vector<double> lat_axis, double fill = 0.0)
      : lons(std::move(lon_axis)),
        lats(std::move(lat_axis)),
        values(lons.size() * lats.size(), fill),
        mask(lons.size() * lats.size(), 0) {}

  std::size_t nx() const noexcept { return lons.size(); }
  std::size_t ny() const noexcept { return lats.size(); }
  std::size_t size() const noexcept { return values.size(); }
  std::size_t index(std::size_t j, std::size_t i) const noexcept { return j * nx() + i; }

  double& at(std::size_t j, std::size_t i) { return values[index(j, i)]; }
  double at(std::size_t j, std::size_t i) const { return values[index(j, i)]; }
  bool masked(std::size_t j, std::size_t i) const { return mask[index(j, i)] != 0; }
  void set_masked(std::size_t j, std::size_t i, bool m = true) { mask[index(j, i)] = m ? 1 : 0; }

  bool same_lattice(const ScalarGrid& o) const { return lons == o.lons && lats == o.lats; }

  BoundingBox hull() const {
    if (lons.empty() || lats.empty()) return {};
    return {lons.front(), lons.back(), lats.front(), lats.back()};
  }

  void validate() const {
    if (lons.empty() || lats.empty()) throw RangeError("grid has an empty axis");
    if (values.size() != nx() * ny() || mask.size() != values.size()) {
      throw RangeError("grid value/mask sizes do not match its axes");
    }
    auto ascending = [](const std::vector<double>& a) {
      return std::adjacent_find(a.begin(), a.end(), std::greater_equal<>()) == a.end();
    };
    if (!ascending(lons) || !ascending(lats)) throw RangeError("grid axes must be strictly ascending");
  }
};

/// Range over unmasked nodes (optionally restricted to a box). Empty when all masked.
inline std::optional<std::pair<double, double>> value_range(const ScalarGrid& g,
                                                            const std::optional<BoundingBox>& region = std::nullopt) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  bool any = false;
  for (std::size_t j = 0; j < g.ny(); ++j) {
    for (std::size_t i = 0; i < g.nx(); ++i) {
      if (g.masked(j, i)) continue;
      if (region && !region->contains(g.lons[i], g.lats[j])) continue;
      lo = std::min(lo, g.at(j, i));
      hi = std::max(hi, g.at(j, i));
      any = true;
    }
  }
  if (!any) return std::nullopt;
  return std::pair{lo, hi};
}

/// Min-max normalization onto [0,1]. With a region, nodes outside it are
/// masked in the result and only in-region nodes set the span. A constant
/// field maps to 0.
inline ScalarGrid normalize(const ScalarGrid& g, const std::optional<BoundingBox>& region = std::nullopt) {
  const auto range = value_range(g, region);
  if (!range) throw RangeError("normalization region contains no unmasked cells");
  const auto [lo, hi] = *range;
  const double span = hi - lo;
  ScalarGrid out = g;
  for (std::size_t j = 0; j < g.ny(); ++j) {
    for (std::size_t i = 0; i < g.nx(); ++i) {
      if (region && !region->contains(g.lons[i], g.lats[j])) out.set_masked(j, i);
      if (out.masked(j, i)) {
        out.at(j, i) = 0.0;
        continue;
      }
      out.at(j, i) = span > 0.0 ? std::clamp((g.at(j, i) - lo) / span, 0.0, 1.0) : 0.0;
    }
  }
  return out;
}

/// Box around a path, grown on each side by 10% of its diagonal (at least one
/// grid spacing, so a stationary path still covers its neighbouring nodes).
inline BoundingBox local_region(std::span<const GeoPoint> path, const ScalarGrid& g) {
  if (path.empty()) throw RangeError("local region of an empty path");
  BoundingBox b{path[0].lon_deg, path[0].lon_deg, path[0].lat_deg, path[0].lat_deg};
  for (const auto& p : path) {
    b.lon_min = std::min(b.lon_min, p.lon_deg);
    b.lon_max = std::max(b.lon_max, p.lon_deg);
    b.lat_min = std::min(b.lat_min, p.lat_deg);
    b.lat_max = std::max(b.lat_max, p.lat_deg);
  }
  double spacing = 0.0;
  if (g.nx() > 1) spacing = std::max(spacing, (g.lons.back() - g.lons.front()) / static_cast<double>(g.nx() - 1));
  if (g.ny() > 1) spacing = std::max(spacing, (g.lats.back() - g.lats.front()) / static_cast<double>(g.ny() - 1));
  const double diag = std::hypot(b.lon_max - b.lon_min, b.lat_max - b.lat_min);
  const double margin = std::max(0.1 * diag, spacing);
  return {b.lon_min - margin, b.lon_max + margin, b.lat_min - margin, b.lat_max + margin};
}

/// Masks the outer `rings` rows/columns on every side.
inline ScalarGrid crop_boundary(const ScalarGrid& g, std::size_t rings) {
  if (2 * rings >= std::min(g.nx(), g.ny()) && rings > 0) {
    throw RangeError("grid too small to crop " + std::to_string(rings) + " boundary rings");
  }
  ScalarGrid out = g;
  for (std::size_t j = 0; j < g.ny(); ++j) {
    for (std::size_t i = 0; i < g.nx(); ++i) {
      if (j < rings || i < rings || j >= g.ny() - rings || i >= g.nx() - rings) out.set_masked(j, i);
    }
  }
  return out;
}

enum class SmoothScheme { none, kaiser, bilinear, gaussian, bicubic };

inline SmoothScheme smooth_scheme_from_level(int level) {
  switch (level) {
    case 0: return SmoothScheme::none;
    case 1: return SmoothScheme::kaiser;
    case 2: return SmoothScheme::bilinear;
    case 3: return SmoothScheme::gaussian;
    case 4: return SmoothScheme::bicubic;
    default: throw ConfigError("unknown smoothing level " + std::to_string(level) + " (expected 0-4)");
  }
}

inline SmoothScheme parse_smooth_scheme(std::string_view name) {
  if (name == "none") return SmoothScheme::none;
  if (name == "kaiser") return SmoothScheme::kaiser;
  if (name == "bilinear") return SmoothScheme::bilinear;
  if (name == "gaussian") return SmoothScheme::gaussian;
  if (name == "bicubic") return SmoothScheme::bicubic;
  throw ConfigError("unknown smoothing scheme '" + std::string(name) + "'");
}

namespace detail {

// Each interval of `axis` split into `factor` equal parts.
inline std::vector<double> refine_axis(const std::vector<double>& axis, std::size_t factor) {
  if (axis.size() < 2) return axis;
  std::vector<double> out;
  out.reserve((axis.size() - 1) * factor + 1);
  for (std::size_t k = 0; k + 1 < axis.size(); ++k) {
    for (std::size_t s = 0; s < factor; ++s) {
      out.push_back(axis[k] + (axis[k + 1] - axis[k]) * static_cast<double>(s) / static_cast<double>(factor));
    }
  }
  out.push_back(axis.back());
  return out;
}

// Masked nodes take the mean of already-known 4-neighbours, growing inward
// from the unmasked region. Used only to give interpolation stencils values.
inline std::vector<double> fill_masked(const ScalarGrid& g) {
  std::vector<double> v = g.values;
  std::vector<std::uint8_t> known(g.size());
  bool any = false;
  for (std::size_t k = 0; k < g.size(); ++k) {
    known[k] = g.mask[k] ? 0 : 1;
    any = any || known[k];
  }
  if (!any) return std::vector<double>(g.size(), 0.0);
  const auto nx = static_cast<long>(g.nx());
  const auto ny = static_cast<long>(g.ny());
  bool pending = true;
  while (pending) {
    pending = false;
    std::vector<std::pair<std::size_t, double>> updates;
    for (long j = 0; j < ny; ++j) {
      for (long i = 0; i < nx; ++i) {
        const auto k = static_cast<std::size_t>(j * nx + i);
        if (known[k]) continue;
        double sum = 0.0;
        int n = 0;
        const long nb[4][2] = {{j - 1, i}, {j + 1, i}, {j, i - 1}, {j, i + 1}};
        for (const auto& [jj, ii] : nb) {
          if (jj < 0 || ii < 0 || jj >= ny || ii >= nx) continue;
          const auto kk = static_cast<std::size_t>(jj * nx + ii);
          if (known[kk]) {
            sum += v[kk];
            ++n;
          }
        }
        if (n > 0) updates.emplace_back(k, sum / n);
        else pending = true;
      }
    }
    for (const auto& [k, val] : updates) {
      v[k] = val;
      known[k] = 1;
    }
  }
  return v;
}

inline double catmull_rom(double p0, double p1, double p2, double p3, double t) {
  const double t2 = t * t;
  const double t3 = t2 * t;
  return 0.5 * ((2.0 * p1) + (-p0 + p2) * t + (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3) * t2 +
                (-p0 + 3.0 * p1 - 3.0 * p2 + p3) * t3);
}

inline std::vector<double> smoothing_kernel(SmoothScheme scheme, std::size_t factor) {
  const auto half = static_cast<long>(factor);
  std::vector<double> w;
  for (long k = -half; k <= half; ++k) {
    const double r = static_cast<double>(k) / static_cast<double>(half);
    if (scheme == SmoothScheme::kaiser) {
      constexpr double beta = 8.0;
      w.push_back(std::cyl_bessel_i(0.0, beta * std::sqrt(std::max(0.0, 1.0 - r * r))) / std::cyl_bessel_i(0.0, beta));
    } else {
      const double sigma = static_cast<double>(factor) / 2.0;
      w.push_back(std::exp(-static_cast<double>(k * k) / (2.0 * sigma * sigma)));
    }
  }
  return w;
}

// Separable convolution with edge-renormalized weights.
inline std::vector<double> convolve_separable(const std::vector<double>& src, std::size_t nx, std::size_t ny,
                                              const std::vector<double>& kernel) {
  const long half = static_cast<long>(kernel.size() / 2);
  std::vector<double> tmp(src.size()), out(src.size());
  for (std::size_t j = 0; j < ny; ++j) {
    for (std::size_t i = 0; i < nx; ++i) {
      double acc = 0.0, wsum = 0.0;
      for (long k = -half; k <= half; ++k) {
        const long ii = static_cast<long>(i) + k;
        if (ii < 0 || ii >= static_cast<long>(nx)) continue;
        const double w = kernel[static_cast<std::size_t>(k + half)];
        acc += w * src[j * nx + static_cast<std::size_t>(ii)];
        wsum += w;
      }
      tmp[j * nx + i] = acc / wsum;
    }
  }
  for (std::size_t j = 0; j < ny; ++j) {
    for (std::size_t i = 0; i < nx; ++i) {
      double acc = 0.0, wsum = 0.0;
      for (long k = -half; k <= half; ++k) {
        const long jj = static_cast<long>(j) + k;
        if (jj < 0 || jj >= static_cast<long>(ny)) continue;
        const double w = kernel[static_cast<std::size_t>(k + half)];
        acc += w * tmp[static_cast<std::size_t>(jj) * nx + i];
        wsum += w;
      }
      out[j * nx + i] = acc / wsum;
    }
  }
  return out;
}

}  // namespace detail

/// Upsamples by `factor` (each lattice interval split into `factor` parts).
/// Interpolating schemes reproduce the source at source nodes; a fine node is
/// masked when its nearest source node is masked.
inline ScalarGrid smooth(const ScalarGrid& g, SmoothScheme scheme, std::size_t factor) {
  if (factor < 1) throw RangeError("smoothing factor must be >= 1");
  g.validate();
  ScalarGrid out(detail::refine_axis(g.lons, factor), detail::refine_axis(g.lats, factor));
  const std::vector<double> src = detail::fill_masked(g);
  const auto nx = static_cast<long>(g.nx());
  const auto ny = static_cast<long>(g.ny());
  auto at = [&](long j, long i) {
    j = std::clamp(j, 0L, ny - 1);
    i = std::clamp(i, 0L, nx - 1);
    return src[static_cast<std::size_t>(j * nx + i)];
  };
  const auto f = static_cast<long>(factor);

  for (std::size_t fj = 0; fj < out.ny(); ++fj) {
    const long j0 = static_cast<long>(fj) / f;
    const double ty = static_cast<double>(static_cast<long>(fj) % f) / static_cast<double>(f);
    const long jn = ty >= 0.5 ? j0 + 1 : j0;
    for (std::size_t fi = 0; fi < out.nx(); ++fi) {
      const long i0 = static_cast<long>(fi) / f;
      const double tx = static_cast<double>(static_cast<long>(fi) % f) / static_cast<double>(f);
      const long in = tx >= 0.5 ? i0 + 1 : i0;
      double v = 0.0;
      switch (scheme) {
        case SmoothScheme::none:
        case SmoothScheme::kaiser:
        case SmoothScheme::gaussian:
          v = at(jn, in);
          break;
        case SmoothScheme::bilinear:
          v = (1 - ty) * ((1 - tx) * at(j0, i0) + tx * at(j0, i0 + 1)) +
              ty * ((1 - tx) * at(j0 + 1, i0) + tx * at(j0 + 1, i0 + 1));
          break;
        case SmoothScheme::bicubic: {
          double rows[4];
          for (long r = 0; r < 4; ++r) {
            const long jj = j0 - 1 + r;
            rows[r] = detail::catmull_rom(at(jj, i0 - 1), at(jj, i0), at(jj, i0 + 1), at(jj, i0 + 2), tx);
          }
          v = detail::catmull_rom(rows[0], rows[1], rows[2], rows[3], ty);
          break;
        }
      }
      out.at(fj, fi) = v;
      out.set_masked(fj, fi, g.masked(static_cast<std::size_t>(std::min(jn, ny - 1)),
                                      static_cast<std::size_t>(std::min(in, nx - 1))));
    }
  }

  if (scheme == SmoothScheme::kaiser || scheme == SmoothScheme::gaussian) {
    out.values = detail::convolve_separable(out.values, out.nx(), out.ny(), detail::smoothing_kernel(scheme, factor));
  }
  return out;
}

namespace detail {

// Locates v on an ascending axis: (cell index, fraction within the cell).
inline std::optional<std::pair<std::size_t, double>> locate(const std::vector<double>& axis, double v) {
  if (axis.empty() || !(v >= axis.front() && v <= axis.back())) return std::nullopt;
  if (axis.size() == 1) return std::pair<std::size_t, double>{0, 0.0};
  auto it = std::upper_bound(axis.begin(), axis.end(), v);
  std::size_t k = it == axis.end() ? axis.size() - 2 : static_cast<std::size_t>(it - axis.begin()) - 1;
  k = std::min(k, axis.size() - 2);
  const double t = (v - axis[k]) / (axis[k + 1] - axis[k]);
  return std::pair{k, std::clamp(t, 0.0, 1.0)};
}

}  // namespace detail

/// Bilinear interpolation at p; nullopt when p is outside the hull or a node
/// carrying nonzero weight is masked.
inline std::optional<double> try_sample_bilinear(const ScalarGrid& g, GeoPoint p) {
  const auto cx = detail::locate(g.lons, p.lon_deg);
  const auto cy = detail::locate(g.lats, p.lat_deg);
  if (!cx || !cy) return std::nullopt;
  const auto [i, tx] = *cx;
  const auto [j, ty] = *cy;
  const std::size_t i1 = std::min(i + 1, g.nx() - 1);
  const std::size_t j1 = std::min(j + 1, g.ny() - 1);
  const double w[4] = {(1 - tx) * (1 - ty), tx * (1 - ty), (1 - tx) * ty, tx * ty};
  const std::size_t jj[4] = {j, j, j1, j1};
  const std::size_t ii[4] = {i, i1, i, i1};
  double v = 0.0;
  for (int k = 0; k < 4; ++k) {
    if (w[k] == 0.0) continue;
    if (g.masked(jj[k], ii[k])) return std::nullopt;
    v += w[k] * g.at(jj[k], ii[k]);
  }
  return v;
}

inline double sample_bilinear(const ScalarGrid& g, GeoPoint p) {
  const auto cx = detail::locate(g.lons, p.lon_deg);
  const auto cy = detail::locate(g.lats, p.lat_deg);
  if (!cx || !cy) {
    throw RangeError("sample point (" + std::to_string(p.lon_deg) + ", " + std::to_string(p.lat_deg) +
                     ") lies outside the grid hull");
  }
  const auto v = try_sample_bilinear(g, p);
  if (!v) throw RangeError("sample point has a masked neighbourhood");
  return *v;
}

/// East/north velocity components (m/s) on one lattice.
struct VectorFrame {
  ScalarGrid u;
  ScalarGrid v;

  void validate() const {
    u.validate();
    v.validate();
    if (!u.same_lattice(v)) throw RangeError("u and v components are on different lattices");
  }
  bool masked(std::size_t j, std::size_t i) const { return u.masked(j, i) || v.masked(j, i); }
  double magnitude(std::size_t j, std::size_t i) const { return std::hypot(u.at(j, i), v.at(j, i)); }
};

/// Time series of one gridded variable on a shared lattice.
struct FieldSeries {
  std::vector<ScalarGrid> frames;
  Instant start_time{};
  double delta_hours = 1.0;

  std::size_t size() const noexcept { return frames.size(); }
  double span_hours() const { return frames.empty() ? 0.0 : static_cast<double>(frames.size() - 1) * delta_hours; }

  // The frame in effect at `hours` after start; the last frame is held once the series ends.
  std::size_t frame_index_at(double hours) const {
    if (frames.empty()) throw RangeError("empty field series");
    if (hours <= 0.0) return 0;
    const auto k = static_cast<std::size_t>(std::floor(hours / delta_hours + 1e-9));
    return std::min(k, frames.size() - 1);
  }

  void validate() const {
    if (frames.empty()) throw RangeError("field series has no frames");
    if (!(delta_hours > 0.0)) throw RangeError("field series time step must be positive");
    for (std::size_t k = 0; k < frames.size(); ++k) {
      frames[k].validate();
      if (!frames[k].same_lattice(frames[0])) {
        throw RangeError("frame " + std::to_string(k) + " is on a different lattice than frame 0");
      }
    }
  }
};

namespace detail {

inline ScalarGrid thin_grid(const ScalarGrid& g, std::size_t density) {
  ScalarGrid out;
  for (std::size_t i = 0; i < g.nx(); i += density) out.lons.push_back(g.lons[i]);
  for (std::size_t j = 0; j < g.ny(); j += density) out.lats.push_back(g.lats[j]);
  for (std::size_t j = 0; j < g.ny(); j += density) {
    for (std::size_t i = 0; i < g.nx(); i += density) {
      out.values.push_back(g.at(j, i));
      out.mask.push_back(g.mask[g.index(j, i)]);
    }
  }
  return out;
}

}  // namespace detail

/// Keeps lattice indices that are multiples of `density` along both axes.
inline VectorFrame thin_vectors(const VectorFrame& f, std::size_t density) {
  if (density < 1) throw RangeError("vector density must be >= 1");
  return {detail::thin_grid(f.u, density), detail::thin_grid(f.v, density)};
}

/// Masks vectors with magnitude below `min_mag` (m/s); exactly min_mag is kept.
inline VectorFrame mask_vectors(const VectorFrame& f, double min_mag) {
  if (!(min_mag >= 0.0)) throw RangeError("minimum vector magnitude must be >= 0");
  VectorFrame out = f;
  for (std::size_t j = 0; j < f.u.ny(); ++j) {
    for (std::size_t i = 0; i < f.u.nx(); ++i) {
      if (f.magnitude(j, i) < min_mag) {
        out.u.set_masked(j, i);
        out.v.set_masked(j, i);
      }
    }
  }
  return out;
}

}  // namespace gliderkit
