#pragma once

// Minimal-fit confidence ellipses around the per-hour cloud of top-run
// positions.
//
//   Method A  covariance ellipse: radii sqrt(lambda_i) * scale from the 2x2
//             population covariance of the full cloud.
//   Method B  point-fitting ellipse: drop axis-aligned outliers, take the
//             furthest inlier as the major radius/orientation, then contract
//             a circle perpendicular to the major axis in steps of c until a
//             further step would leave an inlier outside.
//   Method AB method B's major/contraction procedure run on method A's inliers.
//
// All fitting happens in a local kilometre plane centred on the cloud mean.
// Angles are reported clockwise from north, folded onto [0, 180).

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gliderkit/error.hpp"
#include "gliderkit/geo.hpp"

namespace gliderkit {

enum class EllipseMethod { A, B, AB };

inline std::string_view method_name(EllipseMethod m) {
  switch (m) {
    case EllipseMethod::A: return "A";
    case EllipseMethod::B: return "B";
    case EllipseMethod::AB: return "AB";
  }
  return "?";
}

inline EllipseMethod parse_method(std::string_view s) {
  if (s == "A") return EllipseMethod::A;
  if (s == "B") return EllipseMethod::B;
  if (s == "AB" || s == "A+B") return EllipseMethod::AB;
  throw ConfigError("unknown ellipse method '" + std::string(s) + "' (expected A, B or AB)");
}

// Slack on the containment test so a point exactly on the boundary is not
// lost to rounding in the rotation.
inline constexpr double kContainmentSlack = 1e-9;
// Offsets below this (km) count as zero.
inline constexpr double kZeroKm = 1e-12;

/// Cloud of positions as offsets from their mean in a local km plane.
struct PointCloud {
  CoordRef reference;               // origin = cloud mean
  std::vector<LocalPoint> offsets;  // (x_i - mu_x, y_i - mu_y)

  std::size_t size() const noexcept { return offsets.size(); }

  /// Centers planar points (already in km about `base`) on their mean.
  static PointCloud from_local(std::span<const LocalPoint> pts, const CoordRef& base = CoordRef{}) {
    if (pts.empty()) throw DegenerateError("point cloud needs at least one point");
    double mx = 0.0, my = 0.0;
    for (const auto& p : pts) {
      mx += p.x_km;
      my += p.y_km;
    }
    mx /= static_cast<double>(pts.size());
    my /= static_cast<double>(pts.size());
    PointCloud c{CoordRef(base.to_geo({mx, my})), {}};
    c.offsets.reserve(pts.size());
    for (const auto& p : pts) c.offsets.push_back({p.x_km - mx, p.y_km - my});
    return c;
  }
};

inline PointCloud build_cloud(std::span<const GeoPoint> pts) {
  if (pts.empty()) throw DegenerateError("point cloud needs at least one point");
  const CoordRef ref(mean_point(pts));
  std::vector<LocalPoint> local;
  local.reserve(pts.size());
  for (const auto& p : pts) local.push_back(ref.to_local(p));
  // Re-centre on the planar mean so the offsets sum to zero to rounding.
  double mx = 0.0, my = 0.0;
  for (const auto& q : local) {
    mx += q.x_km;
    my += q.y_km;
  }
  mx /= static_cast<double>(local.size());
  my /= static_cast<double>(local.size());
  PointCloud c{ref, {}};
  c.offsets.reserve(local.size());
  for (const auto& q : local) c.offsets.push_back({q.x_km - mx, q.y_km - my});
  return c;
}

struct EllipseFitConfig {
  double scale_factor = 1.5;            // STD multiplier; also the outlier threshold
  double contraction_step_km = 0.005;   // c

  void validate() const {
    if (!(scale_factor >= 0.0 && scale_factor <= 3.0)) throw ConfigError("STD scale factor must lie in [0, 3]");
    if (!(contraction_step_km > 0.0)) throw ConfigError("contraction step must be > 0");
  }
};

struct CovarianceSummary {
  double sigma_xx = 0.0;
  double sigma_yy = 0.0;
  double sigma_xy = 0.0;
  double lambda1 = 0.0;  // larger eigenvalue
  double lambda2 = 0.0;
  LocalPoint principal{1.0, 0.0};  // unit eigenvector of lambda1
};

/// Population (1/N) covariance and its closed-form eigendecomposition.
inline CovarianceSummary covariance(std::span<const LocalPoint> pts) {
  if (pts.empty()) throw DegenerateError("covariance of an empty point set");
  const auto n = static_cast<double>(pts.size());
  double mx = 0.0, my = 0.0;
  for (const auto& p : pts) {
    mx += p.x_km;
    my += p.y_km;
  }
  mx /= n;
  my /= n;
  CovarianceSummary s;
  for (const auto& p : pts) {
    const double dx = p.x_km - mx;
    const double dy = p.y_km - my;
    s.sigma_xx += dx * dx;
    s.sigma_yy += dy * dy;
    s.sigma_xy += dx * dy;
  }
  s.sigma_xx /= n;
  s.sigma_yy /= n;
  s.sigma_xy /= n;
  const double mean = 0.5 * (s.sigma_xx + s.sigma_yy);
  const double h = std::hypot(0.5 * (s.sigma_xx - s.sigma_yy), s.sigma_xy);
  s.lambda1 = mean + h;
  s.lambda2 = std::max(0.0, mean - h);
  const double phi = 0.5 * std::atan2(2.0 * s.sigma_xy, s.sigma_xx - s.sigma_yy);
  s.principal = {std::cos(phi), std::sin(phi)};
  return s;
}

struct EllipseFit {
  GeoPoint center;
  double major_radius_km = 0.0;
  double minor_radius_km = 0.0;
  double angle_deg = 0.0;  // major axis, clockwise from north, [0, 180)
  EllipseMethod method = EllipseMethod::AB;
  std::vector<std::size_t> inliers;
  std::vector<std::size_t> outliers;
  bool used_full_cloud = false;  // AB only: method A kept no points
  std::optional<CovarianceSummary> covariance;
};

struct Containment {
  bool inside = false;
  double value = 0.0;  // quadratic form; <= 1 inside
};

struct AxisFrame {
  double along = 0.0;  // coordinate along the major axis
  double across = 0.0; // coordinate along the minor axis (major rotated 90 deg counter-clockwise)
};

inline AxisFrame to_axis_frame(double angle_deg, LocalPoint offset) {
  const double a = deg2rad(angle_deg);
  const double ux = std::sin(a), uy = std::cos(a);
  return {offset.x_km * ux + offset.y_km * uy, -offset.x_km * uy + offset.y_km * ux};
}

namespace detail {

inline double axis_term(double coord, double radius) {
  if (radius > 0.0) return (coord / radius) * (coord / radius);
  return std::abs(coord) <= kZeroKm ? 0.0 : std::numeric_limits<double>::infinity();
}

inline double containment_value(double major, double minor, double angle_deg, LocalPoint offset) {
  const AxisFrame f = to_axis_frame(angle_deg, offset);
  return axis_term(f.along, major) + axis_term(f.across, minor);
}

}  // namespace detail

/// Evaluates ((X cos t + Y sin t)^2 / major^2 + (X sin t - Y cos t)^2 / minor^2)
/// for an offset from the ellipse centre.
inline Containment contains(const EllipseFit& e, LocalPoint offset) {
  const double v = detail::containment_value(e.major_radius_km, e.minor_radius_km, e.angle_deg, offset);
  return {v <= 1.0 + kContainmentSlack, v};
}

struct OutlierSplit {
  std::vector<std::size_t> inliers;
  std::vector<std::size_t> outliers;
};

/// Axis-aligned STD rule: outlier iff |X| > t*sigma_x or |Y| > t*sigma_y.
inline OutlierSplit remove_outliers(const PointCloud& cloud, double threshold) {
  if (!(threshold > 0.0)) throw RangeError("outlier threshold must be > 0");
  const CovarianceSummary s = covariance(cloud.offsets);
  const double sx = std::sqrt(s.sigma_xx), sy = std::sqrt(s.sigma_yy);
  OutlierSplit out;
  for (std::size_t k = 0; k < cloud.size(); ++k) {
    const auto& p = cloud.offsets[k];
    const bool outlier = std::abs(p.x_km) > threshold * sx + kZeroKm || std::abs(p.y_km) > threshold * sy + kZeroKm;
    (outlier ? out.outliers : out.inliers).push_back(k);
  }
  return out;
}

namespace detail {

struct Contraction {
  double major = 0.0;
  double minor = 0.0;
  double angle_deg = 0.0;
};

inline bool all_inside(std::span<const LocalPoint> pts, std::span<const std::size_t> subset, double major,
                       double minor, double angle_deg) {
  for (std::size_t k : subset) {
    if (!(containment_value(major, minor, angle_deg, pts[k]) <= 1.0 + kContainmentSlack)) return false;
  }
  return true;
}

// Major radius from the furthest point, then contract the minor radius from
// a circle in steps of c while every point of `subset` stays inside.
inline Contraction contract(std::span<const LocalPoint> pts, std::span<const std::size_t> subset, double c) {
  Contraction r;
  std::size_t far = 0;
  bool any = false;
  for (std::size_t k : subset) {
    const double d = std::hypot(pts[k].x_km, pts[k].y_km);
    if (!any || d > r.major) {
      r.major = d;
      far = k;
      any = true;
    }
  }
  if (!any || r.major <= kZeroKm) return {};
  r.angle_deg = normalize_axis_deg(bearing_deg(pts[far].x_km, pts[far].y_km));
  r.minor = r.major;
  const auto max_steps = static_cast<long>(std::ceil(r.major / c)) + 1;
  for (long k = 1; k <= max_steps; ++k) {
    const double trial = r.major - static_cast<double>(k) * c;
    if (trial <= 0.0) {
      if (all_inside(pts, subset, r.major, 0.0, r.angle_deg)) r.minor = 0.0;
      break;
    }
    if (!all_inside(pts, subset, r.major, trial, r.angle_deg)) break;
    r.minor = trial;
  }
  return r;
}

inline std::vector<std::size_t> all_indices(std::size_t n) {
  std::vector<std::size_t> v(n);
  for (std::size_t k = 0; k < n; ++k) v[k] = k;
  return v;
}

// Zero STD: nothing but the centre survives.
inline EllipseFit degenerate_fit(const PointCloud& cloud, EllipseMethod method) {
  EllipseFit f;
  f.center = cloud.reference.origin();
  f.method = method;
  for (std::size_t k = 0; k < cloud.size(); ++k) {
    const auto& p = cloud.offsets[k];
    const bool at_center = std::abs(p.x_km) <= kZeroKm && std::abs(p.y_km) <= kZeroKm;
    (at_center ? f.inliers : f.outliers).push_back(k);
  }
  return f;
}

inline void partition_by_containment(EllipseFit& f, const PointCloud& cloud) {
  f.inliers.clear();
  f.outliers.clear();
  for (std::size_t k = 0; k < cloud.size(); ++k) {
    (contains(f, cloud.offsets[k]).inside ? f.inliers : f.outliers).push_back(k);
  }
}

}  // namespace detail

/// Method A. Every point contributes to the covariance; points outside the
/// scaled ellipse are reported as outliers afterwards.
inline EllipseFit fit_covariance(const PointCloud& cloud, const EllipseFitConfig& cfg) {
  cfg.validate();
  if (cloud.size() < 2) throw DegenerateError("method A needs at least 2 points");
  if (cfg.scale_factor == 0.0) return detail::degenerate_fit(cloud, EllipseMethod::A);
  const CovarianceSummary s = covariance(cloud.offsets);
  EllipseFit f;
  f.center = cloud.reference.origin();
  f.method = EllipseMethod::A;
  f.covariance = s;
  f.major_radius_km = std::sqrt(s.lambda1) * cfg.scale_factor;
  f.minor_radius_km = std::sqrt(s.lambda2) * cfg.scale_factor;
  // A circle has no preferred axis; report 0 by convention.
  const bool circular = s.lambda1 - s.lambda2 <= 1e-12 * std::max(s.lambda1, std::numeric_limits<double>::min());
  f.angle_deg = circular ? 0.0 : normalize_axis_deg(bearing_deg(s.principal.x_km, s.principal.y_km));
  detail::partition_by_containment(f, cloud);
  return f;
}

/// Method B.
inline EllipseFit fit_pointwise(const PointCloud& cloud, const EllipseFitConfig& cfg) {
  cfg.validate();
  if (cloud.size() == 0) throw DegenerateError("method B needs at least 1 point");
  if (cfg.scale_factor == 0.0) return detail::degenerate_fit(cloud, EllipseMethod::B);
  OutlierSplit split = remove_outliers(cloud, cfg.scale_factor);
  const auto r = detail::contract(cloud.offsets, split.inliers, cfg.contraction_step_km);
  EllipseFit f;
  f.center = cloud.reference.origin();
  f.method = EllipseMethod::B;
  f.major_radius_km = r.major;
  f.minor_radius_km = r.minor;
  f.angle_deg = r.angle_deg;
  f.inliers = std::move(split.inliers);
  f.outliers = std::move(split.outliers);
  return f;
}

/// Method A+B: the point-fitting contraction over method A's inliers.
inline EllipseFit fit_combined(const PointCloud& cloud, const EllipseFitConfig& cfg) {
  cfg.validate();
  if (cloud.size() < 2) throw DegenerateError("method A+B needs at least 2 points");
  if (cfg.scale_factor == 0.0) return detail::degenerate_fit(cloud, EllipseMethod::AB);
  const EllipseFit a = fit_covariance(cloud, cfg);
  EllipseFit f;
  f.center = cloud.reference.origin();
  f.method = EllipseMethod::AB;
  f.covariance = a.covariance;
  std::vector<std::size_t> working = a.inliers;
  if (working.empty()) {
    working = detail::all_indices(cloud.size());
    f.used_full_cloud = true;
  }
  const auto r = detail::contract(cloud.offsets, working, cfg.contraction_step_km);
  f.major_radius_km = r.major;
  f.minor_radius_km = r.minor;
  f.angle_deg = r.angle_deg;
  std::vector<std::uint8_t> in(cloud.size(), 0);
  for (std::size_t k : working) in[k] = 1;
  for (std::size_t k = 0; k < cloud.size(); ++k) (in[k] ? f.inliers : f.outliers).push_back(k);
  return f;
}

inline EllipseFit fit_ellipse(const PointCloud& cloud, EllipseMethod method, const EllipseFitConfig& cfg) {
  switch (method) {
    case EllipseMethod::A: return fit_covariance(cloud, cfg);
    case EllipseMethod::B: return fit_pointwise(cloud, cfg);
    case EllipseMethod::AB: return fit_combined(cloud, cfg);
  }
  throw ConfigError("unknown ellipse method");
}

/// Quadrant in the ellipse's own frame, counter-clockwise from (+major, +minor).
/// Points on an axis go to the lower-numbered neighbour.
inline int quadrant_of(const EllipseFit& e, LocalPoint offset) {
  const AxisFrame f = to_axis_frame(e.angle_deg, offset);
  if (f.along >= 0.0 && f.across >= 0.0) return 1;
  if (f.along < 0.0 && f.across >= 0.0) return 2;
  if (f.along <= 0.0 && f.across < 0.0) return 3;
  return 4;
}

/// Boundary polygon of an ellipse centred at the origin of the local plane.
inline std::vector<LocalPoint> ellipse_outline(double major, double minor, double angle_deg, int segments = 128) {
  std::vector<LocalPoint> out;
  const double a = deg2rad(angle_deg);
  const double ux = std::sin(a), uy = std::cos(a);  // major axis
  const double vx = -uy, vy = ux;                   // minor axis
  for (int k = 0; k <= segments; ++k) {
    const double t = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(segments);
    const double p = major * std::cos(t), q = minor * std::sin(t);
    out.push_back({p * ux + q * vx, p * uy + q * vy});
  }
  return out;
}

inline std::vector<GeoPoint> ellipse_outline_geo(const EllipseFit& e, int segments = 128) {
  const CoordRef ref(e.center);
  std::vector<GeoPoint> out;
  for (const auto& q : ellipse_outline(e.major_radius_km, e.minor_radius_km, e.angle_deg, segments)) {
    out.push_back(ref.to_geo(q));
  }
  return out;
}

}  // namespace gliderkit
