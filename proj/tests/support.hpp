#pragma once

// Shared fixtures for the unit tests and the acceptance runner.

#include <Eigen/Dense>

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include "gliderkit/ellipse.hpp"
#include "gliderkit/geo.hpp"
#include "gliderkit/render/plot.hpp"
#include "gliderkit/synth.hpp"

namespace testkit {

namespace fs = std::filesystem;
using namespace gliderkit;

/// Scratch directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag = "gk") {
    static std::atomic<int> counter{0};
    std::random_device rd;
    path_ = fs::temp_directory_path() /
            (tag + "_" + std::to_string(rd()) + "_" + std::to_string(counter.fetch_add(1)));
    fs::create_directories(path_);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  const fs::path& path() const { return path_; }
  fs::path operator/(const fs::path& rel) const { return path_ / rel; }

 private:
  fs::path path_;
};

inline std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

inline std::vector<std::uint8_t> slurp_bytes(const fs::path& p) {
  const std::string s = slurp(p);
  return {s.begin(), s.end()};
}

/// Byte-for-byte map of every regular file under `root`, keyed by relative path.
inline std::map<std::string, std::string> tree_contents(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) out[fs::relative(e.path(), root).generic_string()] = slurp(e.path());
  }
  return out;
}

/// Runs a shell command, returning its exit status.
inline int run_command(const std::string& cmd) {
  const int rc = std::system((cmd + " >/dev/null 2>&1").c_str());
  if (rc == -1) return -1;
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

inline std::string quoted(const fs::path& p) { return "'" + p.string() + "'"; }

// Trapezoidal operating area used across the tests (lon, lat).
inline std::vector<GeoPoint> trapezoid() {
  return {{-75.00, 36.00}, {-74.30, 36.00}, {-74.45, 36.60}, {-74.85, 36.60}};
}

/// A small scenario configuration that keeps GA tests fast.
inline SynthConfig small_config(std::uint64_t seed = 7) {
  SynthConfig c;
  c.op_area = trapezoid();
  c.rendezvous = {-74.65, 36.35};
  c.seed = seed;
  c.individuals = 16;
  c.generations = 8;
  c.runs = 6;
  c.grid_size = 24;
  c.field_frames = 3;
  c.track_hours = 10;
  c.threads = 2;
  return c;
}

/// Random anisotropic Gaussian cloud with a few far outliers, in the local km plane.
struct RandomCloud {
  std::vector<LocalPoint> points;
  std::size_t planted_outliers = 0;
};

inline RandomCloud random_cloud(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> count(5, 50);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  RandomCloud c;
  const int n = count(rng);
  const double s_major = 0.5 + 9.5 * unit(rng);
  const double s_minor = s_major * (0.05 + 0.9 * unit(rng));
  const double rot = std::numbers::pi * unit(rng);
  const double cx = 20.0 * (unit(rng) - 0.5), cy = 20.0 * (unit(rng) - 0.5);
  const int max_out = static_cast<int>(std::floor(0.1 * n));
  const int n_out = max_out > 0 ? std::uniform_int_distribution<int>(0, max_out)(rng) : 0;
  for (int k = 0; k < n; ++k) {
    double a = gauss(rng) * s_major, b = gauss(rng) * s_minor;
    if (k < n_out) {
      const double r = (6.0 + 6.0 * unit(rng)) * s_major, t = 2.0 * std::numbers::pi * unit(rng);
      a = r * std::cos(t);
      b = r * std::sin(t);
    }
    c.points.push_back({cx + a * std::cos(rot) - b * std::sin(rot), cy + a * std::sin(rot) + b * std::cos(rot)});
  }
  c.planted_outliers = static_cast<std::size_t>(n_out);
  return c;
}

// ---------------------------------------------------------------------------
// independent oracles

/// Population covariance eigen-decomposition with Eigen.
struct EigenOracle {
  double major = 0.0, minor = 0.0;  // 1-sigma radii
  double angle_deg = 0.0;           // clockwise from north, [0, 180)
  double gap = 0.0;                 // relative eigenvalue separation
};

inline EigenOracle eigen_oracle(const std::vector<LocalPoint>& pts) {
  const auto n = static_cast<double>(pts.size());
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  for (const auto& p : pts) mean += Eigen::Vector2d(p.x_km, p.y_km);
  mean /= n;
  Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
  for (const auto& p : pts) {
    const Eigen::Vector2d d = Eigen::Vector2d(p.x_km, p.y_km) - mean;
    cov += d * d.transpose();
  }
  cov /= n;
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(cov);
  const Eigen::Vector2d ev = es.eigenvalues();  // ascending
  const Eigen::Vector2d dir = es.eigenvectors().col(1);
  EigenOracle o;
  o.major = std::sqrt(std::max(0.0, ev(1)));
  o.minor = std::sqrt(std::max(0.0, ev(0)));
  double a = std::atan2(dir(0), dir(1)) * 180.0 / std::numbers::pi;
  a = std::fmod(a, 180.0);
  if (a < 0.0) a += 180.0;
  o.angle_deg = a;
  o.gap = ev(1) > 0.0 ? (ev(1) - ev(0)) / ev(1) : 0.0;
  return o;
}

/// Smallest separation of two axis angles modulo 180 degrees.
inline double axis_angle_gap(double a, double b) {
  double d = std::fmod(std::abs(a - b), 180.0);
  return std::min(d, 180.0 - d);
}

/// Quadratic form of an offset against an ellipse with the major axis at a
/// compass bearing, written out from scratch.
inline double quad_form(double major, double minor, double angle_deg, LocalPoint q) {
  const double t = angle_deg * std::numbers::pi / 180.0;
  const double along = q.x_km * std::sin(t) + q.y_km * std::cos(t);
  const double across = q.x_km * std::cos(t) - q.y_km * std::sin(t);
  auto term = [](double v, double r) {
    if (r > 0.0) return (v / r) * (v / r);
    return std::abs(v) <= 1e-12 ? 0.0 : std::numeric_limits<double>::infinity();
  };
  return term(along, major) + term(across, minor);
}

/// Pointwise fit computed by brute force: axis-aligned sigma test, furthest
/// inlier sets the major axis, then the exact smallest minor radius that
/// keeps every inlier inside.
struct PointwiseOracle {
  std::vector<std::size_t> inliers;
  double major = 0.0;
  double angle_deg = 0.0;
  double exact_minor = 0.0;  // smallest minor radius with every inlier on or inside
  double slack_minor = 0.0;  // same, allowing the fitter's 1e-9 boundary slack
};

inline PointwiseOracle pointwise_oracle(const std::vector<LocalPoint>& offsets, double scale,
                                        std::optional<std::vector<std::size_t>> subset = std::nullopt) {
  PointwiseOracle o;
  if (subset) {
    o.inliers = *subset;
  } else {
    const auto n = static_cast<double>(offsets.size());
    double sxx = 0.0, syy = 0.0;
    for (const auto& p : offsets) {
      sxx += p.x_km * p.x_km;
      syy += p.y_km * p.y_km;
    }
    const double sx = std::sqrt(sxx / n), sy = std::sqrt(syy / n);
    for (std::size_t k = 0; k < offsets.size(); ++k) {
      if (std::abs(offsets[k].x_km) <= scale * sx + 1e-12 && std::abs(offsets[k].y_km) <= scale * sy + 1e-12) {
        o.inliers.push_back(k);
      }
    }
  }
  std::size_t far = 0;
  for (std::size_t k : o.inliers) {
    const double d = std::hypot(offsets[k].x_km, offsets[k].y_km);
    if (d > o.major) {
      o.major = d;
      far = k;
    }
  }
  if (o.major == 0.0) return o;
  double a = std::atan2(offsets[far].x_km, offsets[far].y_km) * 180.0 / std::numbers::pi;
  a = std::fmod(a, 180.0);
  if (a < 0.0) a += 180.0;
  o.angle_deg = a;
  const double t = a * std::numbers::pi / 180.0;
  for (std::size_t k : o.inliers) {
    const double along = offsets[k].x_km * std::sin(t) + offsets[k].y_km * std::cos(t);
    const double across = offsets[k].x_km * std::cos(t) - offsets[k].y_km * std::sin(t);
    const double room = 1.0 - (along / o.major) * (along / o.major);
    if (std::abs(across) < 1e-12) continue;
    o.exact_minor = std::max(o.exact_minor, room > 0.0 ? std::abs(across) / std::sqrt(room) : o.major);
    o.slack_minor = std::max(o.slack_minor, std::abs(across) / std::sqrt(std::max(room + 1e-9, 1e-300)));
  }
  return o;
}

/// Probes the pixel under every masked raster node strictly inside the plot
/// frame. Counts masked probes and how many of them were not white, plus
/// unmasked probes that did paint a colour.
struct MaskProbe {
  std::size_t masked = 0, masked_not_white = 0;
  std::size_t unmasked = 0, unmasked_coloured = 0;
};

inline MaskProbe probe_mask(const render::PlotSpec& spec, const render::Canvas& c) {
  MaskProbe m;
  if (!spec.raster) return m;
  const render::Frame f(spec);
  const ScalarGrid& g = *spec.raster;
  for (std::size_t j = 0; j < g.ny(); ++j) {
    for (std::size_t i = 0; i < g.nx(); ++i) {
      const render::PointPx p = f.to_px({g.lons[i], g.lats[j]});
      const int x = static_cast<int>(std::lround(p.x)), y = static_cast<int>(std::lround(p.y));
      if (x <= f.left() || x >= f.right() || y <= f.top() || y >= f.bottom()) continue;
      const bool white = c.get(x, y) == render::colors::white;
      if (g.masked(j, i)) {
        ++m.masked;
        m.masked_not_white += !white;
      } else {
        ++m.unmasked;
        m.unmasked_coloured += !white;
      }
    }
  }
  return m;
}

/// The same plot with every overlay switched off, leaving only the raster.
inline render::PlotSpec raster_only(render::PlotSpec s) {
  s.show_gliders = s.show_vectors = s.show_oparea = false;
  s.ellipses.clear();
  s.markers.clear();
  return s;
}

/// Parameter text for a small synthetic scenario.
inline std::string small_synth_params(std::uint64_t seed = 7) {
  const SynthConfig c = small_config(seed);
  return write_params(synth_params(c, resolve_starts(c))) + "grid_size = 24\nfield_frames = 3\ntrack_hours = 10\n";
}

/// Great-circle distance on a sphere of the mean Earth radius.
inline double haversine_km(GeoPoint a, GeoPoint b) {
  constexpr double kRadius = 6371.0088;
  const double p1 = a.lat_deg * std::numbers::pi / 180.0, p2 = b.lat_deg * std::numbers::pi / 180.0;
  const double dp = p2 - p1, dl = (b.lon_deg - a.lon_deg) * std::numbers::pi / 180.0;
  const double h = std::sin(dp / 2) * std::sin(dp / 2) + std::cos(p1) * std::cos(p2) * std::sin(dl / 2) * std::sin(dl / 2);
  return 2.0 * kRadius * std::asin(std::sqrt(h));
}

}  // namespace testkit
