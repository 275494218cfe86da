#pragma once

// Seeded scenario generator. Builds a synthetic morphology, drifting-eddy
// currents and a temperature series over the operational area, then runs a
// small survival-of-the-fittest GA over multi-glider waypoint paths.
//
// This is a pipeline driver for the evaluation tools, not a reproduction of
// any particular planner's encoding or operators.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <exception>
#include <numbers>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "gliderkit/error.hpp"
#include "gliderkit/field.hpp"
#include "gliderkit/geo.hpp"
#include "gliderkit/params.hpp"
#include "gliderkit/runeval.hpp"
#include "gliderkit/scenario_io.hpp"
#include "gliderkit/timeutil.hpp"
#include "gliderkit/tracker.hpp"

namespace gliderkit {

struct SynthConfig {
  std::size_t individuals = 40;
  std::size_t generations = 30;
  std::size_t runs = 20;
  std::vector<std::string> platforms{"Alfa", "Bravo", "Charlie"};
  int mission_hours = 48;
  int waypoint_interval_hours = 12;
  double speed_mps = 0.25;
  std::vector<GeoPoint> op_area;
  double min_separation_km = 5.0;
  double current_max_mps = 0.5;
  GeoPoint rendezvous;
  std::uint64_t seed = 1;

  std::vector<GeoPoint> starts;  // one per platform; empty = spread around the op-area centre
  Instant instruction_time = Instant{std::chrono::seconds{1577836800}};  // 2020-01-01T00:00:00Z
  double cycle_hours = 24.0;
  double delta_hours = 3.0;
  std::size_t field_frames = 4;
  std::size_t grid_size = 40;
  int track_hours = 20;

  double selection_fraction = 0.25;
  double mutation_sigma_km = 2.0;
  double immigrant_fraction = 0.10;
  std::vector<double> ccf_weights;  // empty = seeded weights

  std::size_t threads = 0;  // 0 = hardware concurrency

  void validate() const {
    if (individuals < 2) throw ConfigError("individuals must be >= 2");
    if (generations < 1) throw ConfigError("generations must be >= 1");
    if (runs < 1) throw ConfigError("runs must be >= 1");
    if (platforms.empty()) throw ConfigError("at least one platform is required");
    if (waypoint_interval_hours <= 0 || mission_hours <= 0 || mission_hours % waypoint_interval_hours != 0) {
      throw ConfigError("waypoint_interval_hours must divide mission_hours");
    }
    if (!(speed_mps > 0.0)) throw ConfigError("speed_mps must be > 0");
    if (op_area.size() < 3) throw ConfigError("op_area needs at least 3 vertices");
    if (!(delta_hours > 0.0)) throw ConfigError("delta_hours must be > 0");
    if (field_frames < 1) throw ConfigError("field_frames must be >= 1");
    if (grid_size < 4) throw ConfigError("grid_size must be >= 4");
    if (!(selection_fraction > 0.0 && selection_fraction <= 1.0)) throw ConfigError("selection_fraction must be in (0, 1]");
    if (!(immigrant_fraction >= 0.0 && immigrant_fraction < 1.0)) throw ConfigError("immigrant_fraction must be in [0, 1)");
    if (!(mutation_sigma_km >= 0.0)) throw ConfigError("mutation_sigma_km must be >= 0");
    if (!starts.empty() && starts.size() != platforms.size()) {
      throw ConfigError("cords_init must give one start position per platform");
    }
    if (!ccf_weights.empty() && (ccf_weights.size() < 3 || ccf_weights.size() > 5)) {
      throw ConfigError("ccf_weights must list 3 to 5 weights (2-4 variability terms plus rendezvous)");
    }
  }

  std::vector<int> hour_grid() const {
    std::vector<int> h;
    for (int t = 0; t <= mission_hours; t += waypoint_interval_hours) h.push_back(t);
    return h;
  }

  Instant next_instruction_time() const { return add_hours(instruction_time, cycle_hours); }
};

inline SynthConfig synth_config_from_params(const Params& p) {
  SynthConfig c;
  c.speed_mps = p.number("speed_mps");
  c.op_area = p.points("op_area");
  c.runs = static_cast<std::size_t>(std::max<long long>(0, p.integer("runs")));
  c.individuals = static_cast<std::size_t>(std::max<long long>(0, p.integer("individuals")));
  c.generations = static_cast<std::size_t>(std::max<long long>(0, p.integer("generations")));
  c.delta_hours = p.number("delta_hours");
  c.mission_hours = static_cast<int>(p.integer("mission_hours"));
  c.min_separation_km = p.number("min_separation_km");
  c.current_max_mps = p.number("current_max_mps");
  c.rendezvous = p.point("rendezvous");
  c.seed = static_cast<std::uint64_t>(p.integer("seed"));
  if (p.has("waypoint_interval_hours")) c.waypoint_interval_hours = static_cast<int>(p.integer("waypoint_interval_hours"));
  if (p.has("Glider_names")) c.platforms = p.names("Glider_names");
  if (p.has("cords_init")) c.starts = p.points("cords_init");
  if (p.has("instruction_time")) c.instruction_time = p.time("instruction_time");
  if (p.has("cycle_hours")) c.cycle_hours = p.number("cycle_hours");
  if (p.has("field_frames")) c.field_frames = static_cast<std::size_t>(std::max<long long>(0, p.integer("field_frames")));
  if (p.has("grid_size")) c.grid_size = static_cast<std::size_t>(std::max<long long>(0, p.integer("grid_size")));
  if (p.has("track_hours")) c.track_hours = static_cast<int>(p.integer("track_hours"));
  if (p.has("selection_fraction")) c.selection_fraction = p.number("selection_fraction");
  if (p.has("mutation_sigma_km")) c.mutation_sigma_km = p.number("mutation_sigma_km");
  if (p.has("immigrant_fraction")) c.immigrant_fraction = p.number("immigrant_fraction");
  if (p.has("ccf_weights")) c.ccf_weights = p.numbers("ccf_weights");
  c.validate();
  return c;
}

/// The parameter file written next to the scenario (what the tools read back).
inline Params synth_params(const SynthConfig& c, const std::vector<GeoPoint>& starts) {
  Params p;
  auto pts = [](std::span<const GeoPoint> v) {
    std::string s = "[";
    for (std::size_t k = 0; k < v.size(); ++k) {
      s += (k ? ", (" : "(") + detail::fmt("%.8f", v[k].lon_deg) + ", " + detail::fmt("%.8f", v[k].lat_deg) + ")";
    }
    return s + "]";
  };
  std::string names = "[";
  for (std::size_t k = 0; k < c.platforms.size(); ++k) names += (k ? ", '" : "'") + c.platforms[k] + "'";
  names += "]";
  p.set("Glider_names", names);
  p.set("speed_mps", detail::fmt("%.17g", c.speed_mps));
  p.set("op_area", pts(c.op_area));
  p.set("cords_init", pts(starts));
  p.set("rendezvous", pts(std::span<const GeoPoint>(&c.rendezvous, 1)));
  p.set("runs", std::to_string(c.runs));
  p.set("individuals", std::to_string(c.individuals));
  p.set("generations", std::to_string(c.generations));
  p.set("delta_hours", detail::fmt("%.17g", c.delta_hours));
  p.set("mission_hours", std::to_string(c.mission_hours));
  p.set("waypoint_interval_hours", std::to_string(c.waypoint_interval_hours));
  p.set("min_separation_km", detail::fmt("%.17g", c.min_separation_km));
  p.set("current_max_mps", detail::fmt("%.17g", c.current_max_mps));
  p.set("seed", std::to_string(c.seed));
  p.set("instruction_time", format_iso8601(c.instruction_time));
  p.set("next_instruction_time", format_iso8601(c.next_instruction_time()));
  p.set("cycle_hours", detail::fmt("%.17g", c.cycle_hours));
  return p;
}

namespace detail {

// Independent, reproducible streams for the separate generator stages.
inline std::mt19937_64 stage_rng(std::uint64_t seed, std::uint64_t stage) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stage)};
  return std::mt19937_64(seq);
}

inline BoundingBox area_bounds(std::span<const GeoPoint> poly) {
  BoundingBox b{poly[0].lon_deg, poly[0].lon_deg, poly[0].lat_deg, poly[0].lat_deg};
  for (const auto& p : poly) {
    b.lon_min = std::min(b.lon_min, p.lon_deg);
    b.lon_max = std::max(b.lon_max, p.lon_deg);
    b.lat_min = std::min(b.lat_min, p.lat_deg);
    b.lat_max = std::max(b.lat_max, p.lat_deg);
  }
  return b;
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

}  // namespace detail

/// Empty lattice covering the op area plus a 25% apron on every side.
inline ScalarGrid scenario_lattice(const SynthConfig& c) {
  const BoundingBox b = detail::area_bounds(c.op_area);
  const double wx = b.lon_max - b.lon_min, wy = b.lat_max - b.lat_min;
  ScalarGrid g;
  for (std::size_t k = 0; k < c.grid_size; ++k) {
    const double t = static_cast<double>(k) / static_cast<double>(c.grid_size - 1);
    g.lons.push_back(b.lon_min - 0.25 * wx + t * 1.5 * wx);
    g.lats.push_back(b.lat_min - 0.25 * wy + t * 1.5 * wy);
  }
  g.values.assign(c.grid_size * c.grid_size, 0.0);
  g.mask.assign(c.grid_size * c.grid_size, 0);
  return g;
}

/// 2-4 bump-field variability terms plus a rendezvous-proximity term, linearly combined.
inline Morphology generate_morphology(const SynthConfig& c) {
  c.validate();
  auto rng = detail::stage_rng(c.seed, 1);
  const ScalarGrid base = scenario_lattice(c);
  const CoordRef ref(mean_point(c.op_area));
  const double span_km =
      dist_km(GeoPoint{base.lons.front(), base.lats.front()}, GeoPoint{base.lons.back(), base.lats.back()}, ref);

  const std::size_t bump_terms =
      c.ccf_weights.empty() ? 2 + static_cast<std::size_t>(rng() % 3) : c.ccf_weights.size() - 1;
  Morphology m;
  for (std::size_t t = 0; t < bump_terms; ++t) {
    ScalarGrid g = base;
    const int bumps = 1 + static_cast<int>(rng() % 3);
    std::vector<std::array<double, 4>> spec;  // lon, lat, sigma_km, amplitude
    for (int b = 0; b < bumps; ++b) {
      spec.push_back({detail::uniform(rng, base.lons.front(), base.lons.back()),
                      detail::uniform(rng, base.lats.front(), base.lats.back()),
                      detail::uniform(rng, 0.08, 0.25) * span_km, detail::uniform(rng, 0.5, 1.0)});
    }
    for (std::size_t j = 0; j < g.ny(); ++j) {
      for (std::size_t i = 0; i < g.nx(); ++i) {
        const GeoPoint p{g.lons[i], g.lats[j]};
        double v = 0.0;
        for (const auto& s : spec) {
          const double d = dist_km(p, GeoPoint{s[0], s[1]}, ref);
          v += s[3] * std::exp(-0.5 * d * d / (s[2] * s[2]));
        }
        g.at(j, i) = v;
      }
    }
    m.ccfs.push_back(std::move(g));
  }
  {
    ScalarGrid g = base;
    const double s = 0.3 * span_km;
    for (std::size_t j = 0; j < g.ny(); ++j) {
      for (std::size_t i = 0; i < g.nx(); ++i) {
        const double d = dist_km(GeoPoint{g.lons[i], g.lats[j]}, c.rendezvous, ref);
        g.at(j, i) = std::exp(-0.5 * d * d / (s * s));
      }
    }
    m.ccfs.push_back(std::move(g));
  }
  if (c.ccf_weights.empty()) {
    for (std::size_t t = 0; t < m.ccfs.size(); ++t) m.weights.push_back(detail::uniform(rng, 0.5, 1.5));
  } else {
    m.weights = c.ccf_weights;
  }
  m.combined = base;
  for (std::size_t k = 0; k < base.size(); ++k) {
    double v = 0.0;
    for (std::size_t t = 0; t < m.ccfs.size(); ++t) v += m.weights[t] * m.ccfs[t].values[k];
    m.combined.values[k] = v;
  }
  return m;
}

struct SynthFields {
  FieldSeries u, v, temperature;
};

inline constexpr double kPeakCurrentMps = 0.6;

/// Two drifting eddies; the peak speed is 0.6 m/s so a 0.5 m/s current limit binds somewhere.
inline SynthFields generate_fields(const SynthConfig& c) {
  c.validate();
  auto rng = detail::stage_rng(c.seed, 2);
  const ScalarGrid base = scenario_lattice(c);
  const CoordRef ref(mean_point(c.op_area));
  const double span_km =
      dist_km(GeoPoint{base.lons.front(), base.lats.front()}, GeoPoint{base.lons.back(), base.lats.back()}, ref);

  struct Eddy {
    LocalPoint centre, drift_kmh;
    double radius_km, peak_mps, sign;
  };
  std::vector<Eddy> eddies;
  for (int e = 0; e < 2; ++e) {
    const GeoPoint c0{detail::uniform(rng, base.lons.front(), base.lons.back()),
                      detail::uniform(rng, base.lats.front(), base.lats.back())};
    eddies.push_back({ref.to_local(c0),
                      {detail::uniform(rng, -1.0, 1.0), detail::uniform(rng, -1.0, 1.0)},
                      detail::uniform(rng, 0.12, 0.25) * span_km,
                      detail::uniform(rng, 0.35, 0.65),
                      e == 0 ? 1.0 : -1.0});
  }
  const double t_grad = detail::uniform(rng, 0.5, 2.0);  // degC per degree of latitude

  SynthFields f;
  for (auto* s : {&f.u, &f.v, &f.temperature}) {
    s->start_time = c.instruction_time;
    s->delta_hours = c.delta_hours;
  }
  for (std::size_t k = 0; k < c.field_frames; ++k) {
    const double hours = static_cast<double>(k) * c.delta_hours;
    ScalarGrid u = base, v = base, temp = base;
    for (std::size_t j = 0; j < base.ny(); ++j) {
      for (std::size_t i = 0; i < base.nx(); ++i) {
        const LocalPoint p = ref.to_local(GeoPoint{base.lons[i], base.lats[j]});
        double uu = 0.0, vv = 0.0, warm = 0.0;
        for (const auto& e : eddies) {
          const double dx = p.x_km - (e.centre.x_km + e.drift_kmh.x_km * hours);
          const double dy = p.y_km - (e.centre.y_km + e.drift_kmh.y_km * hours);
          const double r = std::hypot(dx, dy) / e.radius_km;
          // Gaussian vortex: speed peaks at r = 1.
          const double speed = e.peak_mps * r * std::exp(0.5 * (1.0 - r * r));
          const double rr = std::hypot(dx, dy);
          if (rr > 0.0) {
            uu += e.sign * speed * (-dy / rr);
            vv += e.sign * speed * (dx / rr);
          }
          warm += e.sign * std::exp(-0.5 * r * r);
        }
        u.at(j, i) = uu;
        v.at(j, i) = vv;
        temp.at(j, i) = 20.0 - t_grad * (base.lats[j] - base.lats.front()) + 1.5 * warm;
      }
    }
    f.u.frames.push_back(std::move(u));
    f.v.frames.push_back(std::move(v));
    f.temperature.frames.push_back(std::move(temp));
  }
  // Overlapping eddies can add up; rescale so the fastest node of the whole
  // series runs at kPeakCurrentMps.
  double peak = 0.0;
  for (std::size_t k = 0; k < f.u.size(); ++k) {
    for (std::size_t n = 0; n < f.u.frames[k].size(); ++n) {
      peak = std::max(peak, std::hypot(f.u.frames[k].values[n], f.v.frames[k].values[n]));
    }
  }
  if (peak > 0.0) {
    for (auto* s : {&f.u, &f.v}) {
      for (auto& g : s->frames) {
        for (auto& x : g.values) x *= kPeakCurrentMps / peak;
      }
    }
  }
  return f;
}

// ---------------------------------------------------------------------------
// fitness

inline constexpr double kOutOfAreaPenalty = 100.0;
inline constexpr double kCurrentPenalty = 10.0;
inline constexpr double kSeparationPenalty = 10.0;
inline constexpr double kSpeedPenalty = 10.0;
inline constexpr double kShallowPenalty = 10.0;

struct FitnessContext {
  const ScalarGrid* combined = nullptr;
  const FieldSeries* u = nullptr;  // optional currents
  const FieldSeries* v = nullptr;
  const ScalarGrid* shallow = nullptr;  // optional, values in [0,1] = how shallow
  const OpArea* area = nullptr;         // optional
  double speed_mps = 0.25;
  double current_max_mps = 0.5;
  double min_separation_km = 5.0;
};

/// Sum of sampled morphology over every waypoint minus constraint penalties.
inline double path_fitness(std::span<const PlannedPath> paths, const FitnessContext& ctx) {
  if (!ctx.combined) throw ConfigError("fitness needs a morphology grid");
  double score = 0.0;
  for (const auto& path : paths) {
    for (std::size_t k = 0; k < path.waypoints.size(); ++k) {
      const Waypoint& w = path.waypoints[k];
      const auto value = try_sample_bilinear(*ctx.combined, w.position);
      const bool inside_area = !ctx.area || ctx.area->contains(w.position);
      if (!value || !inside_area) {
        score -= kOutOfAreaPenalty;
      } else {
        score += *value;
      }
      if (ctx.u && ctx.v) {
        const std::size_t f = ctx.u->frame_index_at(w.hour);
        const auto uu = try_sample_bilinear(ctx.u->frames[f], w.position);
        const auto vv = try_sample_bilinear(ctx.v->frames[f], w.position);
        if (uu && vv && std::hypot(*uu, *vv) > ctx.current_max_mps) score -= kCurrentPenalty;
      }
      if (ctx.shallow) {
        if (const auto s = try_sample_bilinear(*ctx.shallow, w.position)) score -= kShallowPenalty * std::max(0.0, *s);
      }
      if (k > 0) {
        const Waypoint& prev = path.waypoints[k - 1];
        const double hours = static_cast<double>(w.hour - prev.hour);
        const double km = dist_km(prev.position, w.position, CoordRef(prev.position));
        if (hours > 0.0 && km / hours > ctx.speed_mps * 3.6 * (1.0 + 1e-9)) score -= kSpeedPenalty;
      }
    }
  }
  for (std::size_t a = 0; a < paths.size(); ++a) {
    for (std::size_t b = a + 1; b < paths.size(); ++b) {
      for (const auto& w : paths[a].waypoints) {
        const Waypoint* o = paths[b].at_hour(w.hour);
        if (o && dist_km(w.position, o->position, CoordRef(w.position)) < ctx.min_separation_km) {
          score -= kSeparationPenalty;
        }
      }
    }
  }
  return score;
}

/// Bearing of each waypoint toward the next one (the last repeats its inbound leg).
inline void assign_bearings(PlannedPath& p) {
  const std::size_t n = p.waypoints.size();
  for (std::size_t k = 0; k < n; ++k) {
    if (n < 2) {
      p.waypoints[k].bearing_deg = 0.0;
      continue;
    }
    const std::size_t a = k + 1 < n ? k : k - 1;
    const CoordRef ref(p.waypoints[a].position);
    const LocalPoint d = ref.to_local(p.waypoints[a + 1].position);
    p.waypoints[k].bearing_deg = (d.x_km == 0.0 && d.y_km == 0.0) ? 0.0 : bearing_deg(d.x_km, d.y_km);
  }
}

/// Start positions: configured, or a ring around the op-area centre.
inline std::vector<GeoPoint> resolve_starts(const SynthConfig& c) {
  const OpArea area(c.op_area);
  std::vector<GeoPoint> starts = c.starts;
  if (starts.empty()) {
    const GeoPoint centre = mean_point(c.op_area);
    const CoordRef ref(centre);
    const double n = static_cast<double>(c.platforms.size());
    // Chord between neighbours on the ring is at least the separation distance.
    const double radius = n > 1 ? std::max(5.0, 1.5 * c.min_separation_km / (2.0 * std::sin(std::numbers::pi / n))) : 0.0;
    for (std::size_t k = 0; k < c.platforms.size(); ++k) {
      const double a = 2.0 * std::numbers::pi * static_cast<double>(k) / n;
      starts.push_back(ref.to_geo({radius * std::sin(a), radius * std::cos(a)}));
    }
  }
  for (std::size_t k = 0; k < starts.size(); ++k) {
    if (!area.contains(starts[k])) {
      throw ConfigError("start position of '" + c.platforms[k] + "' lies outside the operational area");
    }
  }
  return starts;
}

using Individual = std::vector<PlannedPath>;  // one path per platform

struct GaRunResult {
  Run run;
  std::vector<double> best_per_generation;  // index 0 = initial population
};

struct GaResult {
  RunSet runs;
  std::vector<std::vector<double>> histories;
};

namespace detail {

class GaRunner {
 public:
  GaRunner(const SynthConfig& c, const FitnessContext& ctx, std::vector<GeoPoint> starts)
      : c_(c), ctx_(ctx), starts_(std::move(starts)), area_(c.op_area), hours_(c.hour_grid()) {}

  GaRunResult run(std::size_t run_index) const {
    std::mt19937_64 rng(c_.seed ^ static_cast<std::uint64_t>(run_index));
    std::vector<Individual> pop;
    for (std::size_t k = 0; k < c_.individuals; ++k) pop.push_back(random_individual(rng));
    std::vector<double> fit = evaluate(pop);

    const std::size_t n = c_.individuals;
    const std::size_t elites =
        std::clamp<std::size_t>(static_cast<std::size_t>(std::ceil(c_.selection_fraction * static_cast<double>(n))), 1, n);
    const std::size_t immigrants =
        std::min(n - elites, static_cast<std::size_t>(std::llround(c_.immigrant_fraction * static_cast<double>(n))));

    GaRunResult out;
    rank(pop, fit);
    out.best_per_generation.push_back(fit.front());
    for (std::size_t g = 0; g < c_.generations; ++g) {
      std::vector<Individual> next(pop.begin(), pop.begin() + static_cast<long>(elites));
      for (std::size_t k = 0; k < immigrants; ++k) next.push_back(random_individual(rng));
      while (next.size() < n) {
        const std::size_t parent = static_cast<std::size_t>(rng() % elites);
        next.push_back(mutate(pop[parent], rng));
      }
      // Elites keep their fitness; only newcomers are evaluated.
      std::vector<double> next_fit(fit.begin(), fit.begin() + static_cast<long>(elites));
      const auto fresh = evaluate(std::span<const Individual>(next).subspan(elites));
      next_fit.insert(next_fit.end(), fresh.begin(), fresh.end());
      pop = std::move(next);
      fit = std::move(next_fit);
      rank(pop, fit);
      out.best_per_generation.push_back(fit.front());
    }
    out.run.paths = pop.front();
    out.run.score = fit.front();
    for (auto& p : out.run.paths) p.score = out.run.score;
    return out;
  }

 private:
  std::vector<double> evaluate(std::span<const Individual> pop) const {
    std::vector<double> f;
    f.reserve(pop.size());
    for (const auto& ind : pop) f.push_back(path_fitness(ind, ctx_));
    return f;
  }

  // Stable descending sort; equal scores keep their order so elites stay put.
  static void rank(std::vector<Individual>& pop, std::vector<double>& fit) {
    std::vector<std::size_t> idx(pop.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return fit[a] > fit[b]; });
    std::vector<Individual> p2;
    std::vector<double> f2;
    for (std::size_t k : idx) {
      p2.push_back(std::move(pop[k]));
      f2.push_back(fit[k]);
    }
    pop = std::move(p2);
    fit = std::move(f2);
  }

  Individual random_individual(std::mt19937_64& rng) const {
    Individual ind;
    const double leg_km = c_.speed_mps * 3.6 * static_cast<double>(c_.waypoint_interval_hours);
    for (std::size_t p = 0; p < c_.platforms.size(); ++p) {
      PlannedPath path{c_.platforms[p], {}, 0.0};
      GeoPoint at = starts_[p];
      path.waypoints.push_back({hours_.front(), at, 0.0});
      for (std::size_t k = 1; k < hours_.size(); ++k) {
        const CoordRef ref(at);
        GeoPoint next = at;  // staying put is always feasible
        for (int attempt = 0; attempt < 50; ++attempt) {
          const double heading = uniform(rng, 0.0, 2.0 * std::numbers::pi);
          const double d = leg_km * std::sqrt(uniform(rng, 0.0, 1.0));
          const GeoPoint cand = ref.to_geo({d * std::sin(heading), d * std::cos(heading)});
          if (area_.contains(cand)) {
            next = cand;
            break;
          }
        }
        path.waypoints.push_back({hours_[k], next, 0.0});
        at = next;
      }
      assign_bearings(path);
      ind.push_back(std::move(path));
    }
    return ind;
  }

  Individual mutate(const Individual& parent, std::mt19937_64& rng) const {
    Individual child = parent;
    std::normal_distribution<double> jitter(0.0, c_.mutation_sigma_km);
    for (auto& path : child) {
      for (std::size_t k = 1; k < path.waypoints.size(); ++k) {
        const CoordRef ref(path.waypoints[k].position);
        const double dx = jitter(rng), dy = jitter(rng);
        path.waypoints[k].position = ref.to_geo({dx, dy});
      }
      assign_bearings(path);
    }
    return child;
  }

  const SynthConfig& c_;
  const FitnessContext& ctx_;
  std::vector<GeoPoint> starts_;
  OpArea area_;
  std::vector<int> hours_;
};

}  // namespace detail

/// All GA runs; run r draws from its own stream seeded with seed ^ r, so the
/// thread count never changes the result.
inline GaResult run_ga(const SynthConfig& c, const FitnessContext& ctx) {
  c.validate();
  const auto starts = resolve_starts(c);
  const OpArea area(c.op_area);
  FitnessContext local = ctx;
  if (!local.area) local.area = &area;
  const detail::GaRunner runner(c, local, starts);

  std::vector<GaRunResult> results(c.runs);
  std::size_t workers = c.threads ? c.threads : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, c.runs);
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t r = w; r < c.runs; r += workers) results[r] = runner.run(r);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  GaResult out;
  for (auto& r : results) {
    out.runs.runs.push_back(std::move(r.run));
    out.histories.push_back(std::move(r.best_per_generation));
  }
  out.runs.best_index = RunSet::argmax(out.runs.scores());
  return out;
}

/// Simulated surfacing log: hourly fixes following the best path a little
/// slower than planned, with seeded position noise.
inline GliderTrack simulate_track(const SynthConfig& c, const PlannedPath& path, std::uint64_t stream) {
  auto rng = detail::stage_rng(c.seed, 100 + stream);
  std::normal_distribution<double> noise(0.0, 0.2);
  GliderTrack t{path.platform, {}};
  const Fix start{c.instruction_time, path.waypoints.front().position};
  std::vector<Waypoint> ahead(path.waypoints.begin() + 1, path.waypoints.end());
  TrackerConfig tc;
  tc.speed_mps = 0.85 * c.speed_mps;
  for (int h = 0; h <= c.track_hours; ++h) {
    tc.next_instruction_time = add_hours(c.instruction_time, h);
    const GeoPoint on_path = predict_position(start, ahead, tc).position;
    const CoordRef ref(on_path);
    const GeoPoint fix = h == 0 ? on_path : ref.to_geo({noise(rng), noise(rng)});
    t.fixes.push_back({add_hours(c.instruction_time, h), fix});
  }
  return t;
}

struct Scenario {
  SynthConfig config;
  std::vector<GeoPoint> starts;
  Morphology morphology;
  SynthFields fields;
  GaResult ga;
  std::vector<GliderTrack> tracks;
};

inline Scenario generate_scenario(const SynthConfig& c) {
  Scenario s;
  s.config = c;
  s.starts = resolve_starts(c);
  s.morphology = generate_morphology(c);
  s.fields = generate_fields(c);
  FitnessContext ctx;
  ctx.combined = &s.morphology.combined;
  ctx.u = &s.fields.u;
  ctx.v = &s.fields.v;
  ctx.speed_mps = c.speed_mps;
  ctx.current_max_mps = c.current_max_mps;
  ctx.min_separation_km = c.min_separation_km;
  s.ga = run_ga(c, ctx);
  const Run& best = s.ga.runs.best();
  for (std::size_t p = 0; p < best.paths.size(); ++p) s.tracks.push_back(simulate_track(c, best.paths[p], p));
  return s;
}

inline constexpr std::string_view kInputParamsName = "input.prm";
inline constexpr std::string_view kMorphologyName = "morphology.txt";
inline constexpr std::string_view kFieldsDir = "fields";
inline constexpr std::string_view kGlidersDir = "gliders";

/// Writes the scenario tree: input.prm, morphology.txt, GA_Run<k>.csv,
/// best_run.csv, scores.log, fields/ and gliders/.
inline void write_scenario(const fs::path& dir, const Scenario& s) {
  fs::create_directories(dir);
  write_file_atomic(dir / kInputParamsName, write_params(synth_params(s.config, s.starts)));
  write_file_atomic(dir / kMorphologyName, write_morphology(s.morphology));
  write_runs_dir(dir, s.ga.runs);
  write_field_series(dir / kFieldsDir, "u", s.fields.u);
  write_field_series(dir / kFieldsDir, "v", s.fields.v);
  write_field_series(dir / kFieldsDir, "temp", s.fields.temperature);
  for (const auto& t : s.tracks) write_file_atomic(dir / kGlidersDir / (t.platform + ".log"), write_glider_log(t));
}

}  // namespace gliderkit
