#include "antijam/mission.hpp"

#include <algorithm>
#include <cmath>

#include "antijam/error.hpp"
#include "antijam/geometry.hpp"
#include "antijam/rng.hpp"

namespace antijam::mission {

namespace {

bool finite(const Position& p) {
  return std::isfinite(p.x) && std::isfinite(p.y) && std::isfinite(p.z);
}

double max_radius(const std::vector<JammerType>& catalog) {
  double r = 0.0;
  for (const auto& t : catalog) r = std::max(r, t.radius);
  return r;
}

double separation(const GeneratorConfig& cfg) {
  return cfg.min_region_separation >= 0.0 ? cfg.min_region_separation
                                          : 2.0 * max_radius(cfg.catalog) + 10.0;
}

Jammer draw_jammer(const GeneratorConfig& cfg, Rng& rng) {
  const JammerType& t = cfg.catalog[rng.index(cfg.catalog.size())];
  double x = rng.uniform(0.0, cfg.side);
  double y = rng.uniform(0.0, cfg.side);
  // uniform jitter inside a disk of radius `jitter`
  const double rho = cfg.jitter * std::sqrt(rng.uniform());
  const double phi = rng.uniform(0.0, 2.0 * 3.14159265358979323846);
  x = std::clamp(x + rho * std::cos(phi), 0.0, cfg.side);
  y = std::clamp(y + rho * std::sin(phi), 0.0, cfg.side);
  Jammer j;
  j.position = {x, y, 0.0};
  j.power = t.power;
  j.radius = t.radius;
  j.type_id = t.type_id;
  return j;
}

// Inflated disks disjoint with a 10 m gap, regions clear of every disk.
bool jammer_fits(const Jammer& j, const std::vector<Jammer>& placed, const std::vector<Region>& regions,
                 double margin) {
  for (const auto& o : placed) {
    if (channel::horizontal_distance(j.position, o.position) <
        j.radius + o.radius + 2.0 * margin + 10.0) {
      return false;
    }
  }
  for (const auto& r : regions) {
    if (channel::horizontal_distance(j.position, r.position) < j.radius + margin + 10.0) return false;
  }
  return true;
}

std::vector<Jammer> place_jammers(const GeneratorConfig& cfg, int count,
                                  const std::vector<Region>& regions, Rng& rng) {
  std::vector<Jammer> out;
  int tries = 0;
  while (static_cast<int>(out.size()) < count) {
    if (++tries > cfg.max_retries) fail(ErrorCode::Infeasible, "could not place jammers");
    Jammer j = draw_jammer(cfg, rng);
    if (jammer_fits(j, out, regions, cfg.margin)) out.push_back(j);
  }
  return out;
}

}  // namespace

void Scenario::validate() const {
  require(side > 0.0 && std::isfinite(side), "side must be > 0");
  require(altitude >= 0.0 && std::isfinite(altitude), "altitude must be >= 0");
  require(step > 0.0 && std::isfinite(step), "step must be > 0");
  require(regions.size() >= 2, "a scenario needs at least 2 regions");
  channel.validate();
  for (std::size_t i = 0; i < regions.size(); ++i) {
    const auto& r = regions[i];
    require(r.id == static_cast<int>(i), "region ids must be contiguous from 0");
    require(finite(r.position), "region coordinates must be finite");
    require(r.position.x >= 0.0 && r.position.x <= side && r.position.y >= 0.0 &&
                r.position.y <= side,
            "region outside the arena");
  }
  for (const auto& j : jammers) {
    require(finite(j.position), "jammer coordinates must be finite");
    require(j.position.x >= 0.0 && j.position.x <= side && j.position.y >= 0.0 &&
                j.position.y <= side,
            "jammer outside the arena");
    require(j.power > 0.0 && j.radius > 0.0, "jammer power and radius must be > 0");
  }
  require(finite(cbs) && cbs.z >= 0.0, "invalid CBS position");
}

void GeneratorConfig::validate() const {
  require(side > 0.0, "side must be > 0");
  require(altitude > 0.0, "altitude must be > 0");
  require(step > 0.0, "step must be > 0");
  require(n_regions >= 2, "n_regions must be >= 2");
  require(n_jammers >= 0, "n_jammers must be >= 0");
  require(jitter >= 0.0 && margin >= 0.0, "jitter and margin must be >= 0");
  require(!catalog.empty(), "jammer catalog must not be empty");
  for (const auto& t : catalog) {
    require(t.radius > 0.0 && t.power > 0.0, "catalog radius and power must be > 0");
  }
  require(max_retries > 0, "max_retries must be > 0");
  channel.validate();
}

Scenario generate_scenario(const GeneratorConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  Rng rng(seed);
  Scenario s;
  s.side = cfg.side;
  s.altitude = cfg.altitude;
  s.step = cfg.step;
  s.channel = cfg.channel;
  s.seed = seed;
  s.cbs = {cfg.side / 2.0, cfg.side / 2.0, 0.0};

  const double sep = separation(cfg);
  int tries = 0;
  while (static_cast<int>(s.regions.size()) < cfg.n_regions) {
    if (++tries > cfg.max_retries) fail(ErrorCode::Infeasible, "could not separate regions");
    Position p{rng.uniform(0.0, cfg.side), rng.uniform(0.0, cfg.side), 0.0};
    const bool ok = std::all_of(s.regions.begin(), s.regions.end(), [&](const Region& r) {
      return channel::horizontal_distance(r.position, p) >= sep;
    });
    if (ok) s.regions.push_back({static_cast<int>(s.regions.size()), p});
  }
  s.jammers = place_jammers(cfg, cfg.n_jammers, s.regions, rng);
  return s;
}

Scenario regenerate_jammers(const Scenario& base, const GeneratorConfig& cfg, int n_jammers,
                            std::uint64_t seed) {
  cfg.validate();
  require(n_jammers >= 0, "n_jammers must be >= 0");
  Rng rng(seed);
  Scenario s = base;
  s.seed = seed;
  s.jammers = place_jammers(cfg, n_jammers, s.regions, rng);
  return s;
}

double interference_at(const Position& uav, std::span<const Jammer> jammers,
                       const ChannelParams& params) {
  double sum = 0.0;
  for (const auto& j : jammers) {
    const double thr = channel::interference_threshold(j, uav.z);
    if (channel::in_jammer_range(j, uav, thr)) sum += channel::jamming_power(j, uav, params);
  }
  return sum;
}

double segment_interference(const Position& a, const Position& b, std::span<const Jammer> jammers,
                            const Scenario& scenario) {
  if (jammers.empty()) return 0.0;
  const geo::Vec2 pts[2] = {geo::xy(a), geo::xy(b)};
  double sum = 0.0;
  for (const auto& p : geo::resample(pts, scenario.step)) {
    sum += interference_at(geo::at_altitude(p, scenario.altitude), jammers, scenario.channel);
  }
  return sum;
}

double edge_cost(const Region& n, const Region& m, Hypothesis h, const Scenario& scenario,
                 double w_interference) {
  const double dx = n.position.x - m.position.x;
  const double dy = n.position.y - m.position.y;
  const double d = std::sqrt(dx * dx + dy * dy + scenario.altitude * scenario.altitude);
  if (h == Hypothesis::H0) return d;
  const Position a = scenario.uav(n.position.x, n.position.y);
  const Position b = scenario.uav(m.position.x, m.position.y);
  return d + w_interference * segment_interference(a, b, scenario.jammers, scenario);
}

CostGraph build_cost_graph(const Scenario& scenario, Hypothesis h, double w_interference) {
  CostGraph g;
  g.n = static_cast<int>(scenario.regions.size());
  g.hypothesis = h;
  g.cost.assign(static_cast<std::size_t>(g.n * g.n), 0.0);
  for (int i = 0; i < g.n; ++i) {
    for (int j = 0; j < g.n; ++j) {
      if (i == j) continue;
      g.cost[static_cast<std::size_t>(i * g.n + j)] =
          edge_cost(scenario.regions[static_cast<std::size_t>(i)],
                    scenario.regions[static_cast<std::size_t>(j)], h, scenario, w_interference);
    }
  }
  return g;
}

bool is_permutation_tour(const Tour& tour, int n) {
  if (static_cast<int>(tour.order.size()) != n) return false;
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  for (int v : tour.order) {
    if (v < 0 || v >= n || seen[static_cast<std::size_t>(v)]) return false;
    seen[static_cast<std::size_t>(v)] = 1;
  }
  return true;
}

double tour_cost(const Tour& tour, const CostGraph& graph) {
  if (!is_permutation_tour(tour, graph.n)) fail(ErrorCode::InvalidArgument, "invalid permutation");
  double z = 0.0;
  for (std::size_t i = 0; i + 1 < tour.order.size(); ++i) {
    z += graph.at(tour.order[i], tour.order[i + 1]);
  }
  if (tour.closed && tour.order.size() > 1) z += graph.at(tour.order.back(), tour.order.front());
  return z;
}

Tour rotate_to(const Tour& tour, int first) {
  auto it = std::find(tour.order.begin(), tour.order.end(), first);
  if (it == tour.order.end()) fail(ErrorCode::NotFound, "region not in tour");
  Tour out = tour;
  std::rotate(out.order.begin(), out.order.begin() + (it - tour.order.begin()), out.order.end());
  return out;
}

double trajectory_interference(std::span<const Position> trajectory, const Scenario& scenario) {
  double sum = 0.0;
  for (const auto& p : trajectory) sum += interference_at(p, scenario.jammers, scenario.channel);
  return sum;
}

double trajectory_length(std::span<const Position> trajectory) {
  double len = 0.0;
  for (std::size_t i = 1; i < trajectory.size(); ++i) {
    len += channel::distance(trajectory[i - 1], trajectory[i]);
  }
  return len;
}

Objective mission_objective(std::span<const Position> trajectory, const Tour& tour,
                            const Scenario& scenario, double lambda1, double lambda2,
                            double gamma_min) {
  Objective o;
  const CostGraph g = build_cost_graph(scenario, Hypothesis::H0, 0.0);
  o.distance_term = tour_cost(tour, g);
  o.interference_term = trajectory_interference(trajectory, scenario);
  o.value = lambda1 * o.distance_term + lambda2 * o.interference_term;
  for (const auto& p : trajectory) {
    if (channel::sinr(scenario.channel, scenario.cbs, p, scenario.jammers) < gamma_min) {
      o.sinr_constraint_held = false;
      break;
    }
  }
  return o;
}

}  // namespace antijam::mission
