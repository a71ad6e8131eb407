#include "antijam/expert.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "antijam/error.hpp"
#include "antijam/geometry.hpp"
#include "antijam/rng.hpp"

namespace antijam::expert {

Tour nearest_neighbor_tour(const CostGraph& graph, int start) {
  require(graph.n >= 1 && start >= 0 && start < graph.n, "bad start vertex");
  Tour t;
  std::vector<char> used(static_cast<std::size_t>(graph.n), 0);
  int cur = start;
  used[static_cast<std::size_t>(cur)] = 1;
  t.order.push_back(cur);
  for (int k = 1; k < graph.n; ++k) {
    int best = -1;
    double bc = std::numeric_limits<double>::infinity();
    for (int v = 0; v < graph.n; ++v) {
      if (!used[static_cast<std::size_t>(v)] && graph.at(cur, v) < bc) {
        bc = graph.at(cur, v);
        best = v;
      }
    }
    used[static_cast<std::size_t>(best)] = 1;
    t.order.push_back(best);
    cur = best;
  }
  return t;
}

Tour two_opt(const CostGraph& graph, std::uint64_t seed) {
  require(graph.n >= 2, "two_opt needs at least 2 vertices");
  if (graph.n == 2) return Tour{{0, 1}, true};
  Rng rng(seed);
  Tour t = nearest_neighbor_tour(graph, static_cast<int>(rng.index(static_cast<std::size_t>(graph.n))));
  double best = mission::tour_cost(t, graph);
  const int n = graph.n;
  bool improved = true;
  while (improved) {
    improved = false;
    for (int i = 1; i < n - 1 && !improved; ++i) {
      for (int k = i + 1; k < n && !improved; ++k) {
        Tour cand = t;
        std::reverse(cand.order.begin() + i, cand.order.begin() + k + 1);
        const double c = mission::tour_cost(cand, graph);
        if (c < best - 1e-9) {
          t = std::move(cand);
          best = c;
          improved = true;
        }
      }
    }
  }
  return t;
}

std::vector<Position> detour_around_jammers(const Position& a, const Position& b,
                                            std::span<const channel::Jammer> jammers,
                                            double margin) {
  require(margin >= 0.0, "margin must be >= 0");
  std::vector<geo::Circle> circles;
  for (const auto& j : jammers) circles.push_back({geo::xy(j.position), j.radius + margin});
  const auto pts = geo::shortest_detour(geo::xy(a), geo::xy(b), circles);
  std::vector<Position> out;
  out.reserve(pts.size());
  for (const auto& p : pts) out.push_back(geo::at_altitude(p, a.z));
  return out;
}

void ExpertConfig::validate() const {
  require(margin >= 0.0, "margin must be >= 0");
  require(speed > 0.0, "speed must be > 0");
  require(word_window >= 0.0, "word_window must be >= 0");
  require(w_interference >= 0.0, "w_interference must be >= 0");
}

std::vector<std::array<double, 2>> sinr_trace(std::span<const Position> trajectory,
                                              const Scenario& scenario,
                                              std::span<const channel::Jammer> jammers, double dt) {
  std::vector<std::array<double, 2>> out;
  out.reserve(trajectory.size());
  double prev = 0.0;
  for (std::size_t i = 0; i < trajectory.size(); ++i) {
    const double g = channel::to_db(channel::sinr(scenario.channel, scenario.cbs, trajectory[i], jammers));
    out.push_back({g, i == 0 ? 0.0 : (g - prev) / dt});
    prev = g;
  }
  return out;
}

Demonstration generate_demonstration(const Scenario& scenario, Hypothesis h,
                                     const ExpertConfig& cfg) {
  scenario.validate();
  cfg.validate();
  const CostGraph g0 = mission::build_cost_graph(scenario, Hypothesis::H0, 0.0);
  const Tour tour = mission::rotate_to(two_opt(g0, cfg.tour_seed), 0);
  const int n = static_cast<int>(tour.order.size());

  Demonstration d;
  d.hypothesis = h;
  d.order = tour.order;
  d.scenario_seed = scenario.seed;
  d.dt = cfg.dt(scenario.step);

  std::vector<geo::Vec2> samples;
  for (int i = 0; i < n; ++i) {
    const auto& from = scenario.regions[static_cast<std::size_t>(tour.order[static_cast<std::size_t>(i)])];
    const auto& to = scenario.regions[static_cast<std::size_t>(tour.order[static_cast<std::size_t>((i + 1) % n)])];
    d.edge_costs.push_back(mission::edge_cost(from, to, h, scenario, cfg.w_interference));

    const Position a = scenario.uav(from.position.x, from.position.y);
    const Position b = scenario.uav(to.position.x, to.position.y);
    std::vector<geo::Vec2> leg;
    if (h == Hypothesis::H1) {
      for (const auto& p : detour_around_jammers(a, b, scenario.jammers, cfg.margin)) {
        leg.push_back(geo::xy(p));
      }
    } else {
      leg = {geo::xy(a), geo::xy(b)};
    }
    const auto pts = geo::resample(leg, scenario.step);
    const std::size_t base = samples.empty() ? 0 : samples.size() - 1;
    d.leg_starts.push_back(base);
    samples.insert(samples.end(), pts.begin() + (samples.empty() ? 0 : 1), pts.end());

    if (h != Hypothesis::H1) continue;
    const geo::Vec2 dir = geo::xy(b) - geo::xy(a);
    const double heading = std::atan2(dir.y(), dir.x());
    for (std::size_t j = 0; j < scenario.jammers.size(); ++j) {
      const auto& jm = scenario.jammers[j];
      const geo::Vec2 c = geo::xy(jm.position);
      if (geo::point_segment_distance(c, geo::xy(a), geo::xy(b)) >= jm.radius + cfg.margin) continue;
      // contiguous window of leg samples around the closest approach
      std::size_t closest = 0;
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < pts.size(); ++k) {
        const double dist = (pts[k] - c).norm();
        if (dist < best) {
          best = dist;
          closest = k;
        }
      }
      const double reach = jm.radius + cfg.margin + cfg.word_window;
      std::size_t lo = closest, hi = closest;
      while (lo > 0 && (pts[lo - 1] - c).norm() <= reach) --lo;
      while (hi + 1 < pts.size() && (pts[hi + 1] - c).norm() <= reach) ++hi;
      DetourRecord r;
      r.leg = i;
      r.jammer = static_cast<int>(j);
      r.type_id = jm.type_id;
      r.radius = jm.radius;
      r.power = jm.power;
      r.jammer_x = c.x();
      r.jammer_y = c.y();
      r.start = base + lo;
      r.end = base + hi;
      r.heading = heading;
      d.detours.push_back(r);
    }
  }
  d.trajectory.reserve(samples.size());
  for (const auto& p : samples) d.trajectory.push_back(geo::at_altitude(p, scenario.altitude));
  for (std::size_t k = 1; k < samples.size(); ++k) {
    const geo::Vec2 v = (samples[k] - samples[k - 1]) / d.dt;
    d.velocity_letters.push_back({v.x(), v.y(), 0.0});
  }
  const std::span<const channel::Jammer> jam =
      h == Hypothesis::H1 ? std::span<const channel::Jammer>(scenario.jammers)
                          : std::span<const channel::Jammer>();
  d.sinr_trace = sinr_trace(d.trajectory, scenario, jam, d.dt);
  return d;
}

}  // namespace antijam::expert
