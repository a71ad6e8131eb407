#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "antijam/channel.hpp"

namespace antijam::mission {

using channel::ChannelParams;
using channel::Jammer;
using channel::Position;

struct Region {
  int id = 0;
  Position position;  // ground, z = 0
};

struct JammerType {
  int type_id = 1;
  double radius = 50.0;
  double power = 1.0;
};

struct Scenario {
  double side = 1000.0;
  double altitude = 200.0;
  double step = 1.0;
  std::vector<Region> regions;
  std::vector<Jammer> jammers;
  Position cbs;
  ChannelParams channel = ChannelParams::defaults();
  std::uint64_t seed = 0;

  void validate() const;
  Position uav(double x, double y) const { return {x, y, altitude}; }
};

struct GeneratorConfig {
  double side = 1000.0;
  double altitude = 200.0;
  double step = 1.0;
  int n_regions = 6;
  int n_jammers = 1;
  double jitter = 30.0;
  double margin = 5.0;  // detour inflation; also spacing slack for generation
  double min_region_separation = -1.0;  // < 0: 2 * max radius + 10
  std::vector<JammerType> catalog{JammerType{}};
  ChannelParams channel = ChannelParams::defaults();
  int max_retries = 20000;

  void validate() const;
};

Scenario generate_scenario(const GeneratorConfig& cfg, std::uint64_t seed);

// Same map (regions, CBS, channel), freshly drawn jammers.
Scenario regenerate_jammers(const Scenario& base, const GeneratorConfig& cfg, int n_jammers,
                            std::uint64_t seed);

enum class Hypothesis { H0 = 0, H1 = 1 };

struct CostGraph {
  int n = 0;
  std::vector<double> cost;  // row-major n x n
  Hypothesis hypothesis = Hypothesis::H0;

  double at(int i, int j) const { return cost[static_cast<std::size_t>(i * n + j)]; }
};

struct Tour {
  std::vector<int> order;
  bool closed = true;
};

// Sum of I_j * beta_j at one UAV position, beta_j being the in-range indicator.
double interference_at(const Position& uav, std::span<const Jammer> jammers,
                       const ChannelParams& params);

double segment_interference(const Position& a, const Position& b, std::span<const Jammer> jammers,
                            const Scenario& scenario);

double edge_cost(const Region& n, const Region& m, Hypothesis h, const Scenario& scenario,
                 double w_interference);

CostGraph build_cost_graph(const Scenario& scenario, Hypothesis h, double w_interference);

bool is_permutation_tour(const Tour& tour, int n);
double tour_cost(const Tour& tour, const CostGraph& graph);

// Rotates a closed tour so that it starts at `first`.
Tour rotate_to(const Tour& tour, int first);

struct Objective {
  double value = 0.0;
  double distance_term = 0.0;
  double interference_term = 0.0;
  bool sinr_constraint_held = true;
};

Objective mission_objective(std::span<const Position> trajectory, const Tour& tour,
                            const Scenario& scenario, double lambda1, double lambda2,
                            double gamma_min = 0.0);

double trajectory_interference(std::span<const Position> trajectory, const Scenario& scenario);
double trajectory_length(std::span<const Position> trajectory);

}  // namespace antijam::mission
