#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "antijam/mission.hpp"

namespace antijam::expert {

using mission::CostGraph;
using mission::Hypothesis;
using mission::Position;
using mission::Scenario;
using mission::Tour;

Tour nearest_neighbor_tour(const CostGraph& graph, int start);

// First-improvement 2-opt from a nearest-neighbour start; the seed picks the
// start vertex.
Tour two_opt(const CostGraph& graph, std::uint64_t seed);

// Polyline from a to b keeping horizontal distance >= r_j + margin from every
// jammer. Points are returned at the altitude of `a`.
std::vector<Position> detour_around_jammers(const Position& a, const Position& b,
                                            std::span<const channel::Jammer> jammers,
                                            double margin);

struct ExpertConfig {
  double margin = 5.0;
  double speed = 10.0;        // m/s
  double word_window = 100.0; // extra reach of the recorded detour interval
  double w_interference = 1e6;
  std::uint64_t tour_seed = 0;

  void validate() const;
  double dt(double step) const { return step / speed; }
};

struct DetourRecord {
  int leg = 0;
  int jammer = 0;  // index into the scenario's jammer list
  int type_id = 1;
  double radius = 0.0;
  double power = 0.0;
  double jammer_x = 0.0;
  double jammer_y = 0.0;
  std::size_t start = 0;  // first sample index (inclusive)
  std::size_t end = 0;    // last sample index (inclusive)
  double heading = 0.0;   // leg heading, radians
};

struct Demonstration {
  Hypothesis hypothesis = Hypothesis::H0;
  std::vector<int> order;            // closed word, starts at region 0
  std::vector<double> edge_costs;    // cost of leg i: order[i] -> order[i+1 mod n]
  std::vector<Position> trajectory;
  std::vector<std::array<double, 3>> velocity_letters;
  std::vector<std::array<double, 2>> sinr_trace;  // (SINR dB, dB/s)
  std::vector<std::size_t> leg_starts;
  std::vector<DetourRecord> detours;
  std::uint64_t scenario_seed = 0;
  double dt = 0.1;
};

// H0: straight legs, SINR recorded without jamming. H1: same order, legs
// replaced by detours, SINR recorded with the scenario jammers.
Demonstration generate_demonstration(const Scenario& scenario, Hypothesis h,
                                     const ExpertConfig& cfg);

// (Gamma_dB, dGamma/dt) along a trajectory, backward differences.
std::vector<std::array<double, 2>> sinr_trace(std::span<const Position> trajectory,
                                              const Scenario& scenario,
                                              std::span<const channel::Jammer> jammers, double dt);

}  // namespace antijam::expert
