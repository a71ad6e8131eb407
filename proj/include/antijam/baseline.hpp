#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "antijam/planner.hpp"

namespace antijam::baseline {

using mission::Scenario;

struct RLConfig {
  double grid_pitch = 50.0;
  double learning_rate = 0.1;
  double discount = 0.95;
  double epsilon_start = 1.0;
  double epsilon_end = 0.05;
  double epsilon_decay_fraction = 0.8;  // of all episodes
  int episodes = 5000;
  int max_episode_steps = 600;
  double w_distance = 1.0;
  double w_interference = 1e6;
  double visit_reward = 500.0;
  double completion_reward = 2000.0;
  int rollout_budget = 2000;  // moves
  std::uint64_t seed = 0;

  void validate() const;
  std::uint64_t hash() const;  // FNV-1a over the canonical field values
};

inline constexpr int kActions = 8;
inline constexpr int kMaxRegions = 14;

// Uniform square grid over the arena.
struct Grid {
  int nx = 0;
  double pitch = 0.0;

  Grid(double side, double pitch);
  int cells() const { return nx * nx; }
  int cell_of(double x, double y) const;
  geo::Vec2 center(int cell) const;
  int move(int cell, int action) const;  // -1 when leaving the arena
};

class QTable {
 public:
  QTable(int cells, int n_regions);

  int cells() const { return cells_; }
  int n_regions() const { return n_regions_; }

  std::array<double, kActions> get(int cell, std::uint32_t mask) const;
  double& at(int cell, std::uint32_t mask, int action);
  std::size_t stored_states() const;

  void save(const std::string& path, std::uint64_t key_seed, std::uint64_t key_hash) const;
  // Returns false if the file is missing or was written for another key.
  static bool load(const std::string& path, std::uint64_t key_seed, std::uint64_t key_hash,
                   QTable& out);

 private:
  std::uint64_t key(int cell, std::uint32_t mask) const {
    return static_cast<std::uint64_t>(mask) * static_cast<std::uint64_t>(cells_) +
           static_cast<std::uint64_t>(cell);
  }

  int cells_ = 0;
  int n_regions_ = 0;
  std::vector<double> dense_;
  std::unordered_map<std::uint64_t, std::array<double, kActions>> sparse_;
};

struct TrainingTrace {
  std::vector<double> episode_returns;
};

QTable train_qlearning(const Scenario& scenario, const RLConfig& cfg, TrainingTrace* trace = nullptr);

planner::MissionReport rollout_policy(const QTable& table, const Scenario& scenario,
                                      const RLConfig& cfg, int budget_moves);

std::string cache_file_name(std::uint64_t scenario_seed, const RLConfig& cfg);

// Loads the table from `dir` if a matching cache exists, else trains and saves.
QTable cached_qlearning(const Scenario& scenario, const RLConfig& cfg, const std::string& dir);

}  // namespace antijam::baseline
