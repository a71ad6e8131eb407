#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "antijam/baseline.hpp"
#include "antijam/expert.hpp"
#include "antijam/planner.hpp"
#include "antijam/worldmodel.hpp"

namespace antijam::config {

using json = nlohmann::json;

// How the world model of one mission is trained: maps sharing the mission's
// regions and CBS, freshly drawn jammers, kept only if the expert detoured.
struct TrainingConfig {
  int maps = 4;
  int max_draws = 64;
  int max_jammers = 3;  // a draw k carries 1 + k % max_jammers jammers

  void validate() const;
};

struct ExperimentConfig {
  std::vector<int> regions{4, 6, 8, 10};
  std::vector<int> jammers{1, 2, 3, 4, 5};
  int seeds = 10;
  std::uint64_t seed = 1;
  std::vector<std::string> methods{"expert", "aif", "qlearning"};
  int workers = 0;  // 0: one per hardware thread
  std::string out = "out";
  bool trajectories = true;
  std::string qtable_cache;  // empty: train every time

  int fixed_regions = 6;     // sweep-jammers and eval-localization
  int localization_seeds = 30;

  mission::GeneratorConfig generator;
  expert::ExpertConfig expert;
  wm::WorldModelParams worldmodel;
  TrainingConfig training;
  planner::PlannerConfig planner;
  baseline::RLConfig rl;

  void validate() const;
};

bool is_method(const std::string& name);

// Keys absent from `j` keep their defaults; unknown keys are an error.
ExperimentConfig from_json(const json& j);
json to_json(const ExperimentConfig& c);

ExperimentConfig load(const std::string& path);

}  // namespace antijam::config
