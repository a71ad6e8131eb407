#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "antijam/config.hpp"

namespace antijam::harness {

using config::ExperimentConfig;

struct Cell {
  int n_regions = 0;
  int n_jammers = 0;
};

struct RunResult {
  std::string method;
  int n_regions = 0;
  int n_jammers = 0;
  int replicate = 0;
  std::uint64_t seed = 0;  // scenario seed
  double total_interference = 0.0;
  std::size_t completion_steps = 0;
  double path_length = 0.0;
  std::optional<double> jammer_rmse;
  std::size_t jammer_misses = 0;
  bool completed = false;
  std::string error;  // empty when the run finished without throwing
  std::optional<planner::MissionReport> report;
  std::optional<mission::Scenario> scenario;
};

inline constexpr const char* kRunsHeader =
    "method,n_regions,n_jammers,seed,total_interference,completion_steps,path_length,jammer_rmse,"
    "completed";

std::uint64_t scenario_seed(std::uint64_t base, int n_regions, int n_jammers, int replicate);

mission::Scenario make_scenario(const ExperimentConfig& cfg, int n_regions, int n_jammers,
                                std::uint64_t seed);

// Expert demonstrations on maps sharing the regions of `scenario`.
struct TrainingSet {
  std::vector<expert::Demonstration> d0;
  std::vector<expert::Demonstration> d1;
};
TrainingSet training_set(const mission::Scenario& scenario, const ExperimentConfig& cfg);

wm::WorldModel train_world_model(const mission::Scenario& scenario, const ExperimentConfig& cfg);

// Expert report: H1 demonstration flown at the expert speed.
planner::MissionReport expert_report(const mission::Scenario& scenario, const ExperimentConfig& cfg);

planner::MissionReport run_method(const std::string& method, const mission::Scenario& scenario,
                                  const ExperimentConfig& cfg);

// Every (cell, replicate, method) of the config, run on `workers` threads.
// The result order is (method, n_regions, n_jammers, seed) whatever the
// scheduling. Errors are recorded per run.
std::vector<RunResult> run_experiment(const ExperimentConfig& cfg, std::span<const Cell> cells,
                                      int replicates, std::span<const std::string> methods,
                                      bool keep_reports);

std::vector<RunResult> run_experiment(const ExperimentConfig& cfg);

std::string runs_csv(std::span<const RunResult> results);
std::string aggregate_csv(std::span<const RunResult> results);

// runs.csv, aggregate.csv, trajectories/ and errors.log (if any run failed).
void emit_outputs(std::span<const RunResult> results, const std::string& dir);

std::string trajectory_file_name(const RunResult& r);

// Recomputes every runs.csv row of `dir` from its trajectory JSON. Returns
// one message per mismatch.
std::vector<std::string> audit(const std::string& dir);

struct LocalizationRow {
  int n_jammers = 0;
  int runs = 0;
  std::size_t matched = 0;
  std::size_t misses = 0;
  double pooled_rmse = 0.0;  // over matched pairs of all runs
  double worst_rmse = 0.0;
};

std::vector<LocalizationRow> localization_summary(std::span<const RunResult> results);
std::string localization_csv(std::span<const LocalizationRow> rows);

bool all_completed(std::span<const RunResult> results);

}  // namespace antijam::harness
