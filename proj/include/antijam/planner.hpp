#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "antijam/belief.hpp"
#include "antijam/rng.hpp"
#include "antijam/worldmodel.hpp"

namespace antijam::planner {

using geo::Vec2;
using mission::Position;
using mission::Scenario;
using wm::GaussianBelief;
using wm::WorldModel;

// ---- symbolic plan selection ----

struct PlanCandidate {
  std::vector<int> word;  // closed tour, first element is the anchor
  GaussianBelief predicted_cost;
  double abnormality = 0.0;
};

// All anchored permutations for up to 7 targets, otherwise a 2-opt tour on
// the learned mean costs plus cap-1 seeded 2-swap perturbations.
std::vector<std::vector<int>> enumerate_candidates(std::span<const int> targets,
                                                   const wm::Dictionary1& dict1, std::size_t cap,
                                                   int anchor, std::uint64_t seed);

// Independent edges: means and variances add. Closed words include the
// edge back to the first letter.
GaussianBelief predict_plan_cost(std::span<const int> word, const wm::Dictionary1& dict1,
                                 bool closed = true);

// Belief of the cheapest known word over the same target set; a 2-opt tour on
// the learned means if no such word was demonstrated.
GaussianBelief reference_belief(std::span<const int> targets, const wm::Dictionary1& dict1,
                                int anchor);

// Reference re-centred on observed leg costs, measurement variance `rc`.
GaussianBelief observed_reference(std::span<const double> observed_leg_costs,
                                  const GaussianBelief& prior, std::size_t total_legs,
                                  const wm::Dictionary1& dict1, std::span<const int> word,
                                  double rc = 1.0);

double plan_abnormality(const GaussianBelief& candidate, const GaussianBelief& reference);

// argmin abnormality; ties by lower predicted mean, then lexicographic word.
const PlanCandidate& select_plan(std::span<const PlanCandidate> candidates);

// ---- attractor execution ----

struct KalmanState {
  Vec2 mean = Vec2::Zero();
  Eigen::Matrix2d covariance = Eigen::Matrix2d::Zero();
  double attractor_gain = 0.5;
  Eigen::Matrix2d process_noise = Eigen::Matrix2d::Identity() * 0.01;
  Eigen::Matrix2d measurement_noise = Eigen::Matrix2d::Identity() * 0.25;

  void validate() const;
};

// One predict/update cycle. `truth` is the simulated true position: it moves
// by the control plus process noise and is observed with measurement noise.
KalmanState attractor_step(const KalmanState& state, Vec2& truth, const Vec2& letter, double dt,
                           Rng& rng);

// Convenience form: the true position starts at the current mean.
KalmanState attractor_step(const KalmanState& state, const Vec2& letter, double dt,
                           std::uint64_t noise_seed);

// ---- signal monitoring ----

// Diagonal KL between the predicted letter and the observation carrying the
// same per-dimension variance.
double signal_abnormality(const wm::Point2& observation, const wm::SignalLetter& predicted);

struct DetectionContext {
  bool triggered = false;
  loc::Problem problem;
  std::vector<loc::Source> background;  // estimates already explaining the history
};

struct Inference {
  loc::Particle best;
  std::vector<loc::Particle> particles;
};

// Scores every particle against the history and returns the argmin.
Inference infer_jammer(const DetectionContext& ctx, const loc::ParticleParams& params);

// ---- anti-jamming word selection ----

struct Obstacle {
  Vec2 center = Vec2::Zero();
  double radius = 0.0;  // estimated jammer radius plus the uncertainty buffer
};

struct WordChoice {
  bool from_token = false;
  std::size_t word_index = 0;
  double score = 0.0;
  std::vector<Vec2> rollout;  // world-frame targets, ends before the resume segment
};

struct WordScorer {
  // Predicted abnormality of flying through `p` with and without the jammer.
  virtual double operator()(const Vec2& p) const = 0;
  virtual ~WordScorer() = default;
};

// Words are replayed in the jammer frame along the heading to the waypoint and
// pushed outward by however much the obstacle exceeds the token radius.
std::optional<WordChoice> select_antijam_word(const Obstacle& target, const wm::Token& token,
                                              std::span<const Obstacle> all, const Vec2& uav,
                                              const Vec2& waypoint, double margin, double dt,
                                              double step, const WordScorer& scorer);

// ---- online mission ----

struct PlannerConfig {
  double attractor_gain = 0.5;
  double process_noise = 0.01;      // m^2 per axis
  double measurement_noise = 0.25;  // m^2 per axis
  double speed = 10.0;
  double waypoint_tolerance = 2.0;
  std::size_t candidate_cap = 16;
  double margin = 5.0;
  double estimate_buffer = 20.0;  // added to estimated radii
  double lookahead = 160.0;

  int trigger_window = 5;
  double letter_variance_weight = 0.0;  // share of the dict3 letter spread in the belief variance
  double tau_percentile = 99.5;
  double tau_floor = 1.0;
  int min_history = 30;
  int min_gap = 25;
  int max_inference_events = 80;
  int history_stride = 8;
  std::size_t max_history = 250;
  int final_history_stride = 4;  // post-mission fit
  std::size_t final_max_history = 1000;
  double shadow_spread = 5.0;

  double particle_pitch = 25.0;
  double particle_jitter = 5.0;
  int max_sources = 8;
  double accept_ratio = 0.5;
  double fit_target_factor = 3.0;

  double budget_factor = 3.0;
  int budget_extra = 3000;
  bool inference_enabled = true;
  std::uint64_t seed = 0;

  void validate() const;
};

struct Calibration {
  double tau = 1.0;
  double mean_abnormality = 0.0;
  // Residual variance of (SINR, rate) against the own-position prediction on
  // the quiet map; added to every letter variance.
  wm::Point2 noise_variance{0.0, 0.0};
};

struct JammerEstimate {
  double x = 0.0;
  double y = 0.0;
  int type_id = 1;
  double radius = 0.0;
  double power = 0.0;
  double abnormality = 0.0;
};

struct MissionEvent {
  std::size_t step = 0;
  std::string kind;
  std::string detail;
};

struct MissionReport {
  std::string method;
  std::uint64_t seed = 0;
  std::vector<int> planned_order;
  std::vector<int> visited_order;
  std::vector<Position> trajectory;
  double total_interference = 0.0;
  std::size_t completion_steps = 0;
  double path_length = 0.0;
  bool completed = false;
  bool triggered = false;
  std::vector<JammerEstimate> estimates;
  std::optional<double> jammer_rmse;
  std::size_t jammer_misses = 0;
  double dt = 0.1;
  std::vector<MissionEvent> events;
};

// Flies the map without jammers and derives the trigger threshold.
Calibration calibrate(const Scenario& scenario, const WorldModel& model, const PlannerConfig& cfg);

// The planner only reads the regions, CBS and channel of `scenario`; the
// jammers drive the simulated observations.
MissionReport run_mission(const Scenario& scenario, const WorldModel& model,
                          const PlannerConfig& cfg, const Calibration& calibration);

MissionReport run_mission(const Scenario& scenario, const WorldModel& model,
                          const PlannerConfig& cfg);

// Greedy nearest matching of estimates to distinct truths.
struct RmseResult {
  double rmse = 0.0;
  std::size_t matched = 0;
  std::size_t misses = 0;
};
RmseResult rmse(std::span<const Vec2> estimates, std::span<const Vec2> truths);

}  // namespace antijam::planner
