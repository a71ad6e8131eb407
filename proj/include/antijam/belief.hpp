#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "antijam/geometry.hpp"
#include "antijam/gng.hpp"

// Multi-source jammer localization from a SINR history.
namespace antijam::loc {

using geo::Vec2;
using wm::Point2;

struct SourceType {
  int type_id = 1;
  double radius = 50.0;
  double power = 1.0;
};

struct SignalSample {
  Vec2 prev = Vec2::Zero();  // estimated UAV position one step earlier
  Vec2 cur = Vec2::Zero();
  double signal_db_prev = 0.0;  // CBS received power at prev/cur, dBW
  double signal_db_cur = 0.0;
  Point2 observed{};  // (SINR dB, dB/s)
  Point2 variance{1.0, 1.0};
};

struct Problem {
  std::vector<SignalSample> samples;
  std::vector<SourceType> types;
  double altitude = 200.0;
  double noise_power = 1e-12;
  double exponent = 2.0;
  double dt = 0.1;
};

struct Source {
  Vec2 pos = Vec2::Zero();
  int type = 0;  // index into Problem::types
};

double source_power(const Problem& pb, const Source& s, const Vec2& uav);
Point2 predict(const Problem& pb, const SignalSample& s, std::span<const Source> sources);
double sample_cost(const Problem& pb, const SignalSample& s, std::span<const Source> sources);
double total_cost(const Problem& pb, std::span<const Source> sources);

struct Particle {
  Vec2 pos = Vec2::Zero();
  int type = 0;
  double abnormality = 0.0;
};

struct ParticleParams {
  double pitch = 25.0;
  double jitter = 5.0;
  double side = 1000.0;
  std::uint64_t seed = 0;

  void validate() const;
};

// One jittered grid over the arena per source type.
std::vector<Particle> spawn_particles(const ParticleParams& params, std::size_t n_types);

// Fills each particle's abnormality: total KL over the history when the
// particle is added to `background`.
void score_particles(const Problem& pb, std::span<const Source> background,
                     std::span<Particle> particles);

// Lowest abnormality, ties to the lower index.
std::size_t best_particle(std::span<const Particle> particles);

// Levenberg-Marquardt on all source positions jointly.
std::vector<Source> refine(const Problem& pb, std::vector<Source> sources, double side,
                           int max_iter = 60);

struct FitParams {
  ParticleParams particles;
  int max_sources = 8;
  double accept_ratio = 0.5;  // a new source must cut the cost below this fraction
  double target_cost = 0.0;   // stop once the history is explained this well
  int hop_rounds = 6;
  bool pair_moves = true;
};

struct FitResult {
  std::vector<Source> sources;
  double cost = 0.0;
  std::vector<Particle> particles;  // last scored particle set
};

FitResult fit_sources(const Problem& pb, std::vector<Source> warm, const FitParams& params);

}  // namespace antijam::loc
