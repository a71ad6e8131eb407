#pragma once

#include <array>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "antijam/expert.hpp"
#include "antijam/gng.hpp"

namespace antijam::wm {

using expert::Demonstration;
using mission::Hypothesis;

inline constexpr double kVarianceFloor = 1e-6;

struct GaussianBelief {
  double mean = 0.0;
  double variance = 1.0;
};

// KL(p || q) for univariate Gaussians.
double gaussian_kl(const GaussianBelief& p, const GaussianBelief& q);

// Sum of per-dimension KL terms for diagonal Gaussians.
double diagonal_kl(const Point2& mean_p, const Point2& var_p, const Point2& mean_q,
                   const Point2& var_q);

struct Dictionary1 {
  std::vector<int> letters;                      // region ids
  std::vector<std::array<double, 2>> positions;  // per letter, ground x/y
  double altitude = 0.0;
  std::map<std::pair<int, int>, GaussianBelief> edges;
  std::map<std::pair<int, int>, int> transition_counts;
  std::vector<std::vector<int>> words;
  std::vector<int> word_counts;

  // Learned belief for n->m (either direction), else the distance fallback.
  GaussianBelief edge_belief(int n, int m) const;
};

struct VelocityLetter {
  std::array<double, 3> v{};
  int repeat = 1;
};

struct VelocityWord {
  std::vector<VelocityLetter> letters;
  Hypothesis source = Hypothesis::H0;
  // H1 words live in the jammer frame: jammer at the origin, leg heading +x.
  std::array<double, 2> entry{};

  std::size_t length() const;
  // Positions visited when replaying from `entry` with step dt (entry included).
  std::vector<std::array<double, 2>> replay(double dt) const;
};

struct Token {
  int type_id = 0;  // 0 holds the nominal words
  double radius = 0.0;
  double power = 0.0;
  std::vector<VelocityWord> words;
};

enum class SignalLabel { Nominal = 0, Jammed = 1 };

struct SignalLetter {
  Point2 centroid{};  // (SINR dB, dB/s)
  Point2 variance{};
  SignalLabel label = SignalLabel::Nominal;
};

struct Dictionary3 {
  std::vector<SignalLetter> letters;
  Point2 scale{1.0, 1.0};  // pooled per-dimension std used for distances
};

struct WorldModelParams {
  GngParams gng;
  double quantum = 0.1;            // velocity letter quantization, m/s
  std::size_t max_signal_samples = 6000;  // per label, strided subsample
};

struct WorldModel {
  Dictionary1 dict1;
  std::vector<Token> dict2;
  Dictionary3 dict3;
  double dt = 0.1;

  const Token* token(int type_id) const;
};

Dictionary1 learn_dictionary1(std::span<const Demonstration> d0);

std::vector<Token> learn_dictionary2(std::span<const Demonstration> d0,
                                     std::span<const Demonstration> d1,
                                     std::span<const mission::JammerType> catalog,
                                     double quantum = 0.1);

Dictionary3 learn_dictionary3(std::span<const Demonstration> d0, std::span<const Demonstration> d1,
                              const GngParams& params, std::size_t max_samples = 6000);

struct Assignment {
  std::size_t index = 0;
  double distance = 0.0;
};

Assignment discretize_sinr(const Point2& observation, const Dictionary3& dict3);

WorldModel train_world_model(std::span<const Demonstration> d0, std::span<const Demonstration> d1,
                             std::span<const mission::JammerType> catalog,
                             const WorldModelParams& params);

}  // namespace antijam::wm
