#include "antijam/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

#include <Eigen/Dense>

#include "antijam/error.hpp"
#include "antijam/expert.hpp"

namespace antijam::planner {

namespace {

std::vector<int> sorted_copy(std::span<const int> xs) {
  std::vector<int> v(xs.begin(), xs.end());
  std::sort(v.begin(), v.end());
  return v;
}

mission::CostGraph mean_cost_graph(std::span<const int> ids, const wm::Dictionary1& dict1) {
  mission::CostGraph g;
  g.n = static_cast<int>(ids.size());
  g.cost.assign(ids.size() * ids.size(), 0.0);
  for (int i = 0; i < g.n; ++i) {
    for (int j = 0; j < g.n; ++j) {
      if (i != j) {
        g.cost[static_cast<std::size_t>(i * g.n + j)] =
            dict1.edge_belief(ids[static_cast<std::size_t>(i)], ids[static_cast<std::size_t>(j)]).mean;
      }
    }
  }
  return g;
}

std::vector<int> two_opt_word(std::span<const int> ids, const wm::Dictionary1& dict1, int anchor,
                              std::uint64_t seed) {
  const auto g = mean_cost_graph(ids, dict1);
  const auto t = expert::two_opt(g, seed);
  std::vector<int> word;
  for (int v : t.order) word.push_back(ids[static_cast<std::size_t>(v)]);
  auto it = std::find(word.begin(), word.end(), anchor);
  std::rotate(word.begin(), it, word.end());
  return word;
}

bool is_psd(const Eigen::Matrix2d& m) {
  if (!m.allFinite()) return false;
  if (std::abs(m(0, 1) - m(1, 0)) > 1e-9 * std::max(1.0, m.cwiseAbs().maxCoeff())) return false;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(m);
  return es.eigenvalues().minCoeff() >= -1e-12;
}

Eigen::Matrix2d psd_sqrt(const Eigen::Matrix2d& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(m);
  const Eigen::Vector2d ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace

std::vector<std::vector<int>> enumerate_candidates(std::span<const int> targets,
                                                   const wm::Dictionary1& dict1, std::size_t cap,
                                                   int anchor, std::uint64_t seed) {
  require(targets.size() >= 2, "need at least 2 targets");
  require(cap >= 1, "candidate cap must be >= 1");
  const auto sorted = sorted_copy(targets);
  require(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end(), "duplicate targets");
  require(std::binary_search(sorted.begin(), sorted.end(), anchor), "anchor not among targets");

  std::vector<std::vector<int>> out;
  std::vector<int> rest;
  for (int v : sorted) {
    if (v != anchor) rest.push_back(v);
  }
  if (targets.size() <= 7) {
    do {
      std::vector<int> w{anchor};
      w.insert(w.end(), rest.begin(), rest.end());
      out.push_back(std::move(w));
    } while (std::next_permutation(rest.begin(), rest.end()));
    return out;
  }

  const auto base = two_opt_word(sorted, dict1, anchor, seed);
  std::set<std::vector<int>> seen{base};
  out.push_back(base);
  Rng rng(derive_seed(seed, 0x2c));
  const std::size_t n = base.size();
  for (std::size_t attempt = 0; out.size() < cap && attempt < 50 * cap; ++attempt) {
    auto w = base;
    const std::size_t i = 1 + rng.index(n - 1);
    const std::size_t j = 1 + rng.index(n - 1);
    if (i == j) continue;
    std::swap(w[i], w[j]);
    if (seen.insert(w).second) out.push_back(std::move(w));
  }
  return out;
}

GaussianBelief predict_plan_cost(std::span<const int> word, const wm::Dictionary1& dict1,
                                 bool closed) {
  require(word.size() >= 2, "a word needs at least 2 letters");
  GaussianBelief b{0.0, 0.0};
  const std::size_t edges = closed ? word.size() : word.size() - 1;
  for (std::size_t i = 0; i < edges; ++i) {
    const auto e = dict1.edge_belief(word[i], word[(i + 1) % word.size()]);
    b.mean += e.mean;
    b.variance += e.variance;
  }
  return b;
}

GaussianBelief reference_belief(std::span<const int> targets, const wm::Dictionary1& dict1,
                                int anchor) {
  const auto key = sorted_copy(targets);
  std::optional<GaussianBelief> best;
  for (const auto& w : dict1.words) {
    if (sorted_copy(w) != key) continue;
    const auto b = predict_plan_cost(w, dict1);
    if (!best || b.mean < best->mean) best = b;
  }
  if (best) return *best;
  return predict_plan_cost(two_opt_word(key, dict1, anchor, 0), dict1);
}

GaussianBelief observed_reference(std::span<const double> observed_leg_costs,
                                  const GaussianBelief& prior, std::size_t total_legs,
                                  const wm::Dictionary1& dict1, std::span<const int> word,
                                  double rc) {
  if (observed_leg_costs.empty()) return prior;
  require(observed_leg_costs.size() <= total_legs && total_legs == word.size(),
          "more observed legs than the word has");
  GaussianBelief b{0.0, 0.0};
  for (double c : observed_leg_costs) {
    b.mean += c;
    b.variance += rc;
  }
  for (std::size_t i = observed_leg_costs.size(); i < total_legs; ++i) {
    const auto e = dict1.edge_belief(word[i], word[(i + 1) % word.size()]);
    b.mean += e.mean;
    b.variance += e.variance;
  }
  return b;
}

double plan_abnormality(const GaussianBelief& candidate, const GaussianBelief& reference) {
  return wm::gaussian_kl(candidate, reference);
}

const PlanCandidate& select_plan(std::span<const PlanCandidate> candidates) {
  require(!candidates.empty(), "empty candidate list");
  const PlanCandidate* best = &candidates.front();
  for (const auto& c : candidates.subspan(1)) {
    if (c.abnormality < best->abnormality ||
        (c.abnormality == best->abnormality &&
         (c.predicted_cost.mean < best->predicted_cost.mean ||
          (c.predicted_cost.mean == best->predicted_cost.mean && c.word < best->word)))) {
      best = &c;
    }
  }
  return *best;
}

void KalmanState::validate() const {
  require(attractor_gain > 0.0 && attractor_gain < 1.0, "attractor_gain must lie in (0, 1)");
  if (!mean.allFinite()) fail(ErrorCode::InvalidArgument, "non-finite state mean");
  if (!is_psd(covariance) || !is_psd(process_noise) || !is_psd(measurement_noise)) {
    fail(ErrorCode::InvalidArgument, "covariance matrices must be symmetric positive semi-definite");
  }
}

KalmanState attractor_step(const KalmanState& state, Vec2& truth, const Vec2& letter, double dt,
                           Rng& rng) {
  state.validate();
  require(dt > 0.0, "dt must be > 0");
  require(letter.allFinite(), "letter must be finite");
  const Vec2 u = state.attractor_gain * letter * dt;
  const Vec2 eps = psd_sqrt(state.process_noise) * Vec2(rng.normal(), rng.normal());
  truth += u + eps;
  const Vec2 z = truth + psd_sqrt(state.measurement_noise) * Vec2(rng.normal(), rng.normal());

  KalmanState next = state;
  next.mean = state.mean + u;
  next.covariance = state.covariance + state.process_noise;
  const Eigen::Matrix2d s = next.covariance + state.measurement_noise;
  if (std::abs(s.determinant()) > 1e-300) {
    const Eigen::Matrix2d k = next.covariance * s.inverse();
    next.mean += k * (z - next.mean);
    next.covariance = (Eigen::Matrix2d::Identity() - k) * next.covariance;
    next.covariance = 0.5 * (next.covariance + next.covariance.transpose()).eval();
  }
  return next;
}

KalmanState attractor_step(const KalmanState& state, const Vec2& letter, double dt,
                           std::uint64_t noise_seed) {
  Rng rng(noise_seed);
  Vec2 truth = state.mean;
  return attractor_step(state, truth, letter, dt, rng);
}

double signal_abnormality(const wm::Point2& observation, const wm::SignalLetter& predicted) {
  return wm::diagonal_kl(predicted.centroid, predicted.variance, observation, predicted.variance);
}

Inference infer_jammer(const DetectionContext& ctx, const loc::ParticleParams& params) {
  if (!ctx.triggered) fail(ErrorCode::State, "no detection context");
  require(!ctx.problem.types.empty(), "empty jammer catalog");
  Inference inf;
  inf.particles = loc::spawn_particles(params, ctx.problem.types.size());
  loc::score_particles(ctx.problem, ctx.background, inf.particles);
  inf.best = inf.particles[loc::best_particle(inf.particles)];
  return inf;
}

namespace {

Vec2 rotate(const Vec2& p, double ang) {
  const double c = std::cos(ang), s = std::sin(ang);
  return {c * p.x() - s * p.y(), s * p.x() + c * p.y()};
}

void append_segment(std::vector<Vec2>& out, const Vec2& a, const Vec2& b, double step) {
  const Vec2 pts[2] = {a, b};
  const auto r = geo::resample(pts, step);
  out.insert(out.end(), r.begin() + 1, r.end());
}

}  // namespace

std::optional<WordChoice> select_antijam_word(const Obstacle& target, const wm::Token& token,
                                              std::span<const Obstacle> all, const Vec2& uav,
                                              const Vec2& waypoint, double margin, double dt,
                                              double step, const WordScorer& scorer) {
  if (token.words.empty()) return std::nullopt;
  const Vec2 to_wp = waypoint - uav;
  const double heading = std::atan2(to_wp.y(), to_wp.x());
  const double start_gap = to_wp.norm();

  std::vector<geo::Circle> hard;
  for (const auto& o : all) hard.push_back({o.center, o.radius});
  const bool uav_outside = std::all_of(hard.begin(), hard.end(), [&](const geo::Circle& c) {
    return (uav - c.center).norm() >= c.radius;
  });
  const geo::Circle resume_circle{target.center, target.radius + margin};

  std::optional<WordChoice> best;
  for (std::size_t wi = 0; wi < token.words.size(); ++wi) {
    const auto local = token.words[wi].replay(dt);
    std::vector<Vec2> world;
    world.reserve(local.size());
    const double grow = std::max(0.0, target.radius - token.radius);
    for (const auto& p : local) {
      Vec2 q = rotate({p[0], p[1]}, heading);
      const double n = q.norm();
      if (grow > 0.0 && n > 1e-9) q *= (n + grow) / n;
      world.push_back(target.center + q);
    }

    std::size_t k0 = 0;
    double bd = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < world.size(); ++k) {
      const double d = (world[k] - uav).norm();
      if (d < bd) {
        bd = d;
        k0 = k;
      }
    }
    std::vector<Vec2> rollout(world.begin() + static_cast<std::ptrdiff_t>(k0), world.end());
    if (rollout.empty()) continue;

    bool ok = std::all_of(rollout.begin(), rollout.end(), [&](const Vec2& p) {
      return std::all_of(hard.begin(), hard.end(),
                         [&](const geo::Circle& c) { return (p - c.center).norm() >= c.radius; });
    });
    if (ok && uav_outside) ok = geo::segment_clear(uav, rollout.front(), hard, 0.0);
    if (ok) ok = geo::segment_clear(rollout.back(), waypoint, {&resume_circle, 1}, 0.0);
    if (ok) ok = (rollout.back() - waypoint).norm() < start_gap;
    if (!ok) continue;

    std::vector<Vec2> path;
    append_segment(path, uav, rollout.front(), step);
    for (std::size_t k = 1; k < rollout.size(); ++k) path.push_back(rollout[k]);
    append_segment(path, rollout.back(), waypoint, step);
    double score = 0.0;
    for (const auto& p : path) score += scorer(p);

    if (!best || score < best->score) {
      WordChoice c;
      c.from_token = true;
      c.word_index = wi;
      c.score = score;
      std::vector<Vec2> targets;
      append_segment(targets, uav, rollout.front(), step);
      for (std::size_t k = 1; k < rollout.size(); ++k) targets.push_back(rollout[k]);
      c.rollout = std::move(targets);
      best = std::move(c);
    }
  }
  return best;
}

void PlannerConfig::validate() const {
  require(attractor_gain > 0.0 && attractor_gain < 1.0, "attractor_gain must lie in (0, 1)");
  require(process_noise >= 0.0 && measurement_noise >= 0.0, "noise variances must be >= 0");
  require(speed > 0.0, "speed must be > 0");
  require(waypoint_tolerance > 0.0, "waypoint_tolerance must be > 0");
  require(candidate_cap >= 1, "candidate_cap must be >= 1");
  require(margin >= 0.0 && lookahead > 0.0, "margin must be >= 0 and lookahead > 0");
  require(estimate_buffer >= 0.0, "estimate_buffer must be >= 0");
  require(letter_variance_weight >= 0.0, "letter_variance_weight must be >= 0");
  require(trigger_window >= 1, "trigger_window must be >= 1");
  require(tau_percentile > 0.0 && tau_percentile <= 100.0, "tau_percentile must lie in (0, 100]");
  require(tau_floor >= 0.0, "tau_floor must be >= 0");
  require(min_history >= 2 && min_gap >= 1 && max_inference_events >= 0,
          "invalid inference scheduling");
  require(history_stride >= 1 && max_history >= 8, "invalid history decimation");
  require(final_history_stride >= 1 && final_max_history >= 8, "invalid final history decimation");
  require(particle_pitch > 0.0 && particle_jitter >= 0.0, "invalid particle grid");
  require(max_sources >= 1 && accept_ratio > 0.0 && accept_ratio < 1.0,
          "invalid source acceptance");
  require(budget_factor >= 1.0 && budget_extra >= 0, "invalid step budget");
}

RmseResult rmse(std::span<const Vec2> estimates, std::span<const Vec2> truths) {
  RmseResult r;
  struct Pair {
    double d;
    std::size_t e, t;
  };
  std::vector<Pair> pairs;
  for (std::size_t e = 0; e < estimates.size(); ++e) {
    for (std::size_t t = 0; t < truths.size(); ++t) {
      pairs.push_back({(estimates[e] - truths[t]).norm(), e, t});
    }
  }
  std::stable_sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) { return a.d < b.d; });
  std::vector<char> used_e(estimates.size(), 0), used_t(truths.size(), 0);
  double sum = 0.0;
  for (const auto& p : pairs) {
    if (used_e[p.e] || used_t[p.t]) continue;
    used_e[p.e] = used_t[p.t] = 1;
    sum += p.d * p.d;
    ++r.matched;
  }
  r.misses = truths.size() - r.matched;
  r.rmse = r.matched ? std::sqrt(sum / double(r.matched)) : 0.0;
  return r;
}

}  // namespace antijam::planner
