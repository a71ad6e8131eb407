#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "antijam/error.hpp"
#include "antijam/harness.hpp"
#include "antijam/planner.hpp"
#include "antijam/rng.hpp"
#include "antijam/serialization.hpp"

using namespace antijam;
using namespace antijam::planner;

namespace {

wm::Dictionary1 grid_dict(int n) {
  wm::Dictionary1 d;
  d.altitude = 0.0;
  Rng rng(derive_seed(5, static_cast<std::uint64_t>(n)));
  for (int i = 0; i < n; ++i) {
    d.letters.push_back(i);
    d.positions.push_back({rng.uniform(0, 1000), rng.uniform(0, 1000)});
  }
  return d;
}

std::vector<int> iota(int n) {
  std::vector<int> v(static_cast<std::size_t>(n));
  std::iota(v.begin(), v.end(), 0);
  return v;
}

// SINR history along a closed square around `center`, observations generated
// by the source set itself.
loc::Problem square_problem(const Vec2& center, double half, std::span<const loc::Source> truth) {
  loc::Problem pb;
  pb.types = {{1, 50.0, 1.0}};
  std::vector<Vec2> path;
  const Vec2 corners[5] = {center + Vec2(-half, -half), center + Vec2(half, -half),
                           center + Vec2(half, half), center + Vec2(-half, half),
                           center + Vec2(-half, -half)};
  for (int c = 0; c < 4; ++c) {
    for (int k = 0; k < 40; ++k) path.push_back(corners[c] + (corners[c + 1] - corners[c]) * (k / 40.0));
  }
  for (std::size_t i = 1; i < path.size(); ++i) {
    loc::SignalSample s;
    s.prev = path[i - 1];
    s.cur = path[i];
    s.signal_db_prev = -60.0;
    s.signal_db_cur = -60.0;
    s.variance = {0.25, 0.5};
    pb.samples.push_back(s);
  }
  for (auto& s : pb.samples) s.observed = loc::predict(pb, s, truth);
  return pb;
}

struct ConstScorer : WordScorer {
  double operator()(const Vec2&) const override { return 1.0; }
};

struct Trained {
  mission::Scenario scenario;
  config::ExperimentConfig cfg;
  wm::WorldModel model;
};

// A one-jammer map whose jammer sits on the expert tour.
Trained one_jammer_on_a_leg() {
  config::ExperimentConfig cfg;
  for (int rep = 0; rep < 50; ++rep) {
    const auto seed = harness::scenario_seed(3, 6, 1, rep);
    auto s = harness::make_scenario(cfg, 6, 1, seed);
    const auto h0 = expert::generate_demonstration(s, mission::Hypothesis::H0, cfg.expert);
    if (mission::trajectory_interference(h0.trajectory, s) <= 0.0) continue;
    cfg.planner.seed = seed;
    cfg.worldmodel.gng.seed = seed;
    auto m = harness::train_world_model(s, cfg);
    return {std::move(s), cfg, std::move(m)};
  }
  FAIL("no map with a jammer on the tour");
  return {};
}

}  // namespace

TEST_CASE("enumerate_candidates examples") {
  const auto d = grid_dict(10);
  const std::vector<int> three{0, 1, 2};
  const auto c3 = enumerate_candidates(three, d, 16, 0, 1);
  CHECK(c3.size() == 2);
  for (const auto& w : c3) CHECK(w.front() == 0);
  CHECK(c3[0] != c3[1]);

  const auto ten = iota(10);
  const auto c10 = enumerate_candidates(ten, d, 16, 4, 9);
  CHECK(c10.size() <= 16);
  CHECK(c10.size() >= 2);
  for (const auto& w : c10) {
    CHECK(w.front() == 4);
    CHECK(mission::is_permutation_tour({w, true}, 10));
  }
  auto sorted = c10;
  std::sort(sorted.begin(), sorted.end());
  CHECK(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end());
  CHECK(enumerate_candidates(ten, d, 16, 4, 9) == c10);

  const auto five = iota(5);
  CHECK(enumerate_candidates(five, d, 3, 2, 0).size() == 24);
  const std::vector<int> one{0};
  CHECK_THROWS_AS(enumerate_candidates(one, d, 16, 0, 0), Error);
}

TEST_CASE("predict_plan_cost examples") {
  wm::Dictionary1 d = grid_dict(3);
  d.edges[{0, 1}] = {10.0, 1.0};
  d.edges[{1, 2}] = {20.0, 4.0};
  const std::vector<int> one_edge{0, 1};
  const auto b1 = predict_plan_cost(one_edge, d, false);
  CHECK(b1.mean == 10.0);
  CHECK(b1.variance == 1.0);
  const std::vector<int> two_edges{0, 1, 2};
  const auto b2 = predict_plan_cost(two_edges, d, false);
  CHECK(b2.mean == 30.0);
  CHECK(b2.variance == 5.0);
}

TEST_CASE("plan cost mean equals tour cost on the mean graph") {
  const auto d = grid_dict(8);
  mission::CostGraph g;
  g.n = 8;
  g.cost.assign(64, 0.0);
  for (int i = 0; i < 8; ++i) {
    for (int j = 0; j < 8; ++j) {
      if (i != j) g.cost[static_cast<std::size_t>(i * 8 + j)] = d.edge_belief(i, j).mean;
    }
  }
  Rng rng(6);
  for (int k = 0; k < 50; ++k) {
    auto w = iota(8);
    for (std::size_t i = w.size() - 1; i > 0; --i) std::swap(w[i], w[rng.index(i + 1)]);
    CHECK(predict_plan_cost(w, d).mean == doctest::Approx(mission::tour_cost({w, true}, g)).epsilon(1e-12));
  }
}

TEST_CASE("plan abnormality") {
  const wm::GaussianBelief ref{100.0, 25.0};
  CHECK(plan_abnormality(ref, ref) == 0.0);
  double prev = 0.0;
  for (double gap = 1.0; gap <= 50.0; gap += 1.0) {
    const double a = plan_abnormality({100.0 + gap, 25.0}, ref);
    CHECK(a > prev);
    CHECK(a == wm::gaussian_kl({100.0 + gap, 25.0}, ref));
    prev = a;
  }
}

TEST_CASE("select_plan examples") {
  const wm::GaussianBelief ref{100.0, 4.0};
  std::vector<PlanCandidate> cs{{{0, 2, 1}, {120.0, 4.0}, 0.0},
                                {{0, 1, 2}, ref, 0.0},
                                {{0, 1, 3, 2}, {90.0, 9.0}, 0.0}};
  for (auto& c : cs) c.abnormality = plan_abnormality(c.predicted_cost, ref);
  CHECK(select_plan(cs).word == std::vector<int>{0, 1, 2});
  CHECK(select_plan(cs).abnormality == 0.0);

  std::vector<PlanCandidate> ordered{{{0, 1}, {1, 1}, 0.5}, {{0, 2}, {1, 1}, 1.5}, {{0, 3}, {1, 1}, 2.5}};
  CHECK(select_plan(ordered).word == std::vector<int>{0, 1});

  // Ties: lower mean, then lexicographic.
  std::vector<PlanCandidate> ties{{{0, 3}, {5, 1}, 1.0}, {{0, 2}, {4, 1}, 1.0}, {{0, 1}, {4, 1}, 1.0}};
  CHECK(select_plan(ties).word == std::vector<int>{0, 1});
  std::vector<PlanCandidate> empty;
  CHECK_THROWS_AS(select_plan(empty), Error);
}

TEST_CASE("select_plan is invariant under permutation and shifts") {
  Rng rng(13);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<PlanCandidate> cs;
    for (int k = 0; k < 6; ++k) {
      cs.push_back({{0, k + 1}, {std::floor(rng.uniform(0, 3)), 1.0}, std::floor(rng.uniform(0, 3))});
    }
    const auto pick = select_plan(cs).word;
    auto shuffled = cs;
    for (std::size_t i = shuffled.size() - 1; i > 0; --i) std::swap(shuffled[i], shuffled[rng.index(i + 1)]);
    CHECK(select_plan(shuffled).word == pick);
    for (auto& c : shuffled) c.abnormality += 7.0;
    CHECK(select_plan(shuffled).word == pick);
  }
}

TEST_CASE("noise-free attractor step") {
  KalmanState s;
  s.mean = {3.0, -2.0};
  s.attractor_gain = 0.5;
  s.process_noise.setZero();
  s.measurement_noise.setZero();
  const auto n = attractor_step(s, Vec2(10, 0), 0.1, 1);
  CHECK(n.mean.x() - s.mean.x() == 0.5);
  CHECK(n.mean.y() - s.mean.y() == 0.0);
  const auto z = attractor_step(s, Vec2(0, 0), 0.1, 2);
  CHECK(z.mean == s.mean);
  CHECK_THROWS_AS(attractor_step(s, Vec2(1, 0), 0.0, 1), Error);
  auto bad = s;
  bad.process_noise << 1.0, 0.0, 0.0, -1.0;
  CHECK_THROWS_AS(attractor_step(bad, Vec2(1, 0), 0.1, 1), Error);
}

TEST_CASE("noisy attractor displacement averages to the control") {
  KalmanState s;
  s.mean = {0.0, 0.0};
  s.covariance = Eigen::Matrix2d::Identity() * 0.25;
  Rng rng(99);
  Vec2 truth = s.mean;
  const Vec2 letter(10.0, 4.0);
  const int n = 1000;
  std::vector<Vec2> steps;
  for (int i = 0; i < n; ++i) {
    const auto next = attractor_step(s, truth, letter, 0.1, rng);
    steps.push_back(next.mean - s.mean);
    s = next;
  }
  for (int c = 0; c < 2; ++c) {
    double m = 0.0;
    for (const auto& d : steps) m += d[c];
    m /= n;
    double v = 0.0;
    for (const auto& d : steps) v += (d[c] - m) * (d[c] - m);
    const double se = std::sqrt(v / (n - 1) / n);
    CHECK(std::abs(m - 0.5 * letter[c] * 0.1) < 3.0 * se);
  }
}

TEST_CASE("signal abnormality") {
  const wm::SignalLetter l{{40.0, 0.0}, {0.25, 0.5}, wm::SignalLabel::Nominal};
  CHECK(signal_abnormality({40.0, 0.0}, l) == 0.0);
  CHECK(signal_abnormality({40.0, 1.3}, l) == signal_abnormality({40.0, -1.3}, l));
  Rng rng(4);
  std::vector<double> nominal;
  for (int i = 0; i < 10000; ++i) {
    nominal.push_back(signal_abnormality({40.0 + 0.5 * rng.normal(), std::sqrt(0.5) * rng.normal()}, l));
  }
  std::sort(nominal.begin(), nominal.end());
  const double p99 = nominal[nominal.size() * 99 / 100];
  CHECK(signal_abnormality({20.0, 0.0}, l) > p99);
}

TEST_CASE("particle scoring finds the true source") {
  const std::vector<loc::Source> truth{{{430.0, 610.0}, 0}};
  const auto pb = square_problem({450, 600}, 120, truth);
  std::vector<loc::Particle> ps;
  Rng rng(2);
  for (int i = 0; i < 60; ++i) ps.push_back({{rng.uniform(0, 1000), rng.uniform(0, 1000)}, 0, 0.0});
  ps.insert(ps.begin() + 17, loc::Particle{truth[0].pos, 0, 0.0});
  loc::score_particles(pb, {}, ps);
  CHECK(loc::best_particle(ps) == 17);
  CHECK(ps[17].abnormality == doctest::Approx(0.0).epsilon(1e-12));

  // Far particles barely change the trace: the truth wins by a wide margin.
  std::vector<loc::Particle> far{{{5000.0, 5000.0}, 0, 0.0}, {{-4000.0, 6000.0}, 0, 0.0},
                                 {truth[0].pos, 0, 0.0}};
  loc::score_particles(pb, {}, far);
  CHECK(loc::best_particle(far) == 2);
  const double runner_gap = std::abs(far[0].abnormality - far[1].abnormality);
  CHECK(far[0].abnormality - far[2].abnormality > 10.0 * runner_gap);

  std::vector<loc::Particle> twins{{{300.0, 300.0}, 0, 0.0}, {{300.0, 300.0}, 0, 0.0}};
  loc::score_particles(pb, {}, twins);
  CHECK(loc::best_particle(twins) == 0);
}

TEST_CASE("infer_jammer lands near the source") {
  const std::vector<loc::Source> truth{{{430.0, 610.0}, 0}};
  DetectionContext ctx;
  ctx.problem = square_problem({450, 600}, 120, truth);
  loc::ParticleParams pp;
  CHECK_THROWS_AS(infer_jammer(ctx, pp), Error);
  ctx.triggered = true;
  const auto inf = infer_jammer(ctx, pp);
  CHECK((inf.best.pos - truth[0].pos).norm() <= pp.pitch);
  for (const auto& p : inf.particles) CHECK(p.abnormality >= inf.best.abnormality);
}

TEST_CASE("anti-jamming word selection") {
  const auto t = one_jammer_on_a_leg();
  const auto* token = t.model.token(1);
  REQUIRE(token != nullptr);
  REQUIRE(!token->words.empty());
  const Obstacle ob{{500.0, 500.0}, token->radius};
  const std::vector<Obstacle> all{ob};
  const Vec2 uav(500.0 - 150.0, 500.0), wp(500.0 + 200.0, 500.0);
  const double dt = t.model.dt;
  ConstScorer scorer;
  const auto c = select_antijam_word(ob, *token, all, uav, wp, 5.0, dt, 1.0, scorer);
  REQUIRE(c.has_value());
  for (const auto& p : c->rollout) CHECK((p - ob.center).norm() >= token->radius);
  const auto again = select_antijam_word(ob, *token, all, uav, wp, 5.0, dt, 1.0, scorer);
  CHECK(again->word_index == c->word_index);
  CHECK(again->score == c->score);

  wm::Token single = *token;
  single.words = {token->words[c->word_index]};
  const auto s = select_antijam_word(ob, single, all, uav, wp, 5.0, dt, 1.0, scorer);
  REQUIRE(s.has_value());
  CHECK(s->word_index == 0);

  wm::Token empty = *token;
  empty.words.clear();
  CHECK_FALSE(select_antijam_word(ob, empty, all, uav, wp, 5.0, dt, 1.0, scorer).has_value());
}

TEST_CASE("jam-free mission follows the selected word") {
  config::ExperimentConfig cfg;
  const auto seed = harness::scenario_seed(1, 5, 0, 0);
  auto s = harness::make_scenario(cfg, 5, 0, seed);
  // Train on a jammed copy of the regions, fly the quiet map.
  auto with = mission::regenerate_jammers(s, cfg.generator, 2, 17);
  cfg.planner.seed = seed;
  cfg.worldmodel.gng.seed = seed;
  const auto m = harness::train_world_model(with, cfg);
  const auto r = run_mission(s, m, cfg.planner);
  CHECK(r.completed);
  CHECK(r.total_interference == 0.0);
  CHECK(r.visited_order == r.planned_order);
  CHECK(mission::is_permutation_tour({r.planned_order, true}, 5));

  auto quiet = cfg.planner;
  quiet.process_noise = 0.0;
  quiet.measurement_noise = 0.0;
  const auto q = run_mission(s, m, quiet);
  CHECK(q.completed);
  for (const auto& reg : s.regions) {
    double best = 1e18;
    for (const auto& p : q.trajectory) best = std::min(best, channel::horizontal_distance(p, reg.position));
    CHECK(best <= s.step + 1e-9);
  }
}

TEST_CASE("single jammer on a leg is detected and localized") {
  const auto t = one_jammer_on_a_leg();
  const auto r = run_mission(t.scenario, t.model, t.cfg.planner);
  CHECK(r.triggered);
  CHECK(r.completed);
  REQUIRE(r.jammer_rmse.has_value());
  CHECK(*r.jammer_rmse < 20.0);
  CHECK(r.jammer_misses == 0);
  const auto again = run_mission(t.scenario, t.model, t.cfg.planner);
  CHECK(io::to_json(again).dump() == io::to_json(r).dump());
}

TEST_CASE("rmse examples") {
  const std::vector<Vec2> truths{{100, 100}, {500, 500}};
  CHECK(rmse(truths, truths).rmse == 0.0);
  const std::vector<Vec2> one_t{{0, 0}}, one_e{{30, 0}};
  CHECK(rmse(one_e, one_t).rmse == doctest::Approx(30.0));
  const std::vector<Vec2> est{{110, 100}, {500, 520}};
  const auto r = rmse(est, truths);
  CHECK(r.rmse == doctest::Approx(std::sqrt(250.0)));
  CHECK(r.matched == 2);
  CHECK(r.misses == 0);
  const auto miss = rmse(one_e, truths);
  CHECK(miss.matched == 1);
  CHECK(miss.misses == 1);
}
