#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "antijam/error.hpp"
#include "antijam/mission.hpp"
#include "antijam/rng.hpp"
#include "antijam/serialization.hpp"

using namespace antijam;
using namespace antijam::mission;

namespace {

Scenario flat(double altitude, std::vector<std::pair<double, double>> pts) {
  Scenario s;
  s.side = 1000.0;
  s.altitude = altitude;
  s.step = 1.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    s.regions.push_back({static_cast<int>(i), {pts[i].first, pts[i].second, 0.0}});
  }
  s.cbs = {0, 0, 0};
  return s;
}

channel::Jammer jammer(double x, double y, double r = 50.0, double p = 1.0) {
  channel::Jammer j;
  j.position = {x, y, 0};
  j.radius = r;
  j.power = p;
  return j;
}

}  // namespace

TEST_CASE("scenario generation is deterministic") {
  GeneratorConfig g;
  g.n_regions = 6;
  g.n_jammers = 3;
  const auto a = io::to_json(generate_scenario(g, 42)).dump();
  const auto b = io::to_json(generate_scenario(g, 42)).dump();
  CHECK(a == b);
  CHECK(a != io::to_json(generate_scenario(g, 43)).dump());
}

TEST_CASE("zero jammers gives a valid scenario") {
  GeneratorConfig g;
  g.n_jammers = 0;
  const auto s = generate_scenario(g, 1);
  CHECK(s.jammers.empty());
  CHECK_NOTHROW(s.validate());
  CHECK(s.regions.size() == 6);
}

TEST_CASE("generated coordinates stay in the arena and regions are separated") {
  GeneratorConfig g;
  g.n_regions = 10;
  g.n_jammers = 5;
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    const auto s = generate_scenario(g, seed);
    for (const auto& r : s.regions) {
      CHECK(r.position.x >= 0.0);
      CHECK(r.position.x <= s.side);
      CHECK(r.position.y >= 0.0);
      CHECK(r.position.y <= s.side);
    }
    for (const auto& j : s.jammers) {
      CHECK(j.position.x >= 0.0);
      CHECK(j.position.y <= s.side);
    }
    for (std::size_t i = 0; i < s.regions.size(); ++i) {
      for (std::size_t k = i + 1; k < s.regions.size(); ++k) {
        CHECK(channel::horizontal_distance(s.regions[i].position, s.regions[k].position) >= 110.0 - 1e-9);
      }
    }
  }
}

TEST_CASE("region x coordinates average to half the side") {
  GeneratorConfig g;
  g.n_regions = 2;
  g.n_jammers = 0;
  double sum = 0.0;
  int n = 0;
  for (std::uint64_t seed = 0; seed < 5000; ++seed) {
    for (const auto& r : generate_scenario(g, seed).regions) {
      sum += r.position.x;
      ++n;
    }
  }
  const double se = g.side / std::sqrt(12.0) / std::sqrt(static_cast<double>(n));
  CHECK(std::abs(sum / n - g.side / 2) < 3.0 * se);
}

TEST_CASE("infeasible separation fails after bounded retries") {
  GeneratorConfig g;
  g.side = 100.0;
  g.n_regions = 10;
  g.max_retries = 50;
  CHECK_THROWS_AS(generate_scenario(g, 1), Error);
}

TEST_CASE("segment interference examples") {
  auto s = flat(200.0, {{0, 0}, {1000, 0}});
  CHECK(segment_interference({0, 500, 200}, {1000, 500, 200}, {}, s) == 0.0);
  const std::vector<channel::Jammer> far{jammer(500, 900)};
  CHECK(segment_interference({0, 500, 200}, {1000, 500, 200}, far, s) == 0.0);

  const std::vector<channel::Jammer> one{jammer(500, 510)};
  const double coarse = segment_interference({0, 500, 200}, {1000, 500, 200}, one, s);
  CHECK(coarse > 0.0);
  // Fine 0.1 m integration rescaled to 1 m samples.
  double fine = 0.0;
  for (int k = 0; k <= 10000; ++k) {
    const channel::Position p{0.1 * k, 500, 200};
    fine += interference_at(p, one, s.channel) * 0.1;
  }
  CHECK(std::abs(coarse - fine) <= 0.05 * fine);
}

TEST_CASE("edge cost examples") {
  auto s = flat(0.0, {{0, 0}, {3, 4}});
  CHECK(edge_cost(s.regions[0], s.regions[1], Hypothesis::H0, s, 1e6) == doctest::Approx(5.0));

  auto t = flat(200.0, {{0, 0}, {1e-6, 0}});
  CHECK(edge_cost(t.regions[0], t.regions[1], Hypothesis::H0, t, 1e6) == doctest::Approx(200.0));

  auto u = flat(200.0, {{100, 500}, {900, 500}});
  u.jammers.push_back(jammer(500, 500));
  CHECK(edge_cost(u.regions[0], u.regions[1], Hypothesis::H1, u, 1e6) >
        edge_cost(u.regions[0], u.regions[1], Hypothesis::H0, u, 1e6));
}

TEST_CASE("H1 edge cost never below H0 and H0 graph is symmetric") {
  GeneratorConfig g;
  g.n_regions = 6;
  g.n_jammers = 4;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto s = generate_scenario(g, seed);
    const auto h0 = build_cost_graph(s, Hypothesis::H0, 1e6);
    const auto h1 = build_cost_graph(s, Hypothesis::H1, 1e6);
    for (int i = 0; i < h0.n; ++i) {
      CHECK(h0.at(i, i) == 0.0);
      for (int j = 0; j < h0.n; ++j) {
        CHECK(h0.at(i, j) == h0.at(j, i));
        CHECK(h1.at(i, j) >= h0.at(i, j));
      }
    }
  }
}

TEST_CASE("tour cost examples") {
  auto sq = flat(0.0, {{0, 0}, {1, 0}, {1, 1}, {0, 1}});
  const auto g = build_cost_graph(sq, Hypothesis::H0, 1e6);
  CHECK(tour_cost({{0, 1, 2, 3}, true}, g) == doctest::Approx(4.0));

  auto two = flat(0.0, {{0, 0}, {7, 0}});
  const auto g2 = build_cost_graph(two, Hypothesis::H0, 1e6);
  CHECK(tour_cost({{0, 1}, true}, g2) == doctest::Approx(14.0));

  CHECK_THROWS_AS(tour_cost({{0, 1, 1, 3}, true}, g), Error);
  CHECK_THROWS_AS(tour_cost({{0, 1, 2}, true}, g), Error);
}

TEST_CASE("tour cost matches independent summation and is rotation invariant") {
  GeneratorConfig gc;
  gc.n_regions = 6;
  gc.n_jammers = 2;
  Rng rng(9);
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto s = generate_scenario(gc, seed);
    const auto g = build_cost_graph(s, Hypothesis::H1, 1e6);
    std::vector<int> order(6);
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t i = order.size() - 1; i > 0; --i) std::swap(order[i], order[rng.index(i + 1)]);
    double manual = 0.0;
    for (std::size_t i = 0; i < order.size(); ++i) manual += g.at(order[i], order[(i + 1) % order.size()]);
    const Tour t{order, true};
    CHECK(tour_cost(t, g) == doctest::Approx(manual).epsilon(1e-12));
    CHECK(tour_cost(rotate_to(t, order[3]), g) == doctest::Approx(manual).epsilon(1e-12));
    double open = manual - g.at(order.back(), order.front());
    CHECK(tour_cost({order, false}, g) == doctest::Approx(open).epsilon(1e-12));
  }
}

TEST_CASE("permutation check") {
  CHECK(is_permutation_tour({{2, 0, 1}, true}, 3));
  CHECK_FALSE(is_permutation_tour({{2, 0, 0}, true}, 3));
  CHECK_FALSE(is_permutation_tour({{0, 1, 3}, true}, 3));
  CHECK_FALSE(is_permutation_tour({{0, 1}, true}, 3));
}

TEST_CASE("mission objective examples") {
  auto s = flat(0.0, {{0, 0}, {3, 4}, {6, 0}});
  s.cbs = {500, 500, 0};
  const Tour t{{0, 1, 2}, true};
  const std::vector<Position> traj{{0, 0, 0}, {3, 4, 0}, {6, 0, 0}, {0, 0, 0}};
  const auto o = mission_objective(traj, t, s, 2.0, 0.0);
  CHECK(o.value == doctest::Approx(2.0 * tour_cost(t, build_cost_graph(s, Hypothesis::H0, 1e6))));
  CHECK(mission_objective(traj, t, s, 0.0, 5.0).value == 0.0);
}

TEST_CASE("mission objective on a scripted path through one disk") {
  auto s = flat(200.0, {{0, 500}, {1000, 500}});
  s.jammers.push_back(jammer(500, 500, 50.0, 1.0));
  std::vector<Position> traj;
  for (int x = 440; x <= 560; x += 10) traj.push_back({double(x), 500, 200});
  const Tour t{{0, 1}, true};
  double hand = 0.0;
  for (int x = 440; x <= 560; x += 10) {
    const double dx = x - 500.0;
    if (std::abs(dx) <= 50.0) hand += 1.0 / (dx * dx + 200.0 * 200.0);
  }
  const double dist = 2.0 * std::sqrt(1000.0 * 1000.0 + 200.0 * 200.0);
  const auto o = mission_objective(traj, t, s, 1.0, 1e6);
  CHECK(o.interference_term == doctest::Approx(hand).epsilon(1e-12));
  CHECK(o.distance_term == doctest::Approx(dist).epsilon(1e-12));
  CHECK(o.value == doctest::Approx(dist + 1e6 * hand).epsilon(1e-12));
  CHECK(o.sinr_constraint_held);
  CHECK_FALSE(mission_objective(traj, t, s, 1.0, 1e6, 1e12).sinr_constraint_held);
}

TEST_CASE("segment interference is additive under splitting at a sample") {
  auto s = flat(200.0, {{0, 0}, {1000, 0}});
  const std::vector<channel::Jammer> js{jammer(300, 510), jammer(620, 480)};
  const channel::Position a{0, 500, 200}, m{400, 500, 200}, b{1000, 500, 200};
  const double whole = segment_interference(a, b, js, s);
  const double parts = segment_interference(a, m, js, s) + segment_interference(m, b, js, s);
  const double shared = interference_at(m, js, s.channel);
  CHECK(std::abs(whole - (parts - shared)) <= 1e-9 * whole + shared);
}
