#include <doctest.h>

#include <cmath>
#include <vector>

#include "antijam/channel.hpp"
#include "antijam/error.hpp"
#include "antijam/rng.hpp"

using namespace antijam;
using namespace antijam::channel;

namespace {

ChannelParams unit_params() {
  ChannelParams p;
  p.pathloss_exponent = 2.0;
  p.beta_los = 1.0;
  p.beta_nlos = 1.0;
  p.cbs_power = 1.0;
  p.noise_power = 1e-12;
  p.los_model = FixedLos{1.0};
  return p;
}

}  // namespace

TEST_CASE("fixed LoS probability is returned as configured") {
  auto p = unit_params();
  p.los_model = FixedLos{0.9};
  CHECK(los_probability(p, {0, 0, 0}, {10, 20, 200}) == 0.9);
  CHECK(los_probability(p, {0, 0, 0}, {500, 20, 200}) == 0.9);
  p.los_model = FixedLos{1.0};
  CHECK(los_probability(p, {0, 0, 0}, {3, 4, 5}) == 1.0);
}

TEST_CASE("elevation sigmoid underflows to zero straight above the CBS") {
  auto p = unit_params();
  p.los_model = ElevationSigmoidLos{150.0, 15.0};
  const double v = los_probability(p, {0, 0, 0}, {0, 0, 200});
  const double expected = 1.0 / (1.0 + 150.0 * std::exp(-15.0 * (90.0 - 150.0)));
  CHECK(v == doctest::Approx(expected));
  CHECK(v < 1e-300);
  CHECK(v >= 0.0);
}

TEST_CASE("coincident CBS and UAV are rejected by the elevation model") {
  auto p = unit_params();
  p.los_model = ElevationSigmoidLos{};
  CHECK_THROWS_AS(los_probability(p, {1, 1, 5}, {1, 1, 5}), Error);
}

TEST_CASE("path loss examples") {
  auto p = unit_params();
  CHECK(path_loss(p, 1.0, true) == 1.0);
  CHECK(path_loss(p, 100.0, true) == doctest::Approx(1e-4).epsilon(1e-12));
  p.beta_nlos = attenuation_db_to_gain(20.0);
  CHECK(p.beta_nlos == doctest::Approx(0.01));
  CHECK(path_loss(p, 10.0, false) == doctest::Approx(1e-4).epsilon(1e-12));
  CHECK_THROWS_AS(path_loss(p, 0.0, true), Error);
  CHECK_THROWS_AS(path_loss(p, -3.0, true), Error);
}

TEST_CASE("dB intercepts convert to linear gains") {
  CHECK(attenuation_db_to_gain(1.0) == doctest::Approx(0.7943282347));
  CHECK(gain_to_attenuation_db(attenuation_db_to_gain(20.0)) == doctest::Approx(20.0));
  const auto d = ChannelParams::defaults();
  CHECK(d.beta_los == doctest::Approx(0.7943282347));
  CHECK(d.beta_nlos == doctest::Approx(0.01));
  CHECK(d.noise_power == 1e-12);
  CHECK(std::get<FixedLos>(d.los_model).p_los == 0.9);
}

TEST_CASE("path loss is strictly decreasing in distance") {
  Rng rng(7);
  for (int i = 0; i < 1000; ++i) {
    auto p = unit_params();
    p.pathloss_exponent = rng.uniform(0.5, 4.0);
    const double a = rng.uniform(0.1, 1000.0);
    const double b = a + rng.uniform(1e-3, 100.0);
    CHECK(path_loss(p, a, true) > path_loss(p, b, true));
  }
}

TEST_CASE("jamming power examples") {
  const auto p = unit_params();
  Jammer j;
  j.position = {100, 100, 0};
  j.power = 1.0;
  CHECK(jamming_power(j, {100, 100, 50}, p) == doctest::Approx(4e-4).epsilon(1e-12));
  j.power = 0.25;
  CHECK(jamming_power(j, {130, 140, 0.0 + 1e-300}, p) == doctest::Approx(1e-4).epsilon(1e-9));
}

TEST_CASE("joint jamming power equals the sum of single calls") {
  const auto p = ChannelParams::defaults();
  Rng rng(3);
  for (int i = 0; i < 200; ++i) {
    std::vector<Jammer> js(3);
    for (auto& j : js) {
      j.position = {rng.uniform(0, 1000), rng.uniform(0, 1000), 0};
      j.power = rng.uniform(0.1, 2.0);
    }
    const Position uav{rng.uniform(0, 1000), rng.uniform(0, 1000), 200};
    double sum = 0.0;
    for (const auto& j : js) sum += jamming_power(j, uav, p);
    CHECK(std::abs(total_jamming_power(js, uav, p) - sum) <= 1e-12 * sum);
  }
}

TEST_CASE("SINR without jammers at 200 m") {
  const auto p = unit_params();
  const double g = sinr(p, {0, 0, 0}, {0, 0, 200}, {});
  CHECK(g == doctest::Approx(2.5e7).epsilon(1e-12));
  CHECK(to_db(g) == doctest::Approx(73.98).epsilon(1e-3));
}

TEST_CASE("a jammer matching the noise floor halves the SINR") {
  const auto p = unit_params();
  const Position cbs{0, 0, 0}, uav{0, 0, 200};
  Jammer j;
  j.position = {0, 1000, 0};
  const double d2 = 1000.0 * 1000.0 + 200.0 * 200.0;
  j.power = p.noise_power * d2;  // I_j = sigma^2
  CHECK(sinr(p, cbs, uav, std::vector<Jammer>{j}) ==
        doctest::Approx(0.5 * sinr(p, cbs, uav, {})).epsilon(1e-12));
}

TEST_CASE("SINR decreases while approaching a jammer radially") {
  const auto p = ChannelParams::defaults();
  const Position cbs{0, 0, 0};
  Jammer j;
  j.position = {500, 500, 0};
  // Moving on the circle of radius 400 around the CBS keeps d_bu fixed.
  double prev = 0.0;
  bool first = true;
  for (double ang = 0.0; ang <= M_PI / 4 + 1e-12; ang += M_PI / 200) {
    const Position uav{400 * std::cos(ang), 400 * std::sin(ang), 200};
    const double g = sinr(p, cbs, uav, std::vector<Jammer>{j});
    if (!first) CHECK(g < prev);
    prev = g;
    first = false;
  }
}

TEST_CASE("jammers never raise the SINR") {
  const auto p = ChannelParams::defaults();
  Rng rng(11);
  for (int i = 0; i < 300; ++i) {
    Jammer j;
    j.position = {rng.uniform(0, 1000), rng.uniform(0, 1000), 0};
    const Position uav{rng.uniform(0, 1000), rng.uniform(0, 1000), 200};
    CHECK(sinr(p, {500, 500, 0}, uav, {}) >= sinr(p, {500, 500, 0}, uav, std::vector<Jammer>{j}));
  }
}

TEST_CASE("in_jammer_range is inclusive at the threshold") {
  Jammer j;
  j.position = {0, 0, 0};
  CHECK(in_jammer_range(j, {30, 40, 0}, 50.0) == 1);
  CHECK(in_jammer_range(j, {30, 40 + 1e-9, 0}, 50.0) == 0);
  CHECK(in_jammer_range(j, {0, 0, 60}, 50.0) == 0);
  CHECK(in_jammer_range(j, {0, 0, 60}, 59.999) == 0);
  CHECK_THROWS_AS(in_jammer_range(j, {0, 0, 1}, 0.0), Error);
}

TEST_CASE("slant threshold matches the ground disk at altitude") {
  Jammer j;
  j.position = {0, 0, 0};
  j.radius = 50.0;
  const double t = interference_threshold(j, 200.0);
  CHECK(in_jammer_range(j, {50, 0, 200}, t) == 1);
  CHECK(in_jammer_range(j, {50.001, 0, 200}, t) == 0);
}

TEST_CASE("LoS probability stays in [0,1]") {
  Rng rng(5);
  for (int i = 0; i < 1000; ++i) {
    auto p = unit_params();
    p.los_model = ElevationSigmoidLos{rng.uniform(1, 200), rng.uniform(0.01, 20)};
    const double v = los_probability(p, {0, 0, 0}, {rng.uniform(-1000, 1000), rng.uniform(-1000, 1000),
                                                    rng.uniform(1, 500)});
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
}

TEST_CASE("invalid channel parameters are rejected") {
  auto p = unit_params();
  p.noise_power = 0.0;
  CHECK_THROWS_AS(p.validate(), Error);
  p = unit_params();
  p.los_model = FixedLos{1.5};
  CHECK_THROWS_AS(p.validate(), Error);
  p = unit_params();
  p.pathloss_exponent = 0.0;
  CHECK_THROWS_AS(p.validate(), Error);
}
