#include "antijam/channel.hpp"

#include <cmath>
#include <algorithm>
#include <numbers>

#include "antijam/error.hpp"

namespace antijam::channel {

double distance(const Position& a, const Position& b) {
  const double dx = a.x - b.x, dy = a.y - b.y, dz = a.z - b.z;
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

double horizontal_distance(const Position& a, const Position& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

double attenuation_db_to_gain(double attenuation_db) {
  return std::pow(10.0, -attenuation_db / 10.0);
}

double gain_to_attenuation_db(double gain) { return -10.0 * std::log10(gain); }

ChannelParams ChannelParams::defaults() {
  ChannelParams p;
  p.pathloss_exponent = 2.0;
  p.beta_los = attenuation_db_to_gain(1.0);
  p.beta_nlos = attenuation_db_to_gain(20.0);
  p.cbs_power = 1.0;
  p.noise_power = 1e-12;
  p.los_model = FixedLos{0.9};
  return p;
}

void ChannelParams::validate() const {
  require(std::isfinite(pathloss_exponent) && pathloss_exponent > 0.0,
          "pathloss_exponent must be > 0");
  require(beta_los > 0.0 && beta_nlos > 0.0, "beta gains must be > 0");
  require(cbs_power > 0.0, "cbs_power must be > 0");
  require(noise_power > 0.0, "noise_power must be > 0");
  if (const auto* f = std::get_if<FixedLos>(&los_model)) {
    require(f->p_los >= 0.0 && f->p_los <= 1.0, "p_los must lie in [0, 1]");
  }
}

double los_probability(const ChannelParams& params, const Position& cbs, const Position& uav) {
  if (const auto* f = std::get_if<FixedLos>(&params.los_model)) return f->p_los;

  const auto& s = std::get<ElevationSigmoidLos>(params.los_model);
  const double d = distance(cbs, uav);
  if (d <= 0.0) fail(ErrorCode::Geometry, "coincident positions");
  require(uav.z > 0.0, "elevation LoS model needs a UAV above ground");
  const double ratio = std::clamp((uav.z - cbs.z) / d, -1.0, 1.0);
  const double theta_deg = 180.0 / std::numbers::pi * std::asin(ratio);
  // exp() overflows to inf for very negative elevations; 1/(1+inf) is 0.
  const double p = 1.0 / (1.0 + s.phi * std::exp(-s.psi * (theta_deg - s.phi)));
  return std::clamp(p, 0.0, 1.0);
}

double path_loss(const ChannelParams& params, double distance, bool is_los) {
  if (!(distance > 0.0)) fail(ErrorCode::Geometry, "path_loss needs a positive distance");
  const double beta = is_los ? params.beta_los : params.beta_nlos;
  return beta * std::pow(distance, -params.pathloss_exponent);
}

double jamming_power(const Jammer& jammer, const Position& uav, const ChannelParams& params) {
  const double d = distance(jammer.position, uav);
  if (!(d > 0.0)) fail(ErrorCode::Geometry, "coincident positions");
  return jammer.power * std::pow(d, -params.pathloss_exponent);
}

double total_jamming_power(std::span<const Jammer> jammers, const Position& uav,
                           const ChannelParams& params) {
  double sum = 0.0;
  for (const auto& j : jammers) sum += jamming_power(j, uav, params);
  return sum;
}

double signal_power(const ChannelParams& params, const Position& cbs, const Position& uav) {
  const double d = distance(cbs, uav);
  if (!(d > 0.0)) fail(ErrorCode::Geometry, "coincident positions");
  const double p_los = los_probability(params, cbs, uav);
  const double mix = p_los * params.beta_los + (1.0 - p_los) * params.beta_nlos;
  return params.cbs_power * mix * std::pow(d, -params.pathloss_exponent);
}

double sinr(const ChannelParams& params, const Position& cbs, const Position& uav,
            std::span<const Jammer> jammers) {
  return signal_power(params, cbs, uav) /
         (total_jamming_power(jammers, uav, params) + params.noise_power);
}

int in_jammer_range(const Jammer& jammer, const Position& uav, double threshold) {
  require(threshold > 0.0, "threshold must be > 0");
  return distance(jammer.position, uav) <= threshold ? 1 : 0;
}

double interference_threshold(const Jammer& jammer, double altitude) {
  const double dz = altitude - jammer.position.z;
  return std::sqrt(jammer.radius * jammer.radius + dz * dz);
}

double to_db(double linear) { return 10.0 * std::log10(linear); }
double from_db(double db) { return std::pow(10.0, db / 10.0); }

}  // namespace antijam::channel
