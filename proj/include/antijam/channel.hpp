#pragma once

#include <span>
#include <variant>

namespace antijam::channel {

struct Position {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;  // altitude, meters
};

double distance(const Position& a, const Position& b);
double horizontal_distance(const Position& a, const Position& b);

struct FixedLos {
  double p_los = 0.9;
};

// Elevation-angle dependent LoS probability with urban parameters phi, psi.
struct ElevationSigmoidLos {
  double phi = 150.0;
  double psi = 15.0;
};

using LosModel = std::variant<FixedLos, ElevationSigmoidLos>;

struct ChannelParams {
  double pathloss_exponent = 2.0;
  double beta_los = 0.0;   // linear gain
  double beta_nlos = 0.0;  // linear gain
  double cbs_power = 1.0;  // W
  double noise_power = 1e-12;  // W
  LosModel los_model = FixedLos{};

  // 1 dB / 20 dB intercept attenuation, fixed 0.9 LoS, unit exponent 2.
  static ChannelParams defaults();
  void validate() const;
};

// Intercepts are configured as attenuation in dB; beta = 10^(-dB/10).
double attenuation_db_to_gain(double attenuation_db);
double gain_to_attenuation_db(double gain);

struct Jammer {
  Position position;    // ground, z = 0
  double power = 1.0;   // W
  double radius = 50.0; // m
  int type_id = 1;
};

double los_probability(const ChannelParams& params, const Position& cbs, const Position& uav);
double path_loss(const ChannelParams& params, double distance, bool is_los);
double jamming_power(const Jammer& jammer, const Position& uav, const ChannelParams& params);
double total_jamming_power(std::span<const Jammer> jammers, const Position& uav,
                           const ChannelParams& params);

// Received CBS power with the expected LoS/NLoS mixture (numerator of the SINR).
double signal_power(const ChannelParams& params, const Position& cbs, const Position& uav);

double sinr(const ChannelParams& params, const Position& cbs, const Position& uav,
            std::span<const Jammer> jammers);

int in_jammer_range(const Jammer& jammer, const Position& uav, double threshold);

// Slant-range threshold that makes a 3D distance test equivalent to being
// above the jammer's ground disk of radius r at the UAV altitude.
double interference_threshold(const Jammer& jammer, double altitude);

double to_db(double linear);
double from_db(double db);

}  // namespace antijam::channel
