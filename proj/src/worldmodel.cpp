#include "antijam/worldmodel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "antijam/error.hpp"

namespace antijam::wm {

double gaussian_kl(const GaussianBelief& p, const GaussianBelief& q) {
  if (p.mean == q.mean && p.variance == q.variance) return 0.0;
  const double d = p.mean - q.mean;
  const double kl =
      0.5 * std::log(q.variance / p.variance) + (p.variance + d * d) / (2.0 * q.variance) - 0.5;
  return std::max(0.0, kl);
}

double diagonal_kl(const Point2& mean_p, const Point2& var_p, const Point2& mean_q,
                   const Point2& var_q) {
  return gaussian_kl({mean_p[0], var_p[0]}, {mean_q[0], var_q[0]}) +
         gaussian_kl({mean_p[1], var_p[1]}, {mean_q[1], var_q[1]});
}

GaussianBelief Dictionary1::edge_belief(int n, int m) const {
  if (auto it = edges.find({n, m}); it != edges.end()) return it->second;
  if (auto it = edges.find({m, n}); it != edges.end()) return it->second;
  auto idx = [&](int id) {
    auto it = std::find(letters.begin(), letters.end(), id);
    if (it == letters.end()) fail(ErrorCode::NotFound, "unknown region " + std::to_string(id));
    return static_cast<std::size_t>(it - letters.begin());
  };
  const auto& a = positions[idx(n)];
  const auto& b = positions[idx(m)];
  const double dx = a[0] - b[0], dy = a[1] - b[1];
  const double mean = std::sqrt(dx * dx + dy * dy + altitude * altitude);
  return {mean, std::max(kVarianceFloor, 0.01 * mean * mean)};
}

std::size_t VelocityWord::length() const {
  std::size_t n = 0;
  for (const auto& l : letters) n += static_cast<std::size_t>(l.repeat);
  return n;
}

std::vector<std::array<double, 2>> VelocityWord::replay(double dt) const {
  std::vector<std::array<double, 2>> out{entry};
  std::array<double, 2> p = entry;
  for (const auto& l : letters) {
    for (int k = 0; k < l.repeat; ++k) {
      p[0] += l.v[0] * dt;
      p[1] += l.v[1] * dt;
      out.push_back(p);
    }
  }
  return out;
}

const Token* WorldModel::token(int type_id) const {
  for (const auto& t : dict2) {
    if (t.type_id == type_id) return &t;
  }
  return nullptr;
}

Dictionary1 learn_dictionary1(std::span<const Demonstration> d0) {
  require(!d0.empty(), "dictionary 1 needs a non-empty dataset");
  Dictionary1 d;
  std::map<std::pair<int, int>, std::vector<double>> samples;
  for (const auto& demo : d0) {
    require(demo.hypothesis == Hypothesis::H0, "dictionary 1 learns from H0 demonstrations");
    const std::size_t n = demo.order.size();
    require(n >= 2 && demo.edge_costs.size() == n && demo.leg_starts.size() == n,
            "malformed demonstration");
    for (std::size_t i = 0; i < n; ++i) {
      const int id = demo.order[i];
      const auto& p = demo.trajectory[demo.leg_starts[i]];
      if (std::find(d.letters.begin(), d.letters.end(), id) == d.letters.end()) {
        d.letters.push_back(id);
        d.positions.push_back({p.x, p.y});
        d.altitude = p.z;
      }
      const std::pair<int, int> key{id, demo.order[(i + 1) % n]};
      samples[key].push_back(demo.edge_costs[i]);
      ++d.transition_counts[key];
    }
    auto it = std::find(d.words.begin(), d.words.end(), demo.order);
    if (it == d.words.end()) {
      d.words.push_back(demo.order);
      d.word_counts.push_back(1);
    } else {
      ++d.word_counts[static_cast<std::size_t>(it - d.words.begin())];
    }
  }
  for (const auto& [key, xs] : samples) {
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= double(xs.size());
    double var = 0.0;
    for (double x : xs) var += (x - mean) * (x - mean);
    var = xs.size() > 1 ? var / double(xs.size() - 1) : 0.0;
    d.edges[key] = {mean, std::max(var, kVarianceFloor)};
  }
  return d;
}

namespace {

double quantize(double v, double q) { return std::round(v / q) * q; }

void push_letter(VelocityWord& w, std::array<double, 3> v, double q) {
  for (auto& c : v) c = quantize(c, q) + 0.0;  // +0.0 folds -0 into 0
  if (!w.letters.empty() && w.letters.back().v == v) {
    ++w.letters.back().repeat;
  } else {
    w.letters.push_back({v, 1});
  }
}

const mission::JammerType* match_type(std::span<const mission::JammerType> catalog, double radius,
                                      double power) {
  for (const auto& t : catalog) {
    if (std::abs(t.radius - radius) <= 1e-9 * std::max(1.0, radius) &&
        std::abs(t.power - power) <= 1e-9 * std::max(1.0, power)) {
      return &t;
    }
  }
  return nullptr;
}

}  // namespace

std::vector<Token> learn_dictionary2(std::span<const Demonstration> d0,
                                     std::span<const Demonstration> d1,
                                     std::span<const mission::JammerType> catalog, double quantum) {
  require(!d0.empty() && !d1.empty(), "dictionary 2 needs both datasets");
  require(quantum > 0.0, "quantum must be > 0");
  std::vector<Token> tokens(1);
  tokens[0].type_id = 0;
  for (const auto& demo : d0) {
    const std::size_t legs = demo.leg_starts.size();
    for (std::size_t i = 0; i < legs; ++i) {
      const std::size_t lo = demo.leg_starts[i];
      const std::size_t hi = i + 1 < legs ? demo.leg_starts[i + 1] : demo.velocity_letters.size();
      if (hi <= lo) continue;
      VelocityWord w;
      w.source = Hypothesis::H0;
      w.entry = {demo.trajectory[lo].x, demo.trajectory[lo].y};
      for (std::size_t k = lo; k < hi; ++k) push_letter(w, demo.velocity_letters[k], quantum);
      tokens[0].words.push_back(std::move(w));
    }
  }
  for (const auto& demo : d1) {
    for (const auto& r : demo.detours) {
      const auto* type = match_type(catalog, r.radius, r.power);
      if (type == nullptr || r.radius <= 0.0) {
        fail(ErrorCode::InvalidArgument, "H1 word with no associated jammer");
      }
      require(r.end > r.start && r.end < demo.trajectory.size(), "malformed detour record");
      const double c = std::cos(-r.heading), s = std::sin(-r.heading);
      VelocityWord w;
      w.source = Hypothesis::H1;
      const double ex = demo.trajectory[r.start].x - r.jammer_x;
      const double ey = demo.trajectory[r.start].y - r.jammer_y;
      w.entry = {c * ex - s * ey, s * ex + c * ey};
      for (std::size_t k = r.start; k < r.end; ++k) {
        const auto& v = demo.velocity_letters[k];
        push_letter(w, {c * v[0] - s * v[1], s * v[0] + c * v[1], v[2]}, quantum);
      }
      auto it = std::find_if(tokens.begin(), tokens.end(),
                             [&](const Token& t) { return t.type_id == type->type_id; });
      if (it == tokens.end()) {
        tokens.push_back({type->type_id, type->radius, type->power, {}});
        it = tokens.end() - 1;
      }
      it->words.push_back(std::move(w));
    }
  }
  std::sort(tokens.begin() + 1, tokens.end(),
            [](const Token& a, const Token& b) { return a.type_id < b.type_id; });
  return tokens;
}

namespace {

std::vector<Point2> strided(const std::vector<Point2>& xs, std::size_t cap) {
  if (xs.size() <= cap) return xs;
  std::vector<Point2> out;
  out.reserve(cap);
  for (std::size_t k = 0; k < cap; ++k) out.push_back(xs[k * xs.size() / cap]);
  return out;
}

void moments(const std::vector<Point2>& xs, Point2& mean, Point2& sd) {
  mean = {0, 0};
  for (const auto& x : xs) {
    mean[0] += x[0];
    mean[1] += x[1];
  }
  mean[0] /= double(xs.size());
  mean[1] /= double(xs.size());
  Point2 v{0, 0};
  for (const auto& x : xs) {
    v[0] += (x[0] - mean[0]) * (x[0] - mean[0]);
    v[1] += (x[1] - mean[1]) * (x[1] - mean[1]);
  }
  for (int c = 0; c < 2; ++c) {
    const double s = std::sqrt(v[static_cast<std::size_t>(c)] / double(xs.size()));
    sd[static_cast<std::size_t>(c)] = s > 0.0 ? s : 1.0;
  }
}

void learn_label(const std::vector<Point2>& raw, SignalLabel label, const GngParams& params,
                 std::size_t cap, std::vector<SignalLetter>& out) {
  const auto xs = strided(raw, cap);
  Point2 mean, sd;
  moments(xs, mean, sd);
  std::vector<Point2> z(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    z[i] = {(xs[i][0] - mean[0]) / sd[0], (xs[i][1] - mean[1]) / sd[1]};
  }
  GngParams p = params;
  p.seed = params.seed + static_cast<std::uint64_t>(label);
  const auto res = gng_train(z, p);
  for (const auto& node : res.nodes) {
    SignalLetter l;
    l.label = label;
    for (std::size_t c = 0; c < 2; ++c) {
      l.centroid[c] = mean[c] + sd[c] * node.position[c];
      l.variance[c] = sd[c] * sd[c] * std::max(node.variance[c], kVarianceFloor);
    }
    out.push_back(l);
  }
}

}  // namespace

Dictionary3 learn_dictionary3(std::span<const Demonstration> d0, std::span<const Demonstration> d1,
                              const GngParams& params, std::size_t max_samples) {
  require(max_samples >= 2, "max_samples must be >= 2");
  std::vector<Point2> nominal, jammed;
  for (const auto& demo : d0) {
    for (const auto& s : demo.sinr_trace) nominal.push_back(s);
  }
  for (const auto& demo : d1) {
    for (const auto& r : demo.detours) {
      for (std::size_t k = r.start; k <= r.end && k < demo.sinr_trace.size(); ++k) {
        jammed.push_back(demo.sinr_trace[k]);
      }
    }
  }
  if (nominal.size() < 2) fail(ErrorCode::InvalidArgument, "empty trace set for label nominal");
  if (jammed.size() < 2) fail(ErrorCode::InvalidArgument, "empty trace set for label jammed");

  Dictionary3 d;
  learn_label(nominal, SignalLabel::Nominal, params, max_samples, d.letters);
  learn_label(jammed, SignalLabel::Jammed, params, max_samples, d.letters);
  std::vector<Point2> all = strided(nominal, max_samples);
  const auto j = strided(jammed, max_samples);
  all.insert(all.end(), j.begin(), j.end());
  Point2 mean;
  moments(all, mean, d.scale);
  return d;
}

Assignment discretize_sinr(const Point2& observation, const Dictionary3& dict3) {
  require(!dict3.letters.empty(), "dictionary 3 is empty");
  Assignment a{0, std::numeric_limits<double>::infinity()};
  for (std::size_t i = 0; i < dict3.letters.size(); ++i) {
    const auto& c = dict3.letters[i].centroid;
    const double u = (observation[0] - c[0]) / dict3.scale[0];
    const double v = (observation[1] - c[1]) / dict3.scale[1];
    const double d = std::sqrt(u * u + v * v);
    if (d < a.distance) a = {i, d};
  }
  return a;
}

WorldModel train_world_model(std::span<const Demonstration> d0, std::span<const Demonstration> d1,
                             std::span<const mission::JammerType> catalog,
                             const WorldModelParams& params) {
  WorldModel m;
  m.dict1 = learn_dictionary1(d0);
  m.dict2 = learn_dictionary2(d0, d1, catalog, params.quantum);
  m.dict3 = learn_dictionary3(d0, d1, params.gng, params.max_signal_samples);
  m.dt = d0.front().dt;
  return m;
}

}  // namespace antijam::wm
