#include "antijam/belief.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "antijam/error.hpp"
#include "antijam/rng.hpp"

namespace antijam::loc {

namespace {

constexpr double kDb = 4.342944819032518;  // 10 / ln(10)

double kernel(const Problem& pb, double power, const Vec2& q, const Vec2& uav) {
  const double d2 = (uav - q).squaredNorm() + pb.altitude * pb.altitude;
  if (pb.exponent == 2.0) return power / d2;
  return power * std::pow(d2, -0.5 * pb.exponent);
}

// d kernel / d q
Vec2 kernel_grad(const Problem& pb, double power, const Vec2& q, const Vec2& uav) {
  const double d2 = (uav - q).squaredNorm() + pb.altitude * pb.altitude;
  const double f = power * pb.exponent * std::pow(d2, -0.5 * pb.exponent - 1.0);
  return f * (uav - q);
}

double power_of(const Problem& pb, const Source& s) {
  return pb.types[static_cast<std::size_t>(s.type)].power;
}

double interference(const Problem& pb, std::span<const Source> src, const Vec2& uav) {
  double sum = 0.0;
  for (const auto& s : src) sum += kernel(pb, power_of(pb, s), s.pos, uav);
  return sum;
}

double cost_from(const Problem& pb, const SignalSample& s, double i_prev, double i_cur) {
  const double g_prev = s.signal_db_prev - kDb * std::log(i_prev + pb.noise_power);
  const double g_cur = s.signal_db_cur - kDb * std::log(i_cur + pb.noise_power);
  const double dg = (g_cur - g_prev) / pb.dt;
  const double e0 = g_cur - s.observed[0];
  const double e1 = dg - s.observed[1];
  return e0 * e0 / (2.0 * s.variance[0]) + e1 * e1 / (2.0 * s.variance[1]);
}

Vec2 clamp_arena(Vec2 p, double side) {
  return {std::clamp(p.x(), 0.0, side), std::clamp(p.y(), 0.0, side)};
}

}  // namespace

double source_power(const Problem& pb, const Source& s, const Vec2& uav) {
  return kernel(pb, power_of(pb, s), s.pos, uav);
}

Point2 predict(const Problem& pb, const SignalSample& s, std::span<const Source> sources) {
  const double g_prev =
      s.signal_db_prev - kDb * std::log(interference(pb, sources, s.prev) + pb.noise_power);
  const double g_cur =
      s.signal_db_cur - kDb * std::log(interference(pb, sources, s.cur) + pb.noise_power);
  return {g_cur, (g_cur - g_prev) / pb.dt};
}

double sample_cost(const Problem& pb, const SignalSample& s, std::span<const Source> sources) {
  return cost_from(pb, s, interference(pb, sources, s.prev), interference(pb, sources, s.cur));
}

double total_cost(const Problem& pb, std::span<const Source> sources) {
  double c = 0.0;
  for (const auto& s : pb.samples) c += sample_cost(pb, s, sources);
  return c;
}

void ParticleParams::validate() const {
  require(pitch > 0.0, "particle pitch must be > 0");
  require(jitter >= 0.0, "particle jitter must be >= 0");
  require(side > 0.0, "arena side must be > 0");
}

std::vector<Particle> spawn_particles(const ParticleParams& params, std::size_t n_types) {
  params.validate();
  Rng rng(params.seed);
  std::vector<Particle> out;
  const int cells = std::max(1, static_cast<int>(std::floor(params.side / params.pitch)));
  const double pitch = params.side / cells;
  for (std::size_t t = 0; t < n_types; ++t) {
    for (int i = 0; i < cells; ++i) {
      for (int j = 0; j < cells; ++j) {
        Vec2 p((i + 0.5) * pitch + rng.uniform(-params.jitter, params.jitter),
               (j + 0.5) * pitch + rng.uniform(-params.jitter, params.jitter));
        out.push_back({clamp_arena(p, params.side), static_cast<int>(t), 0.0});
      }
    }
  }
  return out;
}

void score_particles(const Problem& pb, std::span<const Source> background,
                     std::span<Particle> particles) {
  const std::size_t m = pb.samples.size();
  std::vector<double> bg_prev(m), bg_cur(m);
  for (std::size_t i = 0; i < m; ++i) {
    bg_prev[i] = interference(pb, background, pb.samples[i].prev);
    bg_cur[i] = interference(pb, background, pb.samples[i].cur);
  }
  for (auto& p : particles) {
    const double power = pb.types[static_cast<std::size_t>(p.type)].power;
    double c = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const auto& s = pb.samples[i];
      c += cost_from(pb, s, bg_prev[i] + kernel(pb, power, p.pos, s.prev),
                     bg_cur[i] + kernel(pb, power, p.pos, s.cur));
    }
    p.abnormality = c;
  }
}

std::size_t best_particle(std::span<const Particle> particles) {
  require(!particles.empty(), "no particles");
  std::size_t best = 0;
  for (std::size_t i = 1; i < particles.size(); ++i) {
    if (particles[i].abnormality < particles[best].abnormality) best = i;
  }
  return best;
}

std::vector<Source> refine(const Problem& pb, std::vector<Source> sources, double side,
                           int max_iter) {
  if (sources.empty() || pb.samples.empty()) return sources;
  const std::size_t k = sources.size();
  const std::size_t m = pb.samples.size();
  const Eigen::Index np = static_cast<Eigen::Index>(2 * k);

  auto residuals = [&](const std::vector<Source>& src, Eigen::VectorXd& r, Eigen::MatrixXd* jac) {
    r.resize(static_cast<Eigen::Index>(2 * m));
    if (jac) jac->setZero(static_cast<Eigen::Index>(2 * m), np);
    for (std::size_t i = 0; i < m; ++i) {
      const auto& s = pb.samples[i];
      const double ip = interference(pb, src, s.prev) + pb.noise_power;
      const double ic = interference(pb, src, s.cur) + pb.noise_power;
      const double g_prev = s.signal_db_prev - kDb * std::log(ip);
      const double g_cur = s.signal_db_cur - kDb * std::log(ic);
      const double w0 = 1.0 / std::sqrt(2.0 * s.variance[0]);
      const double w1 = 1.0 / std::sqrt(2.0 * s.variance[1]);
      const auto row = static_cast<Eigen::Index>(2 * i);
      r(row) = w0 * (g_cur - s.observed[0]);
      r(row + 1) = w1 * ((g_cur - g_prev) / pb.dt - s.observed[1]);
      if (!jac) continue;
      for (std::size_t j = 0; j < k; ++j) {
        const double pw = power_of(pb, src[j]);
        const Vec2 dc = -kDb * kernel_grad(pb, pw, src[j].pos, s.cur) / ic;
        const Vec2 dp = -kDb * kernel_grad(pb, pw, src[j].pos, s.prev) / ip;
        const auto col = static_cast<Eigen::Index>(2 * j);
        for (int c = 0; c < 2; ++c) {
          (*jac)(row, col + c) = w0 * dc(c);
          (*jac)(row + 1, col + c) = w1 * (dc(c) - dp(c)) / pb.dt;
        }
      }
    }
  };

  Eigen::VectorXd r;
  Eigen::MatrixXd jac;
  residuals(sources, r, &jac);
  double cost = r.squaredNorm();
  double lambda = 1e-3;
  for (int it = 0; it < max_iter; ++it) {
    const Eigen::MatrixXd jtj = jac.transpose() * jac;
    const Eigen::VectorXd g = jac.transpose() * r;
    bool accepted = false;
    for (int tries = 0; tries < 12; ++tries) {
      Eigen::MatrixXd a = jtj;
      for (Eigen::Index d = 0; d < np; ++d) a(d, d) += lambda * std::max(jtj(d, d), 1e-12);
      const Eigen::VectorXd step = a.ldlt().solve(-g);
      if (!step.allFinite()) {
        lambda *= 10.0;
        continue;
      }
      std::vector<Source> trial = sources;
      for (std::size_t j = 0; j < k; ++j) {
        const auto col = static_cast<Eigen::Index>(2 * j);
        trial[j].pos = clamp_arena(trial[j].pos + Vec2(step(col), step(col + 1)), side);
      }
      Eigen::VectorXd rt;
      residuals(trial, rt, nullptr);
      const double ct = rt.squaredNorm();
      if (ct < cost) {
        const double gain = cost - ct;
        sources = std::move(trial);
        cost = ct;
        lambda = std::max(lambda * 0.3, 1e-9);
        accepted = true;
        if (gain <= 1e-12 * std::max(1.0, cost)) return sources;
        break;
      }
      lambda *= 10.0;
    }
    if (!accepted) break;
    residuals(sources, r, &jac);
  }
  return sources;
}

namespace {

constexpr std::size_t kCoarseSamples = 200;
constexpr std::size_t kFrontRunners = 12;
constexpr double kPairReach = 400.0;

struct Search {
  const Problem& pb;
  const FitParams& params;
  std::vector<Particle> particles;

  // Coarse pass on a thinned history, exact rescoring of the front runners.
  Source greedy(std::span<const Source> background) {
    const std::size_t m = pb.samples.size();
    if (m <= kCoarseSamples) {
      score_particles(pb, background, particles);
      const auto& p = particles[best_particle(particles)];
      return {p.pos, p.type};
    }
    Problem thin = pb;
    thin.samples.clear();
    const std::size_t stride = (m + kCoarseSamples - 1) / kCoarseSamples;
    for (std::size_t i = 0; i < m; i += stride) thin.samples.push_back(pb.samples[i]);
    score_particles(thin, background, particles);
    std::vector<std::size_t> idx(particles.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    const std::size_t keep = std::min(kFrontRunners, idx.size());
    std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(keep), idx.end(),
                      [&](std::size_t a, std::size_t b) {
                        const double ca = particles[a].abnormality;
                        const double cb = particles[b].abnormality;
                        return ca < cb || (ca == cb && a < b);
                      });
    std::vector<Particle> front;
    for (std::size_t i = 0; i < keep; ++i) front.push_back(particles[idx[i]]);
    score_particles(pb, background, front);
    const auto& p = front[best_particle(front)];
    return {p.pos, p.type};
  }

  std::vector<Source> add_one(std::vector<Source> base) {
    base.push_back(greedy(base));
    return refine(pb, std::move(base), params.particles.side);
  }

  // Nearby pairs blur into one blob seen from altitude; try other orientations
  // about the same midpoint.
  bool rotate_pairs(std::vector<Source>& cand, double& best) {
    for (std::size_t a = 0; a < cand.size(); ++a) {
      for (std::size_t b = a + 1; b < cand.size(); ++b) {
        const Vec2 mid = 0.5 * (cand[a].pos + cand[b].pos);
        const Vec2 half = cand[a].pos - mid;
        if (2.0 * half.norm() > kPairReach) continue;
        for (int k = 1; k < 4; ++k) {
          const double th = k * 0.25 * 3.14159265358979323846;
          const Vec2 r(std::cos(th) * half.x() - std::sin(th) * half.y(),
                       std::sin(th) * half.x() + std::cos(th) * half.y());
          std::vector<Source> trial = cand;
          trial[a].pos = mid + r;
          trial[b].pos = mid - r;
          trial = refine(pb, std::move(trial), params.particles.side);
          const double ct = total_cost(pb, trial);
          if (ct < best * 0.999) {
            cand = std::move(trial);
            best = ct;
            return true;
          }
        }
      }
    }
    return false;
  }

  // A surplus source gets parked far away to soak up the misfit; dropping it
  // and refitting the rest can beat any relocation.
  bool drop_one(std::vector<Source>& cand, double& best) {
    if (cand.size() < 2) return false;
    for (std::size_t e = 0; e < cand.size(); ++e) {
      std::vector<Source> trial;
      for (std::size_t f = 0; f < cand.size(); ++f) {
        if (f != e) trial.push_back(cand[f]);
      }
      trial = refine(pb, std::move(trial), params.particles.side);
      const double ct = total_cost(pb, trial);
      if (ct < best * 0.999) {
        cand = std::move(trial);
        best = ct;
        return true;
      }
    }
    return false;
  }

  // Drop, relocate one source, then pairs, while the cost keeps dropping.
  void hop(std::vector<Source>& cand, double& best) {
    for (int round = 0; round < params.hop_rounds; ++round) {
      bool improved = drop_one(cand, best);
      for (std::size_t e = 0; e < cand.size(); ++e) {
        std::vector<Source> others;
        for (std::size_t f = 0; f < cand.size(); ++f) {
          if (f != e) others.push_back(cand[f]);
        }
        auto trial = add_one(others);
        const double ct = total_cost(pb, trial);
        if (ct < best * 0.999) {
          cand = std::move(trial);
          best = ct;
          improved = true;
        }
      }
      if (!improved && best > params.target_cost && params.pair_moves) improved = rotate_pairs(cand, best);
      if (!improved && best > params.target_cost && params.pair_moves && cand.size() >= 2) {
        for (std::size_t a = 0; a < cand.size() && !improved; ++a) {
          for (std::size_t b = a + 1; b < cand.size() && !improved; ++b) {
            std::vector<Source> others;
            for (std::size_t f = 0; f < cand.size(); ++f) {
              if (f != a && f != b) others.push_back(cand[f]);
            }
            others.push_back(greedy(others));
            auto trial = add_one(others);
            const double ct = total_cost(pb, trial);
            if (ct < best * 0.999) {
              cand = std::move(trial);
              best = ct;
              improved = true;
            }
          }
        }
      }
      if (!improved || best <= params.target_cost) break;
    }
  }
};

}  // namespace

FitResult fit_sources(const Problem& pb, std::vector<Source> warm, const FitParams& params) {
  params.particles.validate();
  require(!pb.types.empty(), "no source types");
  require(params.max_sources >= 0, "max_sources must be >= 0");
  FitResult res;
  if (pb.samples.empty()) return res;

  Search search{pb, params, spawn_particles(params.particles, pb.types.size())};
  std::vector<Source> est = refine(pb, std::move(warm), params.particles.side);
  double cost = total_cost(pb, est);
  if (!est.empty() && cost > params.target_cost) search.hop(est, cost);

  while (static_cast<int>(est.size()) < params.max_sources && cost > params.target_cost) {
    auto cand = search.add_one(est);
    double best = total_cost(pb, cand);
    if (best > params.target_cost) search.hop(cand, best);
    if (best < params.accept_ratio * cost) {
      est = std::move(cand);
      cost = best;
    } else {
      break;
    }
  }
  res.sources = std::move(est);
  res.cost = cost;
  res.particles = std::move(search.particles);
  return res;
}

}  // namespace antijam::loc
