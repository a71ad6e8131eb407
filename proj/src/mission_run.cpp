#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Dense>

#include "antijam/error.hpp"
#include "antijam/planner.hpp"

namespace antijam::planner {

namespace {

constexpr double kDb = 4.342944819032518;

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

// What the UAV knows: CBS, channel model, learned letters and its own
// position estimate. Jammers only enter through observed SINR.
struct Predictor {
  const Scenario& map;
  const WorldModel& model;
  const loc::Problem& pb;

  double signal_db(const Vec2& p) const {
    return 10.0 * std::log10(channel::signal_power(map.channel, map.cbs, map.uav(p.x(), p.y())));
  }

  double gamma(const Vec2& p, double sig_db, std::span<const loc::Source> est) const {
    double i = 0.0;
    for (const auto& s : est) i += loc::source_power(pb, s, p);
    return sig_db - kDb * std::log(i + map.channel.noise_power);
  }

  const wm::SignalLetter& letter(const wm::Point2& obs) const {
    return model.dict3.letters[wm::discretize_sinr(obs, model.dict3).index];
  }
};

struct JamScorer : WordScorer {
  const Predictor& pred;
  std::vector<loc::Source> others;
  loc::Source jammer;

  JamScorer(const Predictor& p, std::vector<loc::Source> o, loc::Source j)
      : pred(p), others(std::move(o)), jammer(j) {}

  double operator()(const Vec2& p) const override {
    const double sig = pred.signal_db(p);
    const double nominal = pred.gamma(p, sig, others);
    std::vector<loc::Source> with = others;
    with.push_back(jammer);
    const double jammed = pred.gamma(p, sig, with);
    const auto& l = pred.letter({jammed, 0.0});
    const double d = nominal - jammed;
    return d * d / (2.0 * l.variance[0]);
  }
};

double percentile(std::vector<double> xs, double pct) {
  if (xs.empty()) return 0.0;
  std::sort(xs.begin(), xs.end());
  const double pos = pct / 100.0 * double(xs.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, xs.size() - 1);
  return xs[lo] + (pos - double(lo)) * (xs[hi] - xs[lo]);
}

loc::Problem decimate(const loc::Problem& full, int stride, std::size_t cap) {
  loc::Problem pb = full;
  pb.samples.clear();
  const std::size_t n = full.samples.size();
  if (n == 0) return pb;
  std::size_t s = static_cast<std::size_t>(stride);
  s = std::max(s, (n + cap - 1) / cap);
  for (std::size_t i = (n - 1) % s; i < n; i += s) pb.samples.push_back(full.samples[i]);
  return pb;
}

// Mirror images of the estimates across the flight line while the history is
// still (nearly) a straight line and therefore cannot tell the two apart.
std::vector<loc::Source> shadows(const loc::Problem& pb, std::span<const loc::Source> est,
                                 double spread) {
  std::vector<loc::Source> out;
  if (pb.samples.size() < 2 || est.empty()) return out;
  Vec2 mean = Vec2::Zero();
  for (const auto& s : pb.samples) mean += s.cur;
  mean /= double(pb.samples.size());
  Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
  for (const auto& s : pb.samples) cov += (s.cur - mean) * (s.cur - mean).transpose();
  cov /= double(pb.samples.size());
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(cov);
  if (std::sqrt(std::max(es.eigenvalues()(0), 0.0)) >= spread) return out;
  const Vec2 n = es.eigenvectors().col(0);  // normal of the flight line
  for (const auto& e : est) {
    loc::Source m = e;
    m.pos = e.pos - 2.0 * (e.pos - mean).dot(n) * n;
    if ((m.pos - e.pos).norm() > 10.0) out.push_back(m);
  }
  return out;
}

struct Residual {
  wm::Point2 delta;
  wm::Point2 letter_variance;
};

struct RunOutput {
  MissionReport report;
  std::vector<Residual> residuals;
};

RunOutput run_impl(const Scenario& scenario, const WorldModel& model, const PlannerConfig& cfg,
                   const Calibration& calib) {
  scenario.validate();
  cfg.validate();
  require(!model.dict3.letters.empty(), "world model has no signal letters");

  Scenario map = scenario;  // public view
  map.jammers.clear();
  const auto& truth_jammers = scenario.jammers;
  const double dt = scenario.step / cfg.speed;
  const double step = scenario.step;

  RunOutput out;
  MissionReport& rep = out.report;
  rep.method = "aif";
  rep.seed = scenario.seed;
  rep.dt = dt;

  // Plan.
  std::vector<int> targets;
  for (const auto& r : map.regions) targets.push_back(r.id);
  const int anchor = 0;
  const auto words =
      enumerate_candidates(targets, model.dict1, cfg.candidate_cap, anchor, cfg.seed);
  const auto ref = reference_belief(targets, model.dict1, anchor);
  std::vector<PlanCandidate> cands;
  for (const auto& w : words) {
    PlanCandidate c;
    c.word = w;
    c.predicted_cost = predict_plan_cost(w, model.dict1);
    c.abnormality = plan_abnormality(c.predicted_cost, ref);
    cands.push_back(std::move(c));
  }
  const PlanCandidate plan = select_plan(cands);
  rep.planned_order = plan.word;
  {
    std::ostringstream os;
    os << "abnormality=" << fmt(plan.abnormality) << " candidates=" << cands.size();
    rep.events.push_back({0, "plan", os.str()});
  }

  std::vector<Vec2> waypoints;
  for (std::size_t i = 1; i < plan.word.size(); ++i) {
    waypoints.push_back(geo::xy(map.regions[static_cast<std::size_t>(plan.word[i])].position));
  }
  const Vec2 start = geo::xy(map.regions[static_cast<std::size_t>(anchor)].position);
  waypoints.push_back(start);
  std::vector<int> wp_ids(plan.word.begin() + 1, plan.word.end());
  wp_ids.push_back(anchor);
  rep.visited_order.push_back(anchor);
  double tour_len = 0.0;
  {
    Vec2 p = start;
    for (const auto& w : waypoints) {
      tour_len += (w - p).norm();
      p = w;
    }
  }
  const auto budget = static_cast<std::size_t>(cfg.budget_factor * tour_len / step) +
                      static_cast<std::size_t>(cfg.budget_extra);

  // Source types come from the learned tokens.
  loc::Problem history;
  history.altitude = map.altitude;
  history.noise_power = map.channel.noise_power;
  history.exponent = map.channel.pathloss_exponent;
  history.dt = dt;
  std::vector<const wm::Token*> type_tokens;
  for (const auto& t : model.dict2) {
    if (t.type_id == 0) continue;
    history.types.push_back({t.type_id, t.radius, t.power});
    type_tokens.push_back(&t);
  }
  const bool can_infer = cfg.inference_enabled && !history.types.empty();
  const Predictor pred{map, model, history};

  Rng rng(derive_seed(cfg.seed, scenario.seed, 0x6d));
  KalmanState ks;
  ks.mean = start;
  ks.attractor_gain = cfg.attractor_gain;
  ks.process_noise = Eigen::Matrix2d::Identity() * cfg.process_noise;
  ks.measurement_noise = Eigen::Matrix2d::Identity() * cfg.measurement_noise;
  ks.covariance = ks.measurement_noise;
  Vec2 truth = start;

  auto observe = [&](const Vec2& p) {
    return channel::to_db(
        channel::sinr(scenario.channel, scenario.cbs, scenario.uav(p.x(), p.y()), truth_jammers));
  };
  auto record = [&](const Vec2& p) {
    const Position pos = scenario.uav(p.x(), p.y());
    if (!rep.trajectory.empty()) rep.path_length += channel::distance(rep.trajectory.back(), pos);
    rep.trajectory.push_back(pos);
    rep.total_interference += mission::interference_at(pos, truth_jammers, scenario.channel);
  };
  record(truth);

  std::vector<loc::Source> est;
  std::vector<Obstacle> obstacles;
  auto rebuild_obstacles = [&]() {
    obstacles.clear();
    const auto pb = decimate(history, cfg.history_stride, cfg.max_history);
    auto shadow = shadows(pb, est, cfg.shadow_spread);
    for (const auto* set : {&est, &shadow}) {
      for (const auto& s : *set) {
        obstacles.push_back(
            {s.pos, history.types[static_cast<std::size_t>(s.type)].radius + cfg.estimate_buffer});
      }
    }
  };

  double prev_obs = observe(truth);
  Vec2 prev_est = ks.mean;
  std::size_t wi = 0;
  std::vector<Vec2> rollout;
  std::size_t rk = 0;
  std::size_t rollout_limit = 0;
  int streak = 0;
  std::size_t last_inference = 0;
  int events = 0;
  double target_mean = std::max(cfg.fit_target_factor * calib.mean_abnormality, 1e-3);

  auto fit = [&](bool thorough, std::size_t step_no) {
    const auto pb = thorough ? decimate(history, cfg.final_history_stride, cfg.final_max_history)
                             : decimate(history, cfg.history_stride, cfg.max_history);
    loc::FitParams fp;
    fp.particles.pitch = cfg.particle_pitch;
    fp.particles.jitter = cfg.particle_jitter;
    fp.particles.side = map.side;
    fp.particles.seed = derive_seed(cfg.seed, scenario.seed, step_no);
    fp.max_sources = cfg.max_sources;
    fp.accept_ratio = cfg.accept_ratio;
    fp.target_cost = target_mean * double(pb.samples.size());
    fp.hop_rounds = thorough ? 6 : 2;
    fp.pair_moves = thorough;
    auto res = loc::fit_sources(pb, est, fp);
    if (thorough && !est.empty() && res.cost > fp.target_cost) {
      // a cold restart escapes minima the in-flight estimates got stuck in
      auto cold = loc::fit_sources(pb, {}, fp);
      if (cold.cost < res.cost) res = std::move(cold);
    }
    return res;
  };

  for (std::size_t t = 1; t <= budget; ++t) {
    const Vec2 wp = waypoints[wi];

    if (rollout.empty() && !obstacles.empty()) {
      // nearest obstacle ahead whose inflated disk cuts the leg
      int hit = -1;
      double hit_d = std::numeric_limits<double>::infinity();
      for (std::size_t o = 0; o < obstacles.size(); ++o) {
        const auto& ob = obstacles[o];
        const double inflated = ob.radius + cfg.margin;
        const double dc = (ob.center - ks.mean).norm();
        if (dc > cfg.lookahead || (wp - ob.center).norm() < inflated) continue;
        if (geo::point_segment_distance(ob.center, ks.mean, wp) >= inflated) continue;
        if (dc < hit_d) {
          hit_d = dc;
          hit = static_cast<int>(o);
        }
      }
      if (hit >= 0) {
        const Obstacle& ob = obstacles[static_cast<std::size_t>(hit)];
        // the obstacle's source type picks the token
        int type = 0;
        for (const auto& s : est) {
          if ((s.pos - ob.center).norm() < 1e-9) type = s.type;
        }
        std::vector<loc::Source> others;
        for (const auto& s : est) {
          if ((s.pos - ob.center).norm() >= 1e-9) others.push_back(s);
        }
        const JamScorer scorer(pred, others, loc::Source{ob.center, type});
        const auto* token = type_tokens[static_cast<std::size_t>(type)];
        auto choice = select_antijam_word(ob, *token, obstacles, ks.mean, wp, cfg.margin,
                                          model.dt, step, scorer);
        if (choice) {
          rollout = std::move(choice->rollout);
          rep.events.push_back({t, "word",
                                "type=" + std::to_string(token->type_id) + " word=" +
                                    std::to_string(choice->word_index) +
                                    " score=" + fmt(choice->score)});
        } else {
          std::vector<geo::Circle> circles;
          for (const auto& o : obstacles) circles.push_back({o.center, o.radius + cfg.margin});
          std::vector<Vec2> pts;
          Vec2 from = ks.mean;
          for (const auto& c : geo::merge_overlapping(circles)) {
            if ((from - c.center).norm() < c.radius) {
              Vec2 dir = from - c.center;
              if (dir.norm() < 1e-9) dir = Vec2(1.0, 0.0);
              const Vec2 exit = c.center + dir.normalized() * (c.radius + 1.0);
              const Vec2 seg[2] = {from, exit};
              const auto r = geo::resample(seg, step);
              pts.insert(pts.end(), r.begin() + 1, r.end());
              from = exit;
            }
          }
          try {
            const auto route = geo::shortest_detour(from, wp, circles);
            const auto r = geo::resample(route, step);
            pts.insert(pts.end(), r.begin() + 1, r.end());
            if (!pts.empty()) pts.pop_back();  // the leg itself finishes at the waypoint
            rollout = std::move(pts);
            rep.events.push_back({t, "warning", "no feasible word, geometric detour"});
          } catch (const Error& e) {
            rep.events.push_back({t, "warning", std::string("detour failed: ") + e.what()});
          }
        }
        rk = 0;
        rollout_limit = t + 2 * rollout.size() + 50;
      }
    }

    const Vec2 target = rollout.empty() ? wp : rollout[rk];
    Vec2 d = target - ks.mean;
    const double dn = d.norm();
    const bool reach = dn <= step;
    if (!reach) d *= step / dn;
    const Vec2 letter = d / (cfg.attractor_gain * dt);
    ks = attractor_step(ks, truth, letter, dt, rng);
    record(truth);

    if (!rollout.empty()) {
      if (reach) ++rk;
      if (rk >= rollout.size() || t > rollout_limit) {
        rollout.clear();
        rk = 0;
      }
    } else if (reach && (ks.mean - wp).norm() <= cfg.waypoint_tolerance) {
      if (wi + 1 < waypoints.size()) rep.visited_order.push_back(wp_ids[wi]);
      ++wi;
      if (wi == waypoints.size()) {
        rep.completed = true;
        rep.completion_steps = t;
        break;
      }
    }

    // Monitor the link.
    const double g = observe(truth);
    const wm::Point2 obs{g, (g - prev_obs) / dt};
    prev_obs = g;
    loc::SignalSample sample;
    sample.prev = prev_est;
    sample.cur = ks.mean;
    sample.signal_db_prev = pred.signal_db(prev_est);
    sample.signal_db_cur = pred.signal_db(ks.mean);
    sample.observed = obs;
    const auto& lv = pred.letter(obs).variance;
    sample.variance = {cfg.letter_variance_weight * lv[0] + calib.noise_variance[0],
                       cfg.letter_variance_weight * lv[1] + calib.noise_variance[1]};
    prev_est = ks.mean;
    const auto predicted = loc::predict(history, sample, est);
    out.residuals.push_back({{obs[0] - predicted[0], obs[1] - predicted[1]}, lv});
    wm::SignalLetter pl;
    pl.centroid = predicted;
    pl.variance = sample.variance;
    const double a = signal_abnormality(obs, pl);
    history.samples.push_back(sample);
    streak = a > calib.tau ? streak + 1 : 0;

    if (can_infer && streak >= cfg.trigger_window &&
        history.samples.size() >= static_cast<std::size_t>(cfg.min_history) &&
        (last_inference == 0 || t - last_inference >= static_cast<std::size_t>(cfg.min_gap)) &&
        events < cfg.max_inference_events) {
      rep.triggered = true;
      ++events;
      last_inference = t;
      rep.events.push_back({t, "trigger", "abnormality=" + fmt(a)});
      const auto res = fit(false, t);
      est = res.sources;
      rebuild_obstacles();
      rollout.clear();
      rk = 0;
      std::ostringstream os;
      os << "sources=" << est.size() << " cost=" << fmt(res.cost);
      rep.events.push_back({t, "inference", os.str()});
    }
  }
  if (!rep.completed) rep.completion_steps = rep.trajectory.size() - 1;

  if (rep.triggered) {
    const auto res = fit(true, history.samples.size() + 1);
    est = res.sources;
    for (const auto& s : est) {
      const auto& ty = history.types[static_cast<std::size_t>(s.type)];
      rep.estimates.push_back({s.pos.x(), s.pos.y(), ty.type_id, ty.radius, ty.power, res.cost});
    }
  }
  if (!truth_jammers.empty()) {
    std::vector<Vec2> e, tr;
    for (const auto& s : rep.estimates) e.emplace_back(s.x, s.y);
    for (const auto& j : truth_jammers) tr.push_back(geo::xy(j.position));
    const auto r = rmse(e, tr);
    if (r.matched > 0) rep.jammer_rmse = r.rmse;
    rep.jammer_misses = r.misses;
  }
  return out;
}

}  // namespace

Calibration calibrate(const Scenario& scenario, const WorldModel& model, const PlannerConfig& cfg) {
  Scenario quiet = scenario;
  quiet.jammers.clear();
  PlannerConfig c = cfg;
  c.inference_enabled = false;
  c.seed = derive_seed(cfg.seed, 0xca1);
  Calibration cal;
  cal.tau = std::numeric_limits<double>::infinity();
  const auto out = run_impl(quiet, model, c, cal);
  const auto n = double(std::max<std::size_t>(out.residuals.size(), 1));
  for (const auto& r : out.residuals) {
    for (int k = 0; k < 2; ++k) cal.noise_variance[k] += r.delta[k] * r.delta[k] / n;
  }
  std::vector<double> a;
  double sum = 0.0;
  for (const auto& r : out.residuals) {
    double v = 0.0;
    for (int k = 0; k < 2; ++k) {
      const double var = cfg.letter_variance_weight * r.letter_variance[k] + cal.noise_variance[k];
      v += r.delta[k] * r.delta[k] / (2.0 * var);
    }
    a.push_back(v);
    sum += v;
  }
  cal.tau = std::max(percentile(a, cfg.tau_percentile), cfg.tau_floor);
  cal.mean_abnormality = a.empty() ? 0.0 : sum / double(a.size());
  return cal;
}

MissionReport run_mission(const Scenario& scenario, const WorldModel& model,
                          const PlannerConfig& cfg, const Calibration& calibration) {
  return run_impl(scenario, model, cfg, calibration).report;
}

MissionReport run_mission(const Scenario& scenario, const WorldModel& model,
                          const PlannerConfig& cfg) {
  return run_mission(scenario, model, cfg, calibrate(scenario, model, cfg));
}

}  // namespace antijam::planner
