#include "antijam/config.hpp"

#include <algorithm>
#include <set>

#include "antijam/error.hpp"
#include "antijam/serialization.hpp"

namespace antijam::config {

namespace {

// One field list per struct drives both directions. Per-run seeds
// (planner, GNG, Q-learning) are derived by the harness and not listed.

template <class V>
void visit(V& v, mission::GeneratorConfig& c) {
  v("side", c.side);
  v("altitude", c.altitude);
  v("step", c.step);
  v("n_regions", c.n_regions);
  v("n_jammers", c.n_jammers);
  v("jitter", c.jitter);
  v("margin", c.margin);
  v("min_region_separation", c.min_region_separation);
  v("max_retries", c.max_retries);
}

template <class V>
void visit(V& v, expert::ExpertConfig& c) {
  v("margin", c.margin);
  v("speed", c.speed);
  v("word_window", c.word_window);
  v("w_interference", c.w_interference);
  v("tour_seed", c.tour_seed);
}

template <class V>
void visit(V& v, wm::GngParams& c) {
  v("eps_b", c.eps_b);
  v("eps_n", c.eps_n);
  v("max_age", c.max_age);
  v("lambda", c.lambda);
  v("decay", c.decay);
  v("alpha", c.alpha);
  v("max_nodes", c.max_nodes);
  v("max_passes", c.max_passes);
}

template <class V>
void visit(V& v, TrainingConfig& c) {
  v("maps", c.maps);
  v("max_draws", c.max_draws);
  v("max_jammers", c.max_jammers);
}

template <class V>
void visit(V& v, planner::PlannerConfig& c) {
  v("attractor_gain", c.attractor_gain);
  v("process_noise", c.process_noise);
  v("measurement_noise", c.measurement_noise);
  v("speed", c.speed);
  v("waypoint_tolerance", c.waypoint_tolerance);
  v("candidate_cap", c.candidate_cap);
  v("margin", c.margin);
  v("estimate_buffer", c.estimate_buffer);
  v("lookahead", c.lookahead);
  v("trigger_window", c.trigger_window);
  v("letter_variance_weight", c.letter_variance_weight);
  v("tau_percentile", c.tau_percentile);
  v("tau_floor", c.tau_floor);
  v("min_history", c.min_history);
  v("min_gap", c.min_gap);
  v("max_inference_events", c.max_inference_events);
  v("history_stride", c.history_stride);
  v("max_history", c.max_history);
  v("final_history_stride", c.final_history_stride);
  v("final_max_history", c.final_max_history);
  v("shadow_spread", c.shadow_spread);
  v("particle_pitch", c.particle_pitch);
  v("particle_jitter", c.particle_jitter);
  v("max_sources", c.max_sources);
  v("accept_ratio", c.accept_ratio);
  v("fit_target_factor", c.fit_target_factor);
  v("budget_factor", c.budget_factor);
  v("budget_extra", c.budget_extra);
  v("inference_enabled", c.inference_enabled);
}

template <class V>
void visit(V& v, baseline::RLConfig& c) {
  v("grid_pitch", c.grid_pitch);
  v("learning_rate", c.learning_rate);
  v("discount", c.discount);
  v("epsilon_start", c.epsilon_start);
  v("epsilon_end", c.epsilon_end);
  v("epsilon_decay_fraction", c.epsilon_decay_fraction);
  v("episodes", c.episodes);
  v("max_episode_steps", c.max_episode_steps);
  v("w_distance", c.w_distance);
  v("w_interference", c.w_interference);
  v("visit_reward", c.visit_reward);
  v("completion_reward", c.completion_reward);
  v("rollout_budget", c.rollout_budget);
}

class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(ErrorCode::Parse, where() + " must be an object");
  }

  template <class T>
  void operator()(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception& e) {
      fail(ErrorCode::Parse, "bad value for " + child(key) + ": " + e.what());
    }
  }

  // Marks the key as known and returns it if present.
  const json* sub(const char* key) {
    seen_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }

  std::string child(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

  void finish() const {
    for (const auto& item : j_.items()) {
      if (!seen_.count(item.key())) fail(ErrorCode::Parse, "unknown config key " + child(item.key().c_str()));
    }
  }

 private:
  std::string where() const { return path_.empty() ? "config" : path_; }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

struct Writer {
  json& j;
  template <class T>
  void operator()(const char* key, const T& value) {
    j[key] = value;
  }
};

template <class T>
void read_section(Reader& parent, const char* key, T& target) {
  if (const json* s = parent.sub(key)) {
    Reader r(*s, parent.child(key));
    visit(r, target);
    r.finish();
  }
}

template <class T>
json write_section(T target) {
  json j = json::object();
  Writer w{j};
  visit(w, target);
  return j;
}

void check_keys(const json& j, const std::string& path, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) fail(ErrorCode::Parse, path + " must be an object");
  for (const auto& item : j.items()) {
    const bool ok = std::any_of(allowed.begin(), allowed.end(),
                                [&](const char* a) { return item.key() == a; });
    if (!ok) fail(ErrorCode::Parse, "unknown config key " + path + "." + item.key());
  }
}

void read_generator(Reader& top, mission::GeneratorConfig& g) {
  const json* s = top.sub("generator");
  if (!s) return;
  Reader r(*s, "generator");
  visit(r, g);
  if (const json* ch = r.sub("channel")) {
    check_keys(*ch, "generator.channel",
               {"pathloss_exponent", "beta_los_db", "beta_nlos_db", "cbs_power_w", "noise_power_w",
                "los_model"});
    if (ch->contains("los_model")) {
      check_keys(ch->at("los_model"), "generator.channel.los_model", {"kind", "p_los", "phi", "psi"});
    }
    g.channel = io::channel_from_json(*ch);
  }
  if (const json* cat = r.sub("catalog")) {
    if (!cat->is_array()) fail(ErrorCode::Parse, "generator.catalog must be an array");
    g.catalog.clear();
    for (const auto& t : *cat) {
      check_keys(t, "generator.catalog[]", {"type_id", "radius", "power"});
      mission::JammerType jt;
      jt.type_id = t.value("type_id", jt.type_id);
      jt.radius = t.value("radius", jt.radius);
      jt.power = t.value("power", jt.power);
      g.catalog.push_back(jt);
    }
  }
  r.finish();
}

}  // namespace

void TrainingConfig::validate() const {
  require(maps >= 1, "training.maps must be >= 1");
  require(max_draws >= maps, "training.max_draws must be >= training.maps");
  require(max_jammers >= 1, "training.max_jammers must be >= 1");
}

bool is_method(const std::string& name) {
  return name == "expert" || name == "aif" || name == "qlearning";
}

void ExperimentConfig::validate() const {
  require(!regions.empty(), "regions must not be empty");
  require(!jammers.empty(), "jammers must not be empty");
  require(seeds >= 1, "seeds must be >= 1");
  require(!methods.empty(), "methods must not be empty");
  for (const auto& m : methods) require(is_method(m), "unknown method " + m);
  for (int n : regions) {
    require(n >= 2 && n <= baseline::kMaxRegions,
            "region counts must lie in [2, " + std::to_string(baseline::kMaxRegions) + "]");
  }
  for (int j : jammers) require(j >= 0, "jammer counts must be >= 0");
  require(fixed_regions >= 2 && fixed_regions <= baseline::kMaxRegions, "fixed_regions out of range");
  require(localization_seeds >= 1, "localization_seeds must be >= 1");
  require(workers >= 0, "workers must be >= 0");
  require(!out.empty(), "out must not be empty");
  generator.validate();
  expert.validate();
  worldmodel.gng.validate();
  require(worldmodel.quantum > 0.0, "worldmodel.quantum must be > 0");
  require(worldmodel.max_signal_samples >= 1, "worldmodel.max_signal_samples must be >= 1");
  training.validate();
  planner.validate();
  rl.validate();
}

ExperimentConfig from_json(const json& j) {
  ExperimentConfig c;
  Reader r(j, "");
  r("regions", c.regions);
  r("jammers", c.jammers);
  r("seeds", c.seeds);
  r("seed", c.seed);
  r("methods", c.methods);
  r("workers", c.workers);
  r("out", c.out);
  r("trajectories", c.trajectories);
  r("qtable_cache", c.qtable_cache);
  r("fixed_regions", c.fixed_regions);
  r("localization_seeds", c.localization_seeds);
  read_generator(r, c.generator);
  read_section(r, "expert", c.expert);
  if (const json* s = r.sub("worldmodel")) {
    Reader w(*s, "worldmodel");
    w("quantum", c.worldmodel.quantum);
    w("max_signal_samples", c.worldmodel.max_signal_samples);
    read_section(w, "gng", c.worldmodel.gng);
    w.finish();
  }
  read_section(r, "training", c.training);
  read_section(r, "planner", c.planner);
  read_section(r, "rl", c.rl);
  r.finish();
  c.validate();
  return c;
}

json to_json(const ExperimentConfig& c) {
  json j;
  j["regions"] = c.regions;
  j["jammers"] = c.jammers;
  j["seeds"] = c.seeds;
  j["seed"] = c.seed;
  j["methods"] = c.methods;
  j["workers"] = c.workers;
  j["out"] = c.out;
  j["trajectories"] = c.trajectories;
  j["qtable_cache"] = c.qtable_cache;
  j["fixed_regions"] = c.fixed_regions;
  j["localization_seeds"] = c.localization_seeds;
  json g = write_section(c.generator);
  g["channel"] = io::to_json(c.generator.channel);
  json cat = json::array();
  for (const auto& t : c.generator.catalog) {
    cat.push_back({{"type_id", t.type_id}, {"radius", t.radius}, {"power", t.power}});
  }
  g["catalog"] = cat;
  j["generator"] = g;
  j["expert"] = write_section(c.expert);
  j["worldmodel"] = {{"quantum", c.worldmodel.quantum},
                     {"max_signal_samples", c.worldmodel.max_signal_samples},
                     {"gng", write_section(c.worldmodel.gng)}};
  j["training"] = write_section(c.training);
  j["planner"] = write_section(c.planner);
  j["rl"] = write_section(c.rl);
  return j;
}

ExperimentConfig load(const std::string& path) {
  json j;
  try {
    j = json::parse(io::read_file(path));
  } catch (const json::exception& e) {
    fail(ErrorCode::Parse, path + ": " + e.what());
  }
  return from_json(j);
}

}  // namespace antijam::config
