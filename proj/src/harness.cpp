#include "antijam/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <sstream>
#include <thread>
#include <tuple>

#include "antijam/error.hpp"
#include "antijam/serialization.hpp"

namespace antijam::harness {

namespace fs = std::filesystem;

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& body) {
  std::size_t threads = workers > 0 ? static_cast<std::size_t>(workers)
                                    : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, n);
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&]() {
      for (std::size_t i = next++; i < n; i = next++) body(i);
    });
  }
  for (auto& th : pool) th.join();
}

auto key(const RunResult& r) {
  return std::make_tuple(r.method, r.n_regions, r.n_jammers, r.seed, r.replicate);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(item);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

bool close(double a, double b) {
  return std::abs(a - b) <= 1e-15 + 1e-9 * std::max(std::abs(a), std::abs(b));
}

struct Stats {
  double mean = 0.0;
  double std = 0.0;
};

Stats stats(const std::vector<double>& v) {
  Stats s;
  if (v.empty()) return s;
  for (double x : v) s.mean += x;
  s.mean /= static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - s.mean) * (x - s.mean);
    s.std = std::sqrt(ss / static_cast<double>(v.size() - 1));
  }
  return s;
}

}  // namespace

std::uint64_t scenario_seed(std::uint64_t base, int n_regions, int n_jammers, int replicate) {
  return derive_seed(base, static_cast<std::uint64_t>(n_regions),
                     static_cast<std::uint64_t>(n_jammers), static_cast<std::uint64_t>(replicate));
}

mission::Scenario make_scenario(const ExperimentConfig& cfg, int n_regions, int n_jammers,
                                std::uint64_t seed) {
  auto g = cfg.generator;
  g.n_regions = n_regions;
  g.n_jammers = n_jammers;
  return mission::generate_scenario(g, seed);
}

TrainingSet training_set(const mission::Scenario& scenario, const ExperimentConfig& cfg) {
  auto g = cfg.generator;
  g.n_regions = static_cast<int>(scenario.regions.size());
  TrainingSet set;
  const auto& t = cfg.training;
  for (int k = 0; k < t.max_draws && static_cast<int>(set.d1.size()) < t.maps; ++k) {
    const auto map = mission::regenerate_jammers(scenario, g, 1 + k % t.max_jammers,
                                                 derive_seed(scenario.seed, 77, static_cast<std::uint64_t>(k)));
    auto h1 = expert::generate_demonstration(map, mission::Hypothesis::H1, cfg.expert);
    if (h1.detours.empty()) continue;
    set.d0.push_back(expert::generate_demonstration(map, mission::Hypothesis::H0, cfg.expert));
    set.d1.push_back(std::move(h1));
  }
  if (set.d1.empty()) {
    fail(ErrorCode::Infeasible, "no training map with a detour after " + std::to_string(t.max_draws) + " draws");
  }
  return set;
}

wm::WorldModel train_world_model(const mission::Scenario& scenario, const ExperimentConfig& cfg) {
  const auto set = training_set(scenario, cfg);
  auto params = cfg.worldmodel;
  params.gng.seed = scenario.seed;
  return wm::train_world_model(set.d0, set.d1, cfg.generator.catalog, params);
}

planner::MissionReport expert_report(const mission::Scenario& scenario, const ExperimentConfig& cfg) {
  const auto demo = expert::generate_demonstration(scenario, mission::Hypothesis::H1, cfg.expert);
  planner::MissionReport r;
  r.method = "expert";
  r.seed = scenario.seed;
  r.planned_order = demo.order;
  r.visited_order = demo.order;
  r.trajectory = demo.trajectory;
  r.total_interference = mission::trajectory_interference(r.trajectory, scenario);
  r.completion_steps = r.trajectory.empty() ? 0 : r.trajectory.size() - 1;
  r.path_length = mission::trajectory_length(r.trajectory);
  r.completed = true;
  r.dt = demo.dt;
  return r;
}

planner::MissionReport run_method(const std::string& method, const mission::Scenario& scenario,
                                  const ExperimentConfig& cfg) {
  if (method == "expert") return expert_report(scenario, cfg);
  if (method == "aif") {
    const auto model = train_world_model(scenario, cfg);
    auto pc = cfg.planner;
    pc.seed = scenario.seed;
    const auto cal = planner::calibrate(scenario, model, pc);
    auto r = planner::run_mission(scenario, model, pc, cal);
    r.method = "aif";
    return r;
  }
  if (method == "qlearning") {
    auto rc = cfg.rl;
    rc.seed = scenario.seed;
    const auto table = cfg.qtable_cache.empty() ? baseline::train_qlearning(scenario, rc)
                                                : baseline::cached_qlearning(scenario, rc, cfg.qtable_cache);
    auto r = baseline::rollout_policy(table, scenario, rc, rc.rollout_budget);
    r.method = "qlearning";
    return r;
  }
  fail(ErrorCode::InvalidArgument, "unknown method " + method);
}

std::vector<RunResult> run_experiment(const ExperimentConfig& cfg, std::span<const Cell> cells,
                                      int replicates, std::span<const std::string> methods,
                                      bool keep_reports) {
  cfg.validate();
  require(replicates >= 1, "replicates must be >= 1");
  std::vector<RunResult> jobs;
  for (const auto& m : methods) {
    require(config::is_method(m), "unknown method " + m);
    for (const auto& c : cells) {
      for (int s = 1; s <= replicates; ++s) {
        RunResult r;
        r.method = m;
        r.n_regions = c.n_regions;
        r.n_jammers = c.n_jammers;
        r.replicate = s;
        r.seed = scenario_seed(cfg.seed, c.n_regions, c.n_jammers, s);
        jobs.push_back(std::move(r));
      }
    }
  }
  parallel_for(jobs.size(), cfg.workers, [&](std::size_t i) {
    auto& r = jobs[i];
    try {
      const auto sc = make_scenario(cfg, r.n_regions, r.n_jammers, r.seed);
      auto rep = run_method(r.method, sc, cfg);
      r.total_interference = rep.total_interference;
      r.completion_steps = rep.completion_steps;
      r.path_length = rep.path_length;
      r.jammer_rmse = rep.jammer_rmse;
      r.jammer_misses = rep.jammer_misses;
      r.completed = rep.completed;
      if (keep_reports) {
        r.report = std::move(rep);
        r.scenario = sc;
      }
    } catch (const std::exception& e) {
      r.error = e.what();
      r.completed = false;
    }
  });
  std::sort(jobs.begin(), jobs.end(), [](const RunResult& a, const RunResult& b) { return key(a) < key(b); });
  return jobs;
}

std::vector<RunResult> run_experiment(const ExperimentConfig& cfg) {
  std::vector<Cell> cells;
  for (int n : cfg.regions) {
    for (int j : cfg.jammers) cells.push_back({n, j});
  }
  return run_experiment(cfg, cells, cfg.seeds, cfg.methods, cfg.trajectories);
}

std::string runs_csv(std::span<const RunResult> results) {
  std::ostringstream os;
  os << kRunsHeader << '\n';
  for (const auto& r : results) {
    os << r.method << ',' << r.n_regions << ',' << r.n_jammers << ',' << r.seed << ',';
    if (r.error.empty()) {
      os << num(r.total_interference) << ',' << r.completion_steps << ',' << num(r.path_length) << ',';
    } else {
      os << ",,,";
    }
    if (r.jammer_rmse) os << num(*r.jammer_rmse);
    os << ',' << (r.completed ? "true" : "false") << '\n';
  }
  return os.str();
}

std::string aggregate_csv(std::span<const RunResult> results) {
  // Grouped and ordered by cell; values summed in seed order so the output
  // does not depend on the input order.
  std::map<std::tuple<std::string, int, int>, std::vector<const RunResult*>> groups;
  for (const auto& r : results) groups[{r.method, r.n_regions, r.n_jammers}].push_back(&r);
  std::ostringstream os;
  os << "method,n_regions,n_jammers,runs,completed,errors,"
        "total_interference_mean,total_interference_std,completion_steps_mean,completion_steps_std,"
        "path_length_mean,path_length_std,jammer_rmse_mean,jammer_rmse_std,jammer_rmse_runs\n";
  for (auto& [k, rows] : groups) {
    std::sort(rows.begin(), rows.end(), [](const RunResult* a, const RunResult* b) { return key(*a) < key(*b); });
    std::vector<double> inter, steps, len, rm;
    int done = 0, errors = 0;
    for (const auto* r : rows) {
      if (!r->error.empty()) {
        ++errors;
        continue;
      }
      if (r->completed) ++done;
      inter.push_back(r->total_interference);
      steps.push_back(static_cast<double>(r->completion_steps));
      len.push_back(r->path_length);
      if (r->jammer_rmse) rm.push_back(*r->jammer_rmse);
    }
    const auto si = stats(inter), ss = stats(steps), sl = stats(len), sr = stats(rm);
    os << std::get<0>(k) << ',' << std::get<1>(k) << ',' << std::get<2>(k) << ',' << rows.size() << ','
       << done << ',' << errors << ',' << num(si.mean) << ',' << num(si.std) << ',' << num(ss.mean) << ','
       << num(ss.std) << ',' << num(sl.mean) << ',' << num(sl.std) << ',';
    if (!rm.empty()) os << num(sr.mean) << ',' << num(sr.std);
    else os << ',';
    os << ',' << rm.size() << '\n';
  }
  return os.str();
}

std::string trajectory_file_name(const RunResult& r) {
  return r.method + "_N" + std::to_string(r.n_regions) + "_J" + std::to_string(r.n_jammers) + "_" +
         std::to_string(r.seed) + ".json";
}

void emit_outputs(std::span<const RunResult> results, const std::string& dir) {
  require(!results.empty(), "no results to write");
  std::error_code ec;
  fs::create_directories(fs::path(dir) / "trajectories", ec);
  if (ec) fail(ErrorCode::Io, "cannot create " + dir + ": " + ec.message());
  io::write_file((fs::path(dir) / "runs.csv").string(), runs_csv(results));
  io::write_file((fs::path(dir) / "aggregate.csv").string(), aggregate_csv(results));
  std::string errors;
  for (const auto& r : results) {
    if (!r.error.empty()) {
      errors += r.method + " N=" + std::to_string(r.n_regions) + " J=" + std::to_string(r.n_jammers) +
                " seed=" + std::to_string(r.seed) + ": " + r.error + "\n";
    }
    if (r.report && r.scenario) {
      const auto j = io::to_json(*r.report, &*r.scenario);
      io::write_file((fs::path(dir) / "trajectories" / trajectory_file_name(r)).string(), j.dump() + "\n");
    }
  }
  const auto log = fs::path(dir) / "errors.log";
  if (!errors.empty()) io::write_file(log.string(), errors);
  else fs::remove(log, ec);
}

std::vector<std::string> audit(const std::string& dir) {
  const auto text = io::read_file((fs::path(dir) / "runs.csv").string());
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  if (line != kRunsHeader) return {"runs.csv header mismatch"};
  std::vector<std::string> bad;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != 9) {
      bad.push_back("malformed row: " + line);
      continue;
    }
    RunResult r;
    r.method = f[0];
    r.n_regions = std::stoi(f[1]);
    r.n_jammers = std::stoi(f[2]);
    r.seed = std::stoull(f[3]);
    if (f[4].empty()) continue;  // errored run, nothing persisted
    const auto path = fs::path(dir) / "trajectories" / trajectory_file_name(r);
    if (!fs::exists(path)) {
      bad.push_back("missing " + path.string());
      continue;
    }
    const auto j = io::read_json(path.string());
    const auto rep = io::report_from_json(j);
    const auto sc = io::scenario_from_json(j.at("scenario"));
    const std::string tag = trajectory_file_name(r) + ": ";
    if (sc.seed != r.seed) bad.push_back(tag + "seed");
    if (!close(mission::trajectory_interference(rep.trajectory, sc), std::stod(f[4]))) {
      bad.push_back(tag + "total_interference");
    }
    if (rep.trajectory.empty() || rep.trajectory.size() - 1 != std::stoull(f[5])) {
      bad.push_back(tag + "completion_steps");
    }
    if (!close(mission::trajectory_length(rep.trajectory), std::stod(f[6]))) bad.push_back(tag + "path_length");
    std::vector<geo::Vec2> est, truth;
    for (const auto& e : rep.estimates) est.emplace_back(e.x, e.y);
    for (const auto& jm : sc.jammers) truth.push_back(geo::xy(jm.position));
    std::optional<double> rm;
    if (!truth.empty()) {
      const auto res = planner::rmse(est, truth);
      if (res.matched > 0) rm = res.rmse;
    }
    if (rm.has_value() != !f[7].empty() || (rm && !close(*rm, std::stod(f[7])))) bad.push_back(tag + "jammer_rmse");
    if ((f[8] == "true") != rep.completed) bad.push_back(tag + "completed");
  }
  return bad;
}

std::vector<LocalizationRow> localization_summary(std::span<const RunResult> results) {
  std::map<int, LocalizationRow> rows;
  std::map<int, double> sq;
  for (const auto& r : results) {
    if (r.method != "aif") continue;
    auto& row = rows[r.n_jammers];
    row.n_jammers = r.n_jammers;
    ++row.runs;
    if (!r.error.empty()) {
      row.misses += static_cast<std::size_t>(r.n_jammers);
      continue;
    }
    row.misses += r.jammer_misses;
    const std::size_t matched = static_cast<std::size_t>(r.n_jammers) - std::min<std::size_t>(r.jammer_misses, r.n_jammers);
    if (r.jammer_rmse && matched > 0) {
      row.matched += matched;
      sq[r.n_jammers] += *r.jammer_rmse * *r.jammer_rmse * static_cast<double>(matched);
      row.worst_rmse = std::max(row.worst_rmse, *r.jammer_rmse);
    }
  }
  std::vector<LocalizationRow> out;
  for (auto& [j, row] : rows) {
    row.pooled_rmse = row.matched > 0 ? std::sqrt(sq[j] / static_cast<double>(row.matched)) : 0.0;
    out.push_back(row);
  }
  return out;
}

std::string localization_csv(std::span<const LocalizationRow> rows) {
  std::ostringstream os;
  os << "n_jammers,runs,matched,misses,pooled_rmse,worst_rmse\n";
  for (const auto& r : rows) {
    os << r.n_jammers << ',' << r.runs << ',' << r.matched << ',' << r.misses << ','
       << (r.matched > 0 ? num(r.pooled_rmse) : "") << ',' << (r.matched > 0 ? num(r.worst_rmse) : "") << '\n';
  }
  return os.str();
}

bool all_completed(std::span<const RunResult> results) {
  return std::all_of(results.begin(), results.end(),
                     [](const RunResult& r) { return r.error.empty() && r.completed; });
}

}  // namespace antijam::harness
