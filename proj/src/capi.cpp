#include "antijam/antijam.h"

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <new>
#include <string>

#include "antijam/config.hpp"
#include "antijam/error.hpp"
#include "antijam/harness.hpp"
#include "antijam/serialization.hpp"

struct aj_config {
  antijam::config::ExperimentConfig c;
};
struct aj_scenario {
  antijam::mission::Scenario s;
};
struct aj_model {
  antijam::wm::WorldModel m;
};
struct aj_report {
  antijam::planner::MissionReport r;
  antijam::mission::Scenario s;
};

namespace {

using namespace antijam;

thread_local std::string g_last_error;

aj_status to_status(ErrorCode c) {
  switch (c) {
    case ErrorCode::InvalidArgument: return AJ_ERR_INVALID_ARGUMENT;
    case ErrorCode::Geometry: return AJ_ERR_GEOMETRY;
    case ErrorCode::Infeasible: return AJ_ERR_INFEASIBLE;
    case ErrorCode::NotFound: return AJ_ERR_NOT_FOUND;
    case ErrorCode::Io: return AJ_ERR_IO;
    case ErrorCode::Parse: return AJ_ERR_PARSE;
    case ErrorCode::State: return AJ_ERR_STATE;
  }
  return AJ_ERR_INTERNAL;
}

template <class F>
aj_status guard(F&& f) {
  try {
    f();
    return AJ_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const nlohmann::json::exception& e) {
    g_last_error = e.what();
    return AJ_ERR_PARSE;
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return AJ_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return AJ_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return AJ_ERR_INTERNAL;
  }
}

void need(const void* p, const char* name) {
  if (!p) fail(ErrorCode::InvalidArgument, std::string(name) + " is NULL");
}

char* dup(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

}  // namespace

extern "C" {

const char* aj_version(void) { return "1.0.0"; }

const char* aj_last_error(void) { return g_last_error.c_str(); }

void aj_string_free(char* s) { std::free(s); }

aj_status aj_config_default(aj_config** out) {
  return guard([&] {
    need(out, "out");
    *out = new aj_config{};
  });
}

aj_status aj_config_load(const char* path, aj_config** out) {
  return guard([&] {
    need(path, "path");
    need(out, "out");
    *out = new aj_config{config::load(path)};
  });
}

aj_status aj_config_merge(aj_config* cfg, const char* json_patch) {
  return guard([&] {
    need(cfg, "cfg");
    need(json_patch, "json_patch");
    auto j = config::to_json(cfg->c);
    j.merge_patch(nlohmann::json::parse(json_patch));
    cfg->c = config::from_json(j);
  });
}

aj_status aj_config_to_json(const aj_config* cfg, char** out) {
  return guard([&] {
    need(cfg, "cfg");
    need(out, "out");
    *out = dup(config::to_json(cfg->c).dump(2) + "\n");
  });
}

aj_status aj_config_out_dir(const aj_config* cfg, char** out) {
  return guard([&] {
    need(cfg, "cfg");
    need(out, "out");
    *out = dup(cfg->c.out);
  });
}

void aj_config_free(aj_config* cfg) { delete cfg; }

uint64_t aj_scenario_seed(uint64_t base, int n_regions, int n_jammers, int replicate) {
  return harness::scenario_seed(base, n_regions, n_jammers, replicate);
}

aj_status aj_scenario_generate(const aj_config* cfg, int n_regions, int n_jammers, uint64_t seed,
                               aj_scenario** out) {
  return guard([&] {
    need(cfg, "cfg");
    need(out, "out");
    *out = new aj_scenario{harness::make_scenario(cfg->c, n_regions, n_jammers, seed)};
  });
}

aj_status aj_scenario_load(const char* path, aj_scenario** out) {
  return guard([&] {
    need(path, "path");
    need(out, "out");
    *out = new aj_scenario{io::scenario_from_json(io::read_json(path))};
  });
}

aj_status aj_scenario_save(const aj_scenario* s, const char* path) {
  return guard([&] {
    need(s, "scenario");
    need(path, "path");
    io::write_file(path, io::to_json(s->s).dump(2) + "\n");
  });
}

aj_status aj_scenario_counts(const aj_scenario* s, int* n_regions, int* n_jammers, uint64_t* seed) {
  return guard([&] {
    need(s, "scenario");
    if (n_regions) *n_regions = static_cast<int>(s->s.regions.size());
    if (n_jammers) *n_jammers = static_cast<int>(s->s.jammers.size());
    if (seed) *seed = s->s.seed;
  });
}

void aj_scenario_free(aj_scenario* s) { delete s; }

aj_status aj_gen_scenarios(const aj_config* cfg, const char* dir, size_t* count) {
  return guard([&] {
    need(cfg, "cfg");
    need(dir, "dir");
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) fail(ErrorCode::Io, std::string("cannot create ") + dir);
    std::size_t n = 0;
    for (int r : cfg->c.regions) {
      for (int j : cfg->c.jammers) {
        for (int k = 1; k <= cfg->c.seeds; ++k) {
          const auto seed = harness::scenario_seed(cfg->c.seed, r, j, k);
          const auto sc = harness::make_scenario(cfg->c, r, j, seed);
          const auto name = "scenario_N" + std::to_string(r) + "_J" + std::to_string(j) + "_" +
                            std::to_string(seed) + ".json";
          io::write_file((std::filesystem::path(dir) / name).string(), io::to_json(sc).dump(2) + "\n");
          ++n;
        }
      }
    }
    if (count) *count = n;
  });
}

aj_status aj_demos_generate(const aj_config* cfg, const aj_scenario* s, const char* dir,
                            size_t* count) {
  return guard([&] {
    need(cfg, "cfg");
    need(s, "scenario");
    need(dir, "dir");
    const auto set = harness::training_set(s->s, cfg->c);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) fail(ErrorCode::Io, std::string("cannot create ") + dir);
    io::write_jsonl((std::filesystem::path(dir) / "d0.jsonl").string(), set.d0);
    io::write_jsonl((std::filesystem::path(dir) / "d1.jsonl").string(), set.d1);
    if (count) *count = set.d1.size();
  });
}

aj_status aj_model_train(const aj_config* cfg, const char* d0_path, const char* d1_path,
                         aj_model** out) {
  return guard([&] {
    need(cfg, "cfg");
    need(d0_path, "d0_path");
    need(d1_path, "d1_path");
    need(out, "out");
    const auto d0 = io::read_jsonl(d0_path);
    const auto d1 = io::read_jsonl(d1_path);
    for (const auto& d : d0) require(d.hypothesis == mission::Hypothesis::H0, "d0 holds an H1 demonstration");
    for (const auto& d : d1) require(d.hypothesis == mission::Hypothesis::H1, "d1 holds an H0 demonstration");
    auto params = cfg->c.worldmodel;
    params.gng.seed = cfg->c.seed;
    *out = new aj_model{wm::train_world_model(d0, d1, cfg->c.generator.catalog, params)};
  });
}

aj_status aj_model_load(const char* path, aj_model** out) {
  return guard([&] {
    need(path, "path");
    need(out, "out");
    *out = new aj_model{io::world_model_from_json(io::read_json(path))};
  });
}

aj_status aj_model_save(const aj_model* m, const char* path) {
  return guard([&] {
    need(m, "model");
    need(path, "path");
    io::write_file(path, io::to_json(m->m).dump() + "\n");
  });
}

void aj_model_free(aj_model* m) { delete m; }

aj_status aj_run_mission(const aj_config* cfg, const aj_scenario* s, const char* method,
                         const aj_model* model, aj_report** out) {
  return guard([&] {
    need(cfg, "cfg");
    need(s, "scenario");
    need(method, "method");
    need(out, "out");
    const std::string m = method;
    planner::MissionReport r;
    if (m == "aif" && model) {
      auto pc = cfg->c.planner;
      pc.seed = s->s.seed;
      const auto cal = planner::calibrate(s->s, model->m, pc);
      r = planner::run_mission(s->s, model->m, pc, cal);
      r.method = "aif";
    } else {
      r = harness::run_method(m, s->s, cfg->c);
    }
    *out = new aj_report{std::move(r), s->s};
  });
}

aj_status aj_report_metrics(const aj_report* r, aj_metrics* out) {
  return guard([&] {
    need(r, "report");
    need(out, "out");
    const auto& p = r->r;
    out->total_interference = p.total_interference;
    out->completion_steps = p.completion_steps;
    out->path_length = p.path_length;
    out->has_rmse = p.jammer_rmse.has_value() ? 1 : 0;
    out->jammer_rmse = p.jammer_rmse.value_or(0.0);
    out->jammer_misses = p.jammer_misses;
    out->completed = p.completed ? 1 : 0;
    out->triggered = p.triggered ? 1 : 0;
  });
}

aj_status aj_report_save(const aj_report* r, const char* path) {
  return guard([&] {
    need(r, "report");
    need(path, "path");
    io::write_file(path, io::to_json(r->r, &r->s).dump() + "\n");
  });
}

void aj_report_free(aj_report* r) { delete r; }

aj_status aj_sweep(const aj_config* cfg, aj_sweep_kind kind, const char* out_dir, int* all_completed) {
  return guard([&] {
    need(cfg, "cfg");
    const auto& c = cfg->c;
    const std::string dir = out_dir ? out_dir : c.out;
    std::vector<harness::Cell> cells;
    std::vector<harness::RunResult> results;
    switch (kind) {
      case AJ_SWEEP_REGIONS:
        results = harness::run_experiment(c);
        break;
      case AJ_SWEEP_JAMMERS:
        for (int j : c.jammers) cells.push_back({c.fixed_regions, j});
        results = harness::run_experiment(c, cells, c.seeds, c.methods, c.trajectories);
        break;
      case AJ_SWEEP_LOCALIZATION: {
        for (int j : c.jammers) cells.push_back({c.fixed_regions, j});
        const std::vector<std::string> aif{"aif"};
        results = harness::run_experiment(c, cells, c.localization_seeds, aif, c.trajectories);
        break;
      }
      default:
        fail(ErrorCode::InvalidArgument, "unknown sweep kind");
    }
    harness::emit_outputs(results, dir);
    if (kind == AJ_SWEEP_LOCALIZATION) {
      const auto rows = harness::localization_summary(results);
      io::write_file((std::filesystem::path(dir) / "localization.csv").string(), harness::localization_csv(rows));
    }
    if (all_completed) *all_completed = harness::all_completed(results) ? 1 : 0;
  });
}

aj_status aj_audit(const char* dir, size_t* mismatches) {
  return guard([&] {
    need(dir, "dir");
    const auto bad = harness::audit(dir);
    if (mismatches) *mismatches = bad.size();
    if (!bad.empty()) g_last_error = bad.front();
  });
}

aj_status aj_baseline_train(const aj_config* cfg, const aj_scenario* s, const char* cache_dir,
                            const char* returns_path, size_t* stored_states) {
  return guard([&] {
    need(cfg, "cfg");
    need(s, "scenario");
    auto rc = cfg->c.rl;
    rc.seed = s->s.seed;
    baseline::TrainingTrace trace;
    const auto table = baseline::train_qlearning(s->s, rc, &trace);
    if (cache_dir) {
      std::error_code ec;
      std::filesystem::create_directories(cache_dir, ec);
      const auto path = std::filesystem::path(cache_dir) / baseline::cache_file_name(s->s.seed, rc);
      table.save(path.string(), s->s.seed, rc.hash());
    }
    if (returns_path) {
      std::string text;
      char buf[40];
      for (double r : trace.episode_returns) {
        std::snprintf(buf, sizeof buf, "%.12g\n", r);
        text += buf;
      }
      io::write_file(returns_path, text);
    }
    if (stored_states) *stored_states = table.stored_states();
  });
}

}  // extern "C"
