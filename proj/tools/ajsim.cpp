// Command-line front end. Talks to the simulation only through antijam.h.
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "antijam/antijam.h"

namespace fs = std::filesystem;

namespace {

struct Failure {
  int code;
};

void check(aj_status s, const char* what) {
  if (s != AJ_OK) {
    std::fprintf(stderr, "error: %s: %s\n", what, aj_last_error());
    throw Failure{2};
  }
}

template <class T, void (*F)(T*)>
struct Deleter {
  void operator()(T* p) const { F(p); }
};
using Config = std::unique_ptr<aj_config, Deleter<aj_config, aj_config_free>>;
using ScenarioPtr = std::unique_ptr<aj_scenario, Deleter<aj_scenario, aj_scenario_free>>;
using Model = std::unique_ptr<aj_model, Deleter<aj_model, aj_model_free>>;
using Report = std::unique_ptr<aj_report, Deleter<aj_report, aj_report_free>>;

std::string take(char* s) {
  std::string out = s ? s : "";
  aj_string_free(s);
  return out;
}

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<int> workers;
};

Config load_config(const Globals& g) {
  aj_config* raw = nullptr;
  if (g.config.empty()) check(aj_config_default(&raw), "default config");
  else check(aj_config_load(g.config.c_str(), &raw), "load config");
  Config cfg(raw);
  std::string patch = "{";
  auto add = [&](const std::string& kv) {
    if (patch.size() > 1) patch += ',';
    patch += kv;
  };
  if (g.seed) add("\"seed\":" + std::to_string(*g.seed));
  if (!g.out.empty()) {
    // Escape through the library's own JSON writer would need another call;
    // paths with quotes or backslashes are rejected instead.
    if (g.out.find_first_of("\"\\") != std::string::npos) {
      std::fprintf(stderr, "error: --out must not contain quotes or backslashes\n");
      throw Failure{2};
    }
    add("\"out\":\"" + g.out + "\"");
  }
  if (g.workers) add("\"workers\":" + std::to_string(*g.workers));
  patch += "}";
  check(aj_config_merge(cfg.get(), patch.c_str()), "apply flags");
  return cfg;
}

std::string out_dir(const Config& cfg) {
  char* s = nullptr;
  check(aj_config_out_dir(cfg.get(), &s), "out dir");
  const std::string dir = take(s);
  fs::create_directories(dir);
  return dir;
}

std::string in_out(const std::string& dir, const std::string& name) { return (fs::path(dir) / name).string(); }

// A scenario from --scenario, else generated from --regions/--jammers/--seed.
struct ScenarioSource {
  std::string path;
  int regions = 6;
  int jammers = 1;
};

ScenarioPtr scenario(const Config& cfg, const Globals& g, const ScenarioSource& src) {
  aj_scenario* raw = nullptr;
  if (!src.path.empty()) {
    check(aj_scenario_load(src.path.c_str(), &raw), "load scenario");
  } else {
    check(aj_scenario_generate(cfg.get(), src.regions, src.jammers, g.seed.value_or(1), &raw),
          "generate scenario");
  }
  return ScenarioPtr(raw);
}

void add_scenario_options(CLI::App* cmd, ScenarioSource& src) {
  cmd->add_option("--scenario", src.path, "scenario JSON; overrides --regions/--jammers");
  cmd->add_option("--regions", src.regions, "number of regions of a generated scenario")->check(CLI::Range(2, 14));
  cmd->add_option("--jammers", src.jammers, "number of jammers of a generated scenario")->check(CLI::NonNegativeNumber);
}

int sweep(const Config& cfg, aj_sweep_kind kind) {
  const auto dir = out_dir(cfg);
  int ok = 0;
  check(aj_sweep(cfg.get(), kind, dir.c_str(), &ok), "sweep");
  std::printf("wrote %s\n", dir.c_str());
  if (!ok) std::fprintf(stderr, "some runs did not complete, see runs.csv and errors.log\n");
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"UAV anti-jamming simulation"};
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--config", g.config, "JSON config file")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "base seed (scenario seed for single-scenario commands)");
  app.add_option("--out", g.out, "output directory");
  app.add_option("--workers", g.workers, "worker threads, 0 = all cores")->check(CLI::NonNegativeNumber);

  auto* gen_sc = app.add_subcommand("gen-scenarios", "write one scenario JSON per sweep run");
  auto* dump = app.add_subcommand("dump-config", "print the effective config");

  ScenarioSource demo_src;
  auto* gen_demos = app.add_subcommand("gen-demos", "expert H0/H1 demonstrations on training maps");
  add_scenario_options(gen_demos, demo_src);

  std::string demos_dir;
  auto* train = app.add_subcommand("train-wm", "learn the world model from demonstrations");
  train->add_option("--demos", demos_dir, "directory holding d0.jsonl and d1.jsonl (default <out>)");

  ScenarioSource run_src;
  std::string method = "aif";
  std::string model_path;
  auto* run = app.add_subcommand("run-mission", "fly one mission and write report.json");
  add_scenario_options(run, run_src);
  run->add_option("--method", method, "expert, aif or qlearning")
      ->check(CLI::IsMember({"expert", "aif", "qlearning"}));
  run->add_option("--model", model_path, "world model JSON (aif; trained on the fly if absent)");

  auto* sweep_r = app.add_subcommand("sweep-regions", "all methods over regions x jammers");
  auto* sweep_j = app.add_subcommand("sweep-jammers", "all methods over jammers at fixed_regions");
  auto* eval_loc = app.add_subcommand("eval-localization", "jammer localization error per jammer count");

  ScenarioSource base_src;
  auto* base = app.add_subcommand("baseline-train", "train the Q-learning baseline of one scenario");
  add_scenario_options(base, base_src);

  std::string audit_dir;
  auto* audit = app.add_subcommand("audit", "recompute runs.csv rows from the trajectory files");
  audit->add_option("dir", audit_dir, "sweep output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*audit) {
      std::size_t bad = 0;
      check(aj_audit(audit_dir.c_str(), &bad), "audit");
      if (bad) {
        std::fprintf(stderr, "%zu mismatches, first: %s\n", bad, aj_last_error());
        return 1;
      }
      std::printf("audit ok\n");
      return 0;
    }

    const Config cfg = load_config(g);

    if (*dump) {
      char* s = nullptr;
      check(aj_config_to_json(cfg.get(), &s), "config");
      std::fputs(take(s).c_str(), stdout);
      return 0;
    }

    if (*gen_sc) {
      const auto dir = in_out(out_dir(cfg), "scenarios");
      std::size_t n = 0;
      check(aj_gen_scenarios(cfg.get(), dir.c_str(), &n), "generate scenarios");
      std::printf("wrote %zu scenarios to %s\n", n, dir.c_str());
      return 0;
    }
    if (*sweep_r) return sweep(cfg, AJ_SWEEP_REGIONS);
    if (*sweep_j) return sweep(cfg, AJ_SWEEP_JAMMERS);
    if (*eval_loc) return sweep(cfg, AJ_SWEEP_LOCALIZATION);

    if (*gen_demos) {
      const auto sc = scenario(cfg, g, demo_src);
      const auto dir = out_dir(cfg);
      std::size_t n = 0;
      check(aj_scenario_save(sc.get(), in_out(dir, "scenario.json").c_str()), "save scenario");
      check(aj_demos_generate(cfg.get(), sc.get(), dir.c_str(), &n), "demos");
      std::printf("wrote %zu H0/H1 pairs to %s\n", n, dir.c_str());
      return 0;
    }

    if (*train) {
      const auto dir = out_dir(cfg);
      const std::string src = demos_dir.empty() ? dir : demos_dir;
      aj_model* raw = nullptr;
      check(aj_model_train(cfg.get(), in_out(src, "d0.jsonl").c_str(), in_out(src, "d1.jsonl").c_str(), &raw),
            "train world model");
      const Model m(raw);
      check(aj_model_save(m.get(), in_out(dir, "model.json").c_str()), "save model");
      std::printf("wrote %s\n", in_out(dir, "model.json").c_str());
      return 0;
    }

    if (*run) {
      const auto sc = scenario(cfg, g, run_src);
      Model m;
      if (!model_path.empty()) {
        aj_model* raw = nullptr;
        check(aj_model_load(model_path.c_str(), &raw), "load model");
        m.reset(raw);
      }
      aj_report* raw = nullptr;
      check(aj_run_mission(cfg.get(), sc.get(), method.c_str(), m.get(), &raw), "run mission");
      const Report r(raw);
      aj_metrics mt{};
      check(aj_report_metrics(r.get(), &mt), "metrics");
      const auto dir = out_dir(cfg);
      check(aj_report_save(r.get(), in_out(dir, "report.json").c_str()), "save report");
      std::printf("method=%s total_interference=%.12g completion_steps=%llu path_length=%.12g", method.c_str(),
                  mt.total_interference, static_cast<unsigned long long>(mt.completion_steps), mt.path_length);
      if (mt.has_rmse) std::printf(" jammer_rmse=%.12g", mt.jammer_rmse);
      std::printf(" completed=%s\n", mt.completed ? "true" : "false");
      return mt.completed ? 0 : 1;
    }

    if (*base) {
      const auto sc = scenario(cfg, g, base_src);
      const auto dir = out_dir(cfg);
      std::size_t states = 0;
      check(aj_baseline_train(cfg.get(), sc.get(), in_out(dir, "qtables").c_str(),
                              in_out(dir, "returns.txt").c_str(), &states),
            "train baseline");
      std::printf("trained Q-table with %zu stored states in %s\n", states, in_out(dir, "qtables").c_str());
      return 0;
    }
  } catch (const Failure& f) {
    return f.code;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
