#include <doctest.h>

#include <antijam/antijam.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

fs::path work(const std::string& name) {
  const auto d = fs::current_path() / "capi_work" / name;
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

aj_config* small_config() {
  aj_config* cfg = nullptr;
  REQUIRE(aj_config_default(&cfg) == AJ_OK);
  REQUIRE(aj_config_merge(cfg, R"({"regions": [4], "jammers": [1], "seeds": 1, "workers": 1,
                                   "rl": {"episodes": 300}})") == AJ_OK);
  return cfg;
}

}  // namespace

TEST_CASE("version and error reporting") {
  CHECK(std::strlen(aj_version()) > 0);
  CHECK(aj_config_default(nullptr) == AJ_ERR_INVALID_ARGUMENT);
  CHECK(std::strlen(aj_last_error()) > 0);
  aj_config* cfg = nullptr;
  CHECK(aj_config_load("does/not/exist.json", &cfg) != AJ_OK);
  CHECK(cfg == nullptr);
  aj_config_free(nullptr);
  aj_scenario_free(nullptr);
  aj_model_free(nullptr);
  aj_report_free(nullptr);
  aj_string_free(nullptr);
}

TEST_CASE("config merge validates and leaves the config intact on error") {
  aj_config* cfg = nullptr;
  REQUIRE(aj_config_default(&cfg) == AJ_OK);
  char* before = nullptr;
  REQUIRE(aj_config_to_json(cfg, &before) == AJ_OK);
  CHECK(aj_config_merge(cfg, R"({"seeds": 0})") == AJ_ERR_INVALID_ARGUMENT);
  CHECK(aj_config_merge(cfg, R"({"no_such_key": 1})") == AJ_ERR_PARSE);
  CHECK(aj_config_merge(cfg, "{not json") == AJ_ERR_PARSE);
  char* after = nullptr;
  REQUIRE(aj_config_to_json(cfg, &after) == AJ_OK);
  CHECK(std::string(before) == std::string(after));
  aj_string_free(after);

  REQUIRE(aj_config_merge(cfg, R"({"out": "elsewhere"})") == AJ_OK);
  char* out = nullptr;
  REQUIRE(aj_config_out_dir(cfg, &out) == AJ_OK);
  CHECK(std::string(out) == "elsewhere");
  aj_string_free(out);

  const auto dir = work("config");
  REQUIRE(aj_config_to_json(cfg, &after) == AJ_OK);
  std::ofstream(dir / "c.json") << after;
  aj_config* loaded = nullptr;
  REQUIRE(aj_config_load((dir / "c.json").string().c_str(), &loaded) == AJ_OK);
  char* again = nullptr;
  REQUIRE(aj_config_to_json(loaded, &again) == AJ_OK);
  CHECK(std::string(again) == std::string(after));
  aj_string_free(before);
  aj_string_free(after);
  aj_string_free(again);
  aj_config_free(loaded);
  aj_config_free(cfg);
}

TEST_CASE("scenario round trip") {
  aj_config* cfg = small_config();
  const uint64_t seed = aj_scenario_seed(1, 5, 2, 1);
  aj_scenario* s = nullptr;
  REQUIRE(aj_scenario_generate(cfg, 5, 2, seed, &s) == AJ_OK);
  int n = 0, j = 0;
  uint64_t got = 0;
  REQUIRE(aj_scenario_counts(s, &n, &j, &got) == AJ_OK);
  CHECK(n == 5);
  CHECK(j == 2);
  CHECK(got == seed);
  const auto dir = work("scenario");
  const auto a = (dir / "a.json").string(), b = (dir / "b.json").string();
  REQUIRE(aj_scenario_save(s, a.c_str()) == AJ_OK);
  aj_scenario* back = nullptr;
  REQUIRE(aj_scenario_load(a.c_str(), &back) == AJ_OK);
  REQUIRE(aj_scenario_save(back, b.c_str()) == AJ_OK);
  CHECK(slurp(a) == slurp(b));
  CHECK(aj_scenario_load((dir / "missing.json").string().c_str(), &back) != AJ_OK);
  std::ofstream(dir / "bad.json") << "{\"schema_version\": 99}";
  aj_scenario* bad = nullptr;
  CHECK(aj_scenario_load((dir / "bad.json").string().c_str(), &bad) == AJ_ERR_PARSE);
  CHECK(bad == nullptr);

  size_t count = 0;
  REQUIRE(aj_gen_scenarios(cfg, (dir / "all").string().c_str(), &count) == AJ_OK);
  CHECK(count == 1);
  const auto name = "scenario_N4_J1_" + std::to_string(aj_scenario_seed(1, 4, 1, 1)) + ".json";
  CHECK(fs::exists(dir / "all" / name));
  aj_scenario_free(back);
  aj_scenario_free(s);
  aj_config_free(cfg);
}

TEST_CASE("demonstrations, model and missions") {
  aj_config* cfg = small_config();
  aj_scenario* s = nullptr;
  REQUIRE(aj_scenario_generate(cfg, 4, 1, aj_scenario_seed(1, 4, 1, 1), &s) == AJ_OK);
  const auto dir = work("mission");
  size_t pairs = 0;
  REQUIRE(aj_demos_generate(cfg, s, dir.string().c_str(), &pairs) == AJ_OK);
  CHECK(pairs >= 1);
  CHECK(fs::exists(dir / "d0.jsonl"));
  CHECK(fs::exists(dir / "d1.jsonl"));

  aj_model* m = nullptr;
  REQUIRE(aj_model_train(cfg, (dir / "d0.jsonl").string().c_str(), (dir / "d1.jsonl").string().c_str(),
                         &m) == AJ_OK);
  const auto mp = (dir / "model.json").string();
  REQUIRE(aj_model_save(m, mp.c_str()) == AJ_OK);
  aj_model* m2 = nullptr;
  REQUIRE(aj_model_load(mp.c_str(), &m2) == AJ_OK);

  aj_report* r = nullptr;
  REQUIRE(aj_run_mission(cfg, s, "aif", m2, &r) == AJ_OK);
  aj_metrics met{};
  REQUIRE(aj_report_metrics(r, &met) == AJ_OK);
  CHECK(met.completed == 1);
  CHECK(met.completion_steps > 0);
  CHECK(met.path_length > 0.0);
  REQUIRE(aj_report_save(r, (dir / "aif.json").string().c_str()) == AJ_OK);
  aj_report_free(r);

  REQUIRE(aj_run_mission(cfg, s, "expert", nullptr, &r) == AJ_OK);
  REQUIRE(aj_report_metrics(r, &met) == AJ_OK);
  CHECK(met.total_interference == 0.0);
  CHECK(met.completed == 1);
  aj_report_free(r);

  REQUIRE(aj_run_mission(cfg, s, "qlearning", nullptr, &r) == AJ_OK);
  aj_report_free(r);
  CHECK(aj_run_mission(cfg, s, "dqn", nullptr, &r) == AJ_ERR_INVALID_ARGUMENT);

  size_t states = 0;
  const auto returns = (dir / "returns.txt").string();
  REQUIRE(aj_baseline_train(cfg, s, (dir / "qt").string().c_str(), returns.c_str(), &states) == AJ_OK);
  CHECK(states > 0);
  std::istringstream lines(slurp(returns));
  std::string line;
  int n = 0;
  while (std::getline(lines, line)) ++n;
  CHECK(n == 300);

  aj_model_free(m2);
  aj_model_free(m);
  aj_scenario_free(s);
  aj_config_free(cfg);
}

TEST_CASE("sweep writes auditable outputs") {
  aj_config* cfg = small_config();
  // 300 episodes are too few for the Q-learning tour to close.
  REQUIRE(aj_config_merge(cfg, R"({"methods": ["expert", "aif"]})") == AJ_OK);
  const auto dir = work("sweep");
  int all = 0;
  REQUIRE(aj_sweep(cfg, AJ_SWEEP_REGIONS, dir.string().c_str(), &all) == AJ_OK);
  CHECK(all == 1);
  CHECK(fs::exists(dir / "runs.csv"));
  CHECK(fs::exists(dir / "aggregate.csv"));
  size_t bad = 99;
  REQUIRE(aj_audit(dir.string().c_str(), &bad) == AJ_OK);
  CHECK(bad == 0);
  const auto first = slurp(dir / "runs.csv");
  REQUIRE(aj_sweep(cfg, AJ_SWEEP_REGIONS, dir.string().c_str(), nullptr) == AJ_OK);
  CHECK(slurp(dir / "runs.csv") == first);
  aj_config_free(cfg);
}
