#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <sstream>

#include "antijam/error.hpp"
#include "antijam/harness.hpp"
#include "antijam/serialization.hpp"

using namespace antijam;
using namespace antijam::harness;
namespace fs = std::filesystem;

namespace {

config::ExperimentConfig small_config() {
  config::ExperimentConfig c;
  c.regions = {4};
  c.jammers = {1};
  c.seeds = 2;
  c.rl.episodes = 400;
  c.workers = 2;
  return c;
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> f;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) f.push_back(cell);
    if (!line.empty() && line.back() == ',') f.emplace_back();
    rows.push_back(f);
  }
  return rows;
}

fs::path fresh_dir(const std::string& name) {
  const auto d = fs::temp_directory_path() / name;
  fs::remove_all(d);
  return d;
}

// One shared sweep for the tests below; it is the slow part.
const std::vector<RunResult>& shared_results() {
  static const std::vector<RunResult> rs = [] {
    const auto cfg = small_config();
    const std::vector<Cell> cells{{4, 1}, {4, 2}};
    return run_experiment(cfg, cells, 2, cfg.methods, true);
  }();
  return rs;
}

}  // namespace

TEST_CASE("single expert run on a jam-free map") {
  auto cfg = small_config();
  const std::vector<Cell> cells{{4, 0}};
  const std::vector<std::string> methods{"expert"};
  const auto rs = run_experiment(cfg, cells, 1, methods, false);
  REQUIRE(rs.size() == 1);
  CHECK(rs[0].error.empty());
  CHECK(rs[0].completed);
  CHECK(rs[0].total_interference == 0.0);
  CHECK(rs[0].seed == scenario_seed(cfg.seed, 4, 0, 1));  // replicates count from 1
  const auto rows = parse_csv(runs_csv(rs));
  REQUIRE(rows.size() == 2);
  CHECK(rows[1][0] == "expert");
  CHECK(rows[1][4] == "0");
}

TEST_CASE("runs.csv header is fixed") {
  const auto text = runs_csv(shared_results());
  CHECK(text.substr(0, text.find('\n')) ==
        "method,n_regions,n_jammers,seed,total_interference,completion_steps,path_length,jammer_rmse,"
        "completed");
  CHECK(parse_csv(text).size() == 1 + 2 * 2 * 3);
}

TEST_CASE("every run of the shared sweep finished") {
  for (const auto& r : shared_results()) {
    CHECK_MESSAGE(r.error.empty(), r.method << " " << r.seed << ": " << r.error);
    if (r.method == "expert") CHECK(r.total_interference == 0.0);
    if (r.method == "aif") CHECK(r.completed);
  }
}

TEST_CASE("same config gives identical CSV bytes whatever the worker count") {
  const auto cfg = small_config();
  const std::vector<Cell> cells{{4, 1}, {4, 2}};
  auto one = cfg;
  one.workers = 1;
  const auto a = run_experiment(one, cells, 2, cfg.methods, false);
  CHECK(runs_csv(a) == runs_csv(shared_results()));
  CHECK(aggregate_csv(a) == aggregate_csv(shared_results()));
}

TEST_CASE("aggregate means equal hand averages of the rows") {
  const auto& rs = shared_results();
  const auto agg = parse_csv(aggregate_csv(rs));
  const auto& head = agg[0];
  auto col = [&](const std::string& name) {
    return static_cast<std::size_t>(std::find(head.begin(), head.end(), name) - head.begin());
  };
  REQUIRE(agg.size() == 1 + 3 * 2);
  for (std::size_t i = 1; i < agg.size(); ++i) {
    const auto& row = agg[i];
    std::vector<const RunResult*> mine;
    for (const auto& r : rs) {
      if (r.method == row[0] && std::to_string(r.n_regions) == row[1] && std::to_string(r.n_jammers) == row[2]) {
        mine.push_back(&r);
      }
    }
    REQUIRE(mine.size() == 2);
    double inter = 0.0, steps = 0.0, len = 0.0;
    for (const auto* r : mine) {
      inter += r->total_interference;
      steps += static_cast<double>(r->completion_steps);
      len += r->path_length;
    }
    CHECK(std::stod(row[col("runs")]) == 2.0);
    CHECK(std::stod(row[col("total_interference_mean")]) == doctest::Approx(inter / 2).epsilon(1e-10));
    CHECK(std::stod(row[col("completion_steps_mean")]) == doctest::Approx(steps / 2).epsilon(1e-10));
    CHECK(std::stod(row[col("path_length_mean")]) == doctest::Approx(len / 2).epsilon(1e-10));
    const double d = mine[0]->path_length - mine[1]->path_length;
    CHECK(std::stod(row[col("path_length_std")]) == doctest::Approx(std::abs(d) / std::sqrt(2.0)).epsilon(1e-10));
  }
}

TEST_CASE("aggregates are invariant under the order of the rows") {
  auto rs = shared_results();
  const auto ref = aggregate_csv(rs);
  std::reverse(rs.begin(), rs.end());
  CHECK(aggregate_csv(rs) == ref);
  std::rotate(rs.begin(), rs.begin() + 5, rs.end());
  CHECK(aggregate_csv(rs) == ref);
}

TEST_CASE("emit_outputs writes the artifacts and they audit clean") {
  const auto dir = fresh_dir("antijam_emit_test");
  emit_outputs(shared_results(), dir.string());
  CHECK(fs::exists(dir / "runs.csv"));
  CHECK(fs::exists(dir / "aggregate.csv"));
  CHECK(fs::is_directory(dir / "trajectories"));
  CHECK_FALSE(fs::exists(dir / "errors.log"));
  std::size_t files = 0;
  for (const auto& e : fs::directory_iterator(dir / "trajectories")) {
    (void)e;
    ++files;
  }
  CHECK(files == shared_results().size());

  const auto& r = shared_results().front();
  const auto j = io::read_json((dir / "trajectories" / trajectory_file_name(r)).string());
  const auto back = io::report_from_json(j);
  CHECK(io::to_json(back).dump() == io::to_json(*r.report).dump());
  CHECK(io::scenario_from_json(j.at("scenario")).seed == r.seed);

  CHECK(audit(dir.string()).empty());

  // Tampering with one metric is caught.
  auto text = io::read_file((dir / "runs.csv").string());
  auto rows = parse_csv(text);
  rows[1][6] = std::to_string(std::stod(rows[1][6]) + 10.0);
  std::string out;
  for (const auto& row : rows) {
    for (std::size_t k = 0; k < row.size(); ++k) out += (k ? "," : "") + row[k];
    out += "\n";
  }
  io::write_file((dir / "runs.csv").string(), out);
  CHECK(audit(dir.string()).size() == 1);
  fs::remove_all(dir);
}

TEST_CASE("errors are recorded per run and the sweep goes on") {
  auto cfg = small_config();
  cfg.generator.side = 150.0;  // ten separated regions cannot fit
  const std::vector<Cell> cells{{10, 0}, {4, 0}};
  const std::vector<std::string> methods{"expert"};
  auto tight = cfg;
  tight.generator.max_retries = 50;
  const auto rs = run_experiment(tight, cells, 1, methods, true);
  REQUIRE(rs.size() == 2);
  const auto& bad = rs[0].n_regions == 10 ? rs[0] : rs[1];
  CHECK_FALSE(bad.error.empty());
  CHECK_FALSE(all_completed(rs));
  const auto rows = parse_csv(runs_csv(rs));
  for (const auto& row : rows) {
    if (row[1] == "10") {
      CHECK(row[4].empty());
      CHECK(row[8] == "false");
    }
  }
  const auto dir = fresh_dir("antijam_errors_test");
  emit_outputs(rs, dir.string());
  CHECK(fs::exists(dir / "errors.log"));
  fs::remove_all(dir);
}

TEST_CASE("unwritable output directory is an error") {
  const auto file = fresh_dir("antijam_not_a_dir");
  io::write_file(file.string(), "x");
  CHECK_THROWS_AS(emit_outputs(shared_results(), (file / "sub").string()), Error);
  fs::remove(file);
}

TEST_CASE("config parsing") {
  const auto def = config::from_json(config::json::object());
  CHECK(config::to_json(def) == config::to_json(config::ExperimentConfig{}));
  CHECK_THROWS_AS(config::from_json(config::json::parse(R"({"regionz": [4]})")), Error);
  CHECK_THROWS_AS(config::from_json(config::json::parse(R"({"planner": {"gain": 1}})")), Error);
  CHECK_THROWS_AS(config::from_json(config::json::parse(R"({"seeds": 0})")), Error);
  CHECK_THROWS_AS(config::from_json(config::json::parse(R"({"methods": ["ppo"]})")), Error);
  const auto c = config::from_json(config::json::parse(R"({"regions": [5, 7], "planner": {"margin": 9}})"));
  CHECK(c.regions == std::vector<int>{5, 7});
  CHECK(c.planner.margin == 9.0);
  CHECK(c.jammers == config::ExperimentConfig{}.jammers);
  CHECK(config::to_json(config::from_json(config::to_json(c))) == config::to_json(c));
}

TEST_CASE("localization summary pools matched pairs") {
  std::vector<RunResult> rs(3);
  for (auto& r : rs) {
    r.method = "aif";
    r.n_regions = 6;
    r.n_jammers = 2;
    r.completed = true;
  }
  rs[0].jammer_rmse = 10.0;
  rs[1].jammer_rmse = 20.0;
  rs[1].jammer_misses = 1;
  rs[2].error = "boom";
  const auto rows = localization_summary(rs);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].n_jammers == 2);
  CHECK(rows[0].matched == 3);
  CHECK(rows[0].misses == 3);  // a failed run misses all of its jammers
  // Run 0 matched 2 pairs at 10 m, run 1 one pair at 20 m.
  CHECK(rows[0].pooled_rmse == doctest::Approx(std::sqrt((2 * 100.0 + 400.0) / 3.0)));
  CHECK(rows[0].worst_rmse == 20.0);
}

TEST_CASE("scenario seeds depend on the whole cell key") {
  CHECK(scenario_seed(1, 4, 1, 0) == scenario_seed(1, 4, 1, 0));
  CHECK(scenario_seed(1, 4, 1, 0) != scenario_seed(1, 4, 1, 1));
  CHECK(scenario_seed(1, 4, 1, 0) != scenario_seed(1, 4, 2, 0));
  CHECK(scenario_seed(1, 4, 1, 0) != scenario_seed(2, 4, 1, 0));
}
