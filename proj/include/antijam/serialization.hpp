#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "antijam/baseline.hpp"
#include "antijam/expert.hpp"
#include "antijam/planner.hpp"
#include "antijam/worldmodel.hpp"

namespace antijam::io {

using json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

json to_json(const channel::ChannelParams& p);
channel::ChannelParams channel_from_json(const json& j);

json to_json(const mission::Scenario& s);
mission::Scenario scenario_from_json(const json& j);

json to_json(const expert::Demonstration& d);
expert::Demonstration demonstration_from_json(const json& j);

json to_json(const wm::WorldModel& m);
wm::WorldModel world_model_from_json(const json& j);

// Report plus the scenario it was flown on, so it can be replayed and audited.
json to_json(const planner::MissionReport& r, const mission::Scenario* scenario = nullptr);
planner::MissionReport report_from_json(const json& j);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& text);
json read_json(const std::string& path);

// One demonstration per line.
void write_jsonl(const std::string& path, const std::vector<expert::Demonstration>& demos);
std::vector<expert::Demonstration> read_jsonl(const std::string& path);

}  // namespace antijam::io
