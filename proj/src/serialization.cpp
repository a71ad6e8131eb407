#include "antijam/serialization.hpp"

#include <fstream>
#include <sstream>

#include "antijam/error.hpp"

namespace antijam::io {

namespace {

template <class T>
T field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) fail(ErrorCode::Parse, std::string("missing field ") + key);
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    fail(ErrorCode::Parse, std::string("bad field ") + key + ": " + e.what());
  }
}

json pos(const channel::Position& p) { return {{"x", p.x}, {"y", p.y}, {"z", p.z}}; }

channel::Position pos_from(const json& j) {
  return {field<double>(j, "x"), field<double>(j, "y"), j.value("z", 0.0)};
}

const char* hyp(mission::Hypothesis h) { return h == mission::Hypothesis::H0 ? "H0" : "H1"; }

mission::Hypothesis hyp_from(const std::string& s) {
  if (s == "H0") return mission::Hypothesis::H0;
  if (s == "H1") return mission::Hypothesis::H1;
  fail(ErrorCode::Parse, "unknown hypothesis " + s);
}

void check_version(const json& j, const char* what) {
  const int v = field<int>(j, "schema_version");
  if (v != kSchemaVersion) {
    fail(ErrorCode::Parse, std::string("unsupported ") + what + " schema_version " + std::to_string(v));
  }
}

}  // namespace

json to_json(const channel::ChannelParams& p) {
  json j;
  j["pathloss_exponent"] = p.pathloss_exponent;
  j["beta_los_db"] = channel::gain_to_attenuation_db(p.beta_los);
  j["beta_nlos_db"] = channel::gain_to_attenuation_db(p.beta_nlos);
  j["cbs_power_w"] = p.cbs_power;
  j["noise_power_w"] = p.noise_power;
  if (const auto* f = std::get_if<channel::FixedLos>(&p.los_model)) {
    j["los_model"] = {{"kind", "fixed"}, {"p_los", f->p_los}};
  } else {
    const auto& s = std::get<channel::ElevationSigmoidLos>(p.los_model);
    j["los_model"] = {{"kind", "elevation_sigmoid"}, {"phi", s.phi}, {"psi", s.psi}};
  }
  return j;
}

channel::ChannelParams channel_from_json(const json& j) {
  auto p = channel::ChannelParams::defaults();
  if (j.is_null()) return p;
  p.pathloss_exponent = j.value("pathloss_exponent", p.pathloss_exponent);
  if (j.contains("beta_los_db")) p.beta_los = channel::attenuation_db_to_gain(field<double>(j, "beta_los_db"));
  if (j.contains("beta_nlos_db")) {
    p.beta_nlos = channel::attenuation_db_to_gain(field<double>(j, "beta_nlos_db"));
  }
  p.cbs_power = j.value("cbs_power_w", p.cbs_power);
  p.noise_power = j.value("noise_power_w", p.noise_power);
  if (j.contains("los_model")) {
    const auto& m = j.at("los_model");
    const auto kind = field<std::string>(m, "kind");
    if (kind == "fixed") {
      p.los_model = channel::FixedLos{m.value("p_los", 0.9)};
    } else if (kind == "elevation_sigmoid") {
      p.los_model = channel::ElevationSigmoidLos{m.value("phi", 150.0), m.value("psi", 15.0)};
    } else {
      fail(ErrorCode::Parse, "unknown los_model kind " + kind);
    }
  }
  p.validate();
  return p;
}

json to_json(const mission::Scenario& s) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["side"] = s.side;
  j["altitude"] = s.altitude;
  j["step"] = s.step;
  j["seed"] = s.seed;
  j["cbs"] = pos(s.cbs);
  j["channel"] = to_json(s.channel);
  j["regions"] = json::array();
  for (const auto& r : s.regions) j["regions"].push_back({{"id", r.id}, {"x", r.position.x}, {"y", r.position.y}});
  j["jammers"] = json::array();
  for (const auto& m : s.jammers) {
    j["jammers"].push_back({{"x", m.position.x},
                            {"y", m.position.y},
                            {"power_w", m.power},
                            {"radius_m", m.radius},
                            {"type_id", m.type_id}});
  }
  return j;
}

mission::Scenario scenario_from_json(const json& j) {
  mission::Scenario s;
  s.side = field<double>(j, "side");
  s.altitude = field<double>(j, "altitude");
  s.step = field<double>(j, "step");
  s.seed = field<std::uint64_t>(j, "seed");
  s.cbs = pos_from(field<json>(j, "cbs"));
  s.channel = channel_from_json(j.value("channel", json()));
  for (const auto& r : field<json>(j, "regions")) {
    s.regions.push_back({field<int>(r, "id"), {field<double>(r, "x"), field<double>(r, "y"), 0.0}});
  }
  for (const auto& m : field<json>(j, "jammers")) {
    channel::Jammer jm;
    jm.position = {field<double>(m, "x"), field<double>(m, "y"), 0.0};
    jm.power = field<double>(m, "power_w");
    jm.radius = field<double>(m, "radius_m");
    jm.type_id = field<int>(m, "type_id");
    s.jammers.push_back(jm);
  }
  s.validate();
  return s;
}

json to_json(const expert::Demonstration& d) {
  json j;
  j["hypothesis"] = hyp(d.hypothesis);
  j["scenario_seed"] = d.scenario_seed;
  j["dt"] = d.dt;
  json word = json::array();
  for (std::size_t i = 0; i < d.order.size(); ++i) {
    word.push_back({{"region", d.order[i]},
                    {"next", d.order[(i + 1) % d.order.size()]},
                    {"cost", d.edge_costs[i]}});
  }
  j["high_word"] = word;
  json traj = json::array();
  for (const auto& p : d.trajectory) traj.push_back({p.x, p.y, p.z});
  j["low_trajectory"] = traj;
  j["velocity_letters"] = d.velocity_letters;
  j["sinr_trace"] = d.sinr_trace;
  j["leg_starts"] = d.leg_starts;
  json det = json::array();
  for (const auto& r : d.detours) {
    det.push_back({{"leg", r.leg},
                   {"jammer", r.jammer},
                   {"type_id", r.type_id},
                   {"radius_m", r.radius},
                   {"power_w", r.power},
                   {"jammer_x", r.jammer_x},
                   {"jammer_y", r.jammer_y},
                   {"start", r.start},
                   {"end", r.end},
                   {"heading", r.heading}});
  }
  j["detours"] = det;
  return j;
}

expert::Demonstration demonstration_from_json(const json& j) {
  expert::Demonstration d;
  d.hypothesis = hyp_from(field<std::string>(j, "hypothesis"));
  d.scenario_seed = field<std::uint64_t>(j, "scenario_seed");
  d.dt = field<double>(j, "dt");
  for (const auto& e : field<json>(j, "high_word")) {
    d.order.push_back(field<int>(e, "region"));
    d.edge_costs.push_back(field<double>(e, "cost"));
  }
  for (const auto& p : field<json>(j, "low_trajectory")) {
    const auto v = p.get<std::vector<double>>();
    if (v.size() != 3) fail(ErrorCode::Parse, "trajectory points need 3 coordinates");
    d.trajectory.push_back({v[0], v[1], v[2]});
  }
  d.velocity_letters = field<std::vector<std::array<double, 3>>>(j, "velocity_letters");
  d.sinr_trace = field<std::vector<std::array<double, 2>>>(j, "sinr_trace");
  d.leg_starts = field<std::vector<std::size_t>>(j, "leg_starts");
  for (const auto& r : field<json>(j, "detours")) {
    expert::DetourRecord x;
    x.leg = field<int>(r, "leg");
    x.jammer = field<int>(r, "jammer");
    x.type_id = field<int>(r, "type_id");
    x.radius = field<double>(r, "radius_m");
    x.power = field<double>(r, "power_w");
    x.jammer_x = field<double>(r, "jammer_x");
    x.jammer_y = field<double>(r, "jammer_y");
    x.start = field<std::size_t>(r, "start");
    x.end = field<std::size_t>(r, "end");
    x.heading = field<double>(r, "heading");
    d.detours.push_back(x);
  }
  if (d.velocity_letters.size() + 1 != d.trajectory.size() ||
      d.sinr_trace.size() != d.trajectory.size()) {
    fail(ErrorCode::Parse, "demonstration arrays have inconsistent lengths");
  }
  return d;
}

json to_json(const wm::WorldModel& m) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["dt"] = m.dt;
  json d1;
  d1["letters"] = m.dict1.letters;
  d1["positions"] = m.dict1.positions;
  d1["altitude"] = m.dict1.altitude;
  json edges = json::array();
  for (const auto& [k, b] : m.dict1.edges) {
    edges.push_back({{"from", k.first},
                     {"to", k.second},
                     {"mean", b.mean},
                     {"variance", b.variance},
                     {"count", m.dict1.transition_counts.at(k)}});
  }
  d1["edges"] = edges;
  json words = json::array();
  for (std::size_t i = 0; i < m.dict1.words.size(); ++i) {
    words.push_back({{"word", m.dict1.words[i]}, {"count", m.dict1.word_counts[i]}});
  }
  d1["words"] = words;
  j["dict1"] = d1;

  json d2 = json::array();
  for (const auto& t : m.dict2) {
    json tw = json::array();
    for (const auto& w : t.words) {
      json letters = json::array();
      for (const auto& l : w.letters) letters.push_back({{"v", l.v}, {"repeat", l.repeat}});
      tw.push_back({{"source", hyp(w.source)}, {"entry", w.entry}, {"letters", letters}});
    }
    d2.push_back({{"type_id", t.type_id}, {"radius_m", t.radius}, {"power_w", t.power}, {"words", tw}});
  }
  j["dict2"] = d2;

  json d3;
  d3["scale"] = m.dict3.scale;
  json letters = json::array();
  for (const auto& l : m.dict3.letters) {
    letters.push_back({{"centroid", l.centroid},
                       {"variance", l.variance},
                       {"label", l.label == wm::SignalLabel::Nominal ? "nominal" : "jammed"}});
  }
  d3["letters"] = letters;
  j["dict3"] = d3;
  return j;
}

wm::WorldModel world_model_from_json(const json& j) {
  check_version(j, "world model");
  wm::WorldModel m;
  m.dt = field<double>(j, "dt");
  const auto& d1 = field<json>(j, "dict1");
  m.dict1.letters = field<std::vector<int>>(d1, "letters");
  m.dict1.positions = field<std::vector<std::array<double, 2>>>(d1, "positions");
  m.dict1.altitude = field<double>(d1, "altitude");
  if (m.dict1.positions.size() != m.dict1.letters.size()) {
    fail(ErrorCode::Parse, "dict1 letters and positions differ in length");
  }
  for (const auto& e : field<json>(d1, "edges")) {
    const std::pair<int, int> k{field<int>(e, "from"), field<int>(e, "to")};
    m.dict1.edges[k] = {field<double>(e, "mean"), field<double>(e, "variance")};
    m.dict1.transition_counts[k] = field<int>(e, "count");
  }
  for (const auto& w : field<json>(d1, "words")) {
    m.dict1.words.push_back(field<std::vector<int>>(w, "word"));
    m.dict1.word_counts.push_back(field<int>(w, "count"));
  }
  for (const auto& t : field<json>(j, "dict2")) {
    wm::Token tok;
    tok.type_id = field<int>(t, "type_id");
    tok.radius = field<double>(t, "radius_m");
    tok.power = field<double>(t, "power_w");
    for (const auto& w : field<json>(t, "words")) {
      wm::VelocityWord vw;
      vw.source = hyp_from(field<std::string>(w, "source"));
      vw.entry = field<std::array<double, 2>>(w, "entry");
      for (const auto& l : field<json>(w, "letters")) {
        vw.letters.push_back({field<std::array<double, 3>>(l, "v"), field<int>(l, "repeat")});
      }
      tok.words.push_back(std::move(vw));
    }
    m.dict2.push_back(std::move(tok));
  }
  const auto& d3 = field<json>(j, "dict3");
  m.dict3.scale = field<std::array<double, 2>>(d3, "scale");
  for (const auto& l : field<json>(d3, "letters")) {
    wm::SignalLetter s;
    s.centroid = field<std::array<double, 2>>(l, "centroid");
    s.variance = field<std::array<double, 2>>(l, "variance");
    const auto label = field<std::string>(l, "label");
    if (label != "nominal" && label != "jammed") fail(ErrorCode::Parse, "unknown letter label " + label);
    s.label = label == "nominal" ? wm::SignalLabel::Nominal : wm::SignalLabel::Jammed;
    m.dict3.letters.push_back(s);
  }
  if (m.dict2.empty() || m.dict2.front().type_id != 0) fail(ErrorCode::Parse, "dict2 lacks the nominal token");
  return m;
}

json to_json(const planner::MissionReport& r, const mission::Scenario* scenario) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["method"] = r.method;
  j["seed"] = r.seed;
  j["dt"] = r.dt;
  j["planned_order"] = r.planned_order;
  j["visited_order"] = r.visited_order;
  json m;
  m["total_interference"] = r.total_interference;
  m["completion_steps"] = r.completion_steps;
  m["completion_seconds"] = double(r.completion_steps) * r.dt;
  m["path_length"] = r.path_length;
  m["completed"] = r.completed;
  m["jammer_rmse"] = r.jammer_rmse ? json(*r.jammer_rmse) : json(nullptr);
  m["jammer_misses"] = r.jammer_misses;
  m["triggered"] = r.triggered;
  j["metrics"] = m;
  json est = json::array();
  for (const auto& e : r.estimates) {
    est.push_back({{"x", e.x},
                   {"y", e.y},
                   {"type_id", e.type_id},
                   {"radius_m", e.radius},
                   {"power_w", e.power},
                   {"abnormality", e.abnormality}});
  }
  j["estimates"] = est;
  json ev = json::array();
  for (const auto& e : r.events) ev.push_back({{"step", e.step}, {"kind", e.kind}, {"detail", e.detail}});
  j["events"] = ev;
  json traj = json::array();
  for (const auto& p : r.trajectory) traj.push_back({p.x, p.y, p.z});
  j["trajectory"] = traj;
  if (scenario) j["scenario"] = to_json(*scenario);
  return j;
}

planner::MissionReport report_from_json(const json& j) {
  check_version(j, "report");
  planner::MissionReport r;
  r.method = field<std::string>(j, "method");
  r.seed = field<std::uint64_t>(j, "seed");
  r.dt = field<double>(j, "dt");
  r.planned_order = field<std::vector<int>>(j, "planned_order");
  r.visited_order = field<std::vector<int>>(j, "visited_order");
  const auto& m = field<json>(j, "metrics");
  r.total_interference = field<double>(m, "total_interference");
  r.completion_steps = field<std::size_t>(m, "completion_steps");
  r.path_length = field<double>(m, "path_length");
  r.completed = field<bool>(m, "completed");
  if (m.contains("jammer_rmse") && !m.at("jammer_rmse").is_null()) {
    r.jammer_rmse = field<double>(m, "jammer_rmse");
  }
  r.jammer_misses = m.value("jammer_misses", std::size_t{0});
  r.triggered = m.value("triggered", false);
  for (const auto& e : field<json>(j, "estimates")) {
    r.estimates.push_back({field<double>(e, "x"), field<double>(e, "y"), field<int>(e, "type_id"),
                           field<double>(e, "radius_m"), field<double>(e, "power_w"),
                           field<double>(e, "abnormality")});
  }
  for (const auto& e : field<json>(j, "events")) {
    r.events.push_back({field<std::size_t>(e, "step"), field<std::string>(e, "kind"),
                        field<std::string>(e, "detail")});
  }
  for (const auto& p : field<json>(j, "trajectory")) {
    const auto v = p.get<std::vector<double>>();
    if (v.size() != 3) fail(ErrorCode::Parse, "trajectory points need 3 coordinates");
    r.trajectory.push_back({v[0], v[1], v[2]});
  }
  return r;
}

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail(ErrorCode::Io, "cannot open " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) fail(ErrorCode::Io, "cannot write " + path);
  f << text;
  if (!f) fail(ErrorCode::Io, "failed writing " + path);
}

json read_json(const std::string& path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    fail(ErrorCode::Parse, path + ": " + e.what());
  }
}

void write_jsonl(const std::string& path, const std::vector<expert::Demonstration>& demos) {
  std::string out;
  for (const auto& d : demos) {
    out += to_json(d).dump();
    out += '\n';
  }
  write_file(path, out);
}

std::vector<expert::Demonstration> read_jsonl(const std::string& path) {
  std::istringstream in(read_file(path));
  std::vector<expert::Demonstration> out;
  std::string line;
  std::size_t no = 0;
  while (std::getline(in, line)) {
    ++no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(demonstration_from_json(json::parse(line)));
    } catch (const json::parse_error& e) {
      fail(ErrorCode::Parse, path + ":" + std::to_string(no) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace antijam::io
