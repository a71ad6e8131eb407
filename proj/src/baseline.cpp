#include "antijam/baseline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>

#include "antijam/error.hpp"

namespace antijam::baseline {

namespace {

constexpr int kDx[kActions] = {1, 1, 0, -1, -1, -1, 0, 1};
constexpr int kDy[kActions] = {0, 1, 1, 1, 0, -1, -1, -1};
constexpr char kMagic[8] = {'A', 'J', 'Q', 'T', 'B', 'L', '0', '1'};
constexpr std::size_t kDenseLimit = std::size_t{1} << 23;

void fnv(std::uint64_t& h, const void* data, std::size_t n) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
}

}  // namespace

void RLConfig::validate() const {
  require(grid_pitch > 0.0, "grid_pitch must be > 0");
  require(learning_rate > 0.0 && learning_rate <= 1.0, "learning_rate must lie in (0, 1]");
  require(discount > 0.0 && discount < 1.0, "discount must lie in (0, 1)");
  require(epsilon_start >= 0.0 && epsilon_start <= 1.0 && epsilon_end >= 0.0 && epsilon_end <= 1.0,
          "epsilon must lie in [0, 1]");
  require(epsilon_decay_fraction > 0.0 && epsilon_decay_fraction <= 1.0,
          "epsilon_decay_fraction must lie in (0, 1]");
  require(episodes >= 0 && max_episode_steps >= 1 && rollout_budget >= 1, "invalid episode budget");
  require(w_distance >= 0.0 && w_interference >= 0.0, "penalty weights must be >= 0");
}

std::uint64_t RLConfig::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  const double ds[] = {grid_pitch,    learning_rate,   discount,       epsilon_start,
                       epsilon_end,   epsilon_decay_fraction, w_distance, w_interference,
                       visit_reward,  completion_reward};
  for (double d : ds) {
    char buf[32];
    const int n = std::snprintf(buf, sizeof buf, "%.17g;", d);
    fnv(h, buf, static_cast<std::size_t>(n));
  }
  const long long is[] = {episodes, max_episode_steps, static_cast<long long>(seed)};
  for (long long v : is) {
    char buf[32];
    const int n = std::snprintf(buf, sizeof buf, "%lld;", v);
    fnv(h, buf, static_cast<std::size_t>(n));
  }
  return h;
}

Grid::Grid(double side, double p) {
  require(side > 0.0 && p > 0.0, "grid needs a positive side and pitch");
  nx = std::max(1, static_cast<int>(std::ceil(side / p - 1e-9)));
  pitch = p;
}

int Grid::cell_of(double x, double y) const {
  const int i = std::clamp(static_cast<int>(std::floor(x / pitch)), 0, nx - 1);
  const int j = std::clamp(static_cast<int>(std::floor(y / pitch)), 0, nx - 1);
  return j * nx + i;
}

geo::Vec2 Grid::center(int cell) const {
  return {((cell % nx) + 0.5) * pitch, ((cell / nx) + 0.5) * pitch};
}

int Grid::move(int cell, int action) const {
  const int i = cell % nx + kDx[action];
  const int j = cell / nx + kDy[action];
  if (i < 0 || j < 0 || i >= nx || j >= nx) return -1;
  return j * nx + i;
}

QTable::QTable(int cells, int n_regions) : cells_(cells), n_regions_(n_regions) {
  require(cells >= 1, "QTable needs at least one cell");
  require(n_regions >= 1 && n_regions <= kMaxRegions, "too many regions for the bitmask state");
  const std::size_t n = static_cast<std::size_t>(cells) << n_regions;
  if (n * kActions <= kDenseLimit) dense_.assign(n * kActions, 0.0);
}

std::array<double, kActions> QTable::get(int cell, std::uint32_t mask) const {
  std::array<double, kActions> out{};
  if (!dense_.empty()) {
    const std::size_t base = static_cast<std::size_t>(key(cell, mask)) * kActions;
    std::copy_n(dense_.begin() + static_cast<std::ptrdiff_t>(base), kActions, out.begin());
    return out;
  }
  if (auto it = sparse_.find(key(cell, mask)); it != sparse_.end()) return it->second;
  return out;
}

double& QTable::at(int cell, std::uint32_t mask, int action) {
  if (!dense_.empty()) {
    return dense_[static_cast<std::size_t>(key(cell, mask)) * kActions +
                  static_cast<std::size_t>(action)];
  }
  return sparse_[key(cell, mask)][static_cast<std::size_t>(action)];
}

std::size_t QTable::stored_states() const {
  return dense_.empty() ? sparse_.size() : dense_.size() / kActions;
}

void QTable::save(const std::string& path, std::uint64_t key_seed, std::uint64_t key_hash) const {
  std::ofstream f(path, std::ios::binary);
  if (!f) fail(ErrorCode::Io, "cannot write " + path);
  auto put = [&](const auto& v) { f.write(reinterpret_cast<const char*>(&v), sizeof v); };
  f.write(kMagic, sizeof kMagic);
  put(key_seed);
  put(key_hash);
  put(static_cast<std::int32_t>(cells_));
  put(static_cast<std::int32_t>(n_regions_));
  const std::uint8_t mode = dense_.empty() ? 1 : 0;
  put(mode);
  if (mode == 0) {
    put(static_cast<std::uint64_t>(dense_.size()));
    f.write(reinterpret_cast<const char*>(dense_.data()),
            static_cast<std::streamsize>(dense_.size() * sizeof(double)));
  } else {
    std::vector<std::uint64_t> keys;
    keys.reserve(sparse_.size());
    for (const auto& kv : sparse_) keys.push_back(kv.first);
    std::sort(keys.begin(), keys.end());
    put(static_cast<std::uint64_t>(keys.size()));
    for (auto k : keys) {
      put(k);
      const auto& row = sparse_.at(k);
      f.write(reinterpret_cast<const char*>(row.data()), sizeof(double) * kActions);
    }
  }
  if (!f) fail(ErrorCode::Io, "failed writing " + path);
}

bool QTable::load(const std::string& path, std::uint64_t key_seed, std::uint64_t key_hash,
                  QTable& out) {
  std::ifstream f(path, std::ios::binary);
  if (!f) return false;
  auto get = [&](auto& v) { return static_cast<bool>(f.read(reinterpret_cast<char*>(&v), sizeof v)); };
  char magic[8];
  if (!f.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof magic) != 0) return false;
  std::uint64_t s = 0, h = 0, n = 0;
  std::int32_t cells = 0, regions = 0;
  std::uint8_t mode = 0;
  if (!get(s) || !get(h) || !get(cells) || !get(regions) || !get(mode) || !get(n)) return false;
  if (s != key_seed || h != key_hash) return false;
  QTable t(cells, regions);
  if (mode == 0) {
    if (t.dense_.size() != n) return false;
    if (!f.read(reinterpret_cast<char*>(t.dense_.data()), static_cast<std::streamsize>(n * sizeof(double)))) {
      return false;
    }
  } else {
    t.dense_.clear();
    for (std::uint64_t i = 0; i < n; ++i) {
      std::uint64_t k = 0;
      std::array<double, kActions> row{};
      if (!get(k) || !f.read(reinterpret_cast<char*>(row.data()), sizeof(double) * kActions)) {
        return false;
      }
      t.sparse_[k] = row;
    }
  }
  out = std::move(t);
  return true;
}

namespace {

struct Mdp {
  Grid grid;
  std::vector<int> region_of_cell;  // -1 or region id
  int start = 0;
  std::uint32_t full = 0;
  std::vector<double> move_len;      // per (cell, action)
  std::vector<double> move_interf;   // per (cell, action), samples after the origin

  Mdp(const Scenario& s, const RLConfig& cfg) : grid(s.side, cfg.grid_pitch) {
    const int n = static_cast<int>(s.regions.size());
    require(n >= 1 && n <= kMaxRegions, "too many regions for the bitmask state");
    region_of_cell.assign(static_cast<std::size_t>(grid.cells()), -1);
    for (const auto& r : s.regions) {
      const int c = grid.cell_of(r.position.x, r.position.y);
      if (region_of_cell[static_cast<std::size_t>(c)] >= 0) {
        fail(ErrorCode::InvalidArgument, "two regions share a grid cell");
      }
      region_of_cell[static_cast<std::size_t>(c)] = r.id;
    }
    start = grid.cell_of(s.regions[0].position.x, s.regions[0].position.y);
    full = (n >= 32) ? 0xffffffffu : ((1u << n) - 1u);
    const std::size_t m = static_cast<std::size_t>(grid.cells()) * kActions;
    move_len.assign(m, 0.0);
    move_interf.assign(m, 0.0);
    for (int c = 0; c < grid.cells(); ++c) {
      for (int a = 0; a < kActions; ++a) {
        const int c2 = grid.move(c, a);
        if (c2 < 0) continue;
        const geo::Vec2 pts[2] = {grid.center(c), grid.center(c2)};
        const auto samples = geo::resample(pts, s.step);
        double interf = 0.0;
        for (std::size_t k = 1; k < samples.size(); ++k) {
          interf += mission::interference_at(geo::at_altitude(samples[k], s.altitude), s.jammers,
                                             s.channel);
        }
        const std::size_t idx = static_cast<std::size_t>(c) * kActions + static_cast<std::size_t>(a);
        move_len[idx] = (pts[1] - pts[0]).norm();
        move_interf[idx] = interf;
      }
    }
  }

  std::uint32_t enter(int cell, std::uint32_t mask) const {
    const int r = region_of_cell[static_cast<std::size_t>(cell)];
    return r >= 0 ? mask | (1u << r) : mask;
  }

  bool done(int cell, std::uint32_t mask) const { return mask == full && cell == start; }
};

int greedy(const std::array<double, kActions>& q, const Grid& g, int cell) {
  int best = -1;
  for (int a = 0; a < kActions; ++a) {
    if (g.move(cell, a) < 0) continue;
    if (best < 0 || q[static_cast<std::size_t>(a)] > q[static_cast<std::size_t>(best)]) best = a;
  }
  return best;
}

}  // namespace

QTable train_qlearning(const Scenario& scenario, const RLConfig& cfg, TrainingTrace* trace) {
  scenario.validate();
  cfg.validate();
  require(static_cast<int>(scenario.regions.size()) <= kMaxRegions,
          "too many regions for the bitmask state");
  const Mdp mdp(scenario, cfg);
  QTable q(mdp.grid.cells(), static_cast<int>(scenario.regions.size()));
  Rng rng(derive_seed(cfg.seed, scenario.seed, 0x71));
  const double decay_eps = std::max(1.0, cfg.epsilon_decay_fraction * cfg.episodes);

  for (int ep = 0; ep < cfg.episodes; ++ep) {
    const double frac = std::min(1.0, ep / decay_eps);
    const double eps = cfg.epsilon_start + (cfg.epsilon_end - cfg.epsilon_start) * frac;
    int cell = mdp.start;
    std::uint32_t mask = mdp.enter(cell, 0);
    double ret = 0.0;
    for (int t = 0; t < cfg.max_episode_steps; ++t) {
      const auto row = q.get(cell, mask);
      int a;
      if (rng.uniform() < eps) {
        int valid[kActions];
        int nv = 0;
        for (int k = 0; k < kActions; ++k) {
          if (mdp.grid.move(cell, k) >= 0) valid[nv++] = k;
        }
        a = valid[rng.index(static_cast<std::size_t>(nv))];
      } else {
        a = greedy(row, mdp.grid, cell);
      }
      const int next = mdp.grid.move(cell, a);
      const std::size_t idx = static_cast<std::size_t>(cell) * kActions + static_cast<std::size_t>(a);
      const std::uint32_t nmask = mdp.enter(next, mask);
      double r = -cfg.w_distance * mdp.move_len[idx] - cfg.w_interference * mdp.move_interf[idx];
      if (nmask != mask) r += cfg.visit_reward;
      const bool terminal = mdp.done(next, nmask);
      if (terminal) r += cfg.completion_reward;
      double target = r;
      if (!terminal) {
        const auto nrow = q.get(next, nmask);
        target += cfg.discount * nrow[static_cast<std::size_t>(greedy(nrow, mdp.grid, next))];
      }
      double& qa = q.at(cell, mask, a);
      qa += cfg.learning_rate * (target - qa);
      ret += r;
      cell = next;
      mask = nmask;
      if (terminal) break;
    }
    if (trace) trace->episode_returns.push_back(ret);
  }
  return q;
}

planner::MissionReport rollout_policy(const QTable& table, const Scenario& scenario,
                                      const RLConfig& cfg, int budget_moves) {
  scenario.validate();
  cfg.validate();
  require(budget_moves >= 1, "budget must be >= 1");
  const Mdp mdp(scenario, cfg);
  require(table.cells() == mdp.grid.cells() &&
              table.n_regions() == static_cast<int>(scenario.regions.size()),
          "QTable does not match the scenario");

  planner::MissionReport rep;
  rep.method = "qlearning";
  rep.seed = scenario.seed;
  rep.dt = scenario.step / 10.0;
  int cell = mdp.start;
  std::uint32_t mask = mdp.enter(cell, 0);
  rep.visited_order.push_back(0);
  std::vector<geo::Vec2> centers{mdp.grid.center(cell)};
  for (int t = 0; t < budget_moves; ++t) {
    const int a = greedy(table.get(cell, mask), mdp.grid, cell);
    const int next = mdp.grid.move(cell, a);
    const std::uint32_t nmask = mdp.enter(next, mask);
    if (nmask != mask) rep.visited_order.push_back(mdp.region_of_cell[static_cast<std::size_t>(next)]);
    centers.push_back(mdp.grid.center(next));
    cell = next;
    mask = nmask;
    if (mdp.done(cell, mask)) {
      rep.completed = true;
      break;
    }
  }
  for (const auto& p : geo::resample(centers, scenario.step)) {
    const auto pos = geo::at_altitude(p, scenario.altitude);
    if (!rep.trajectory.empty()) rep.path_length += channel::distance(rep.trajectory.back(), pos);
    rep.trajectory.push_back(pos);
    rep.total_interference += mission::interference_at(pos, scenario.jammers, scenario.channel);
  }
  rep.completion_steps = rep.trajectory.size() - 1;
  return rep;
}

std::string cache_file_name(std::uint64_t scenario_seed, const RLConfig& cfg) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "qtable_%016llx_%016llx.bin",
                static_cast<unsigned long long>(scenario_seed),
                static_cast<unsigned long long>(cfg.hash()));
  return buf;
}

QTable cached_qlearning(const Scenario& scenario, const RLConfig& cfg, const std::string& dir) {
  const auto path = (std::filesystem::path(dir) / cache_file_name(scenario.seed, cfg)).string();
  QTable q(1, 1);
  if (QTable::load(path, scenario.seed, cfg.hash(), q)) return q;
  q = train_qlearning(scenario, cfg);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  q.save(path, scenario.seed, cfg.hash());
  return q;
}

}  // namespace antijam::baseline
