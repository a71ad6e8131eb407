#include "antijam/gng.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "antijam/error.hpp"
#include "antijam/rng.hpp"

namespace antijam::wm {

namespace {

double dist2(const Point2& a, const Point2& b) {
  const double dx = a[0] - b[0], dy = a[1] - b[1];
  return dx * dx + dy * dy;
}

struct Net {
  std::vector<Point2> pos;
  std::vector<double> err;
  std::vector<GngEdge> edges;

  int find_edge(int a, int b) const {
    for (std::size_t k = 0; k < edges.size(); ++k) {
      const auto& e = edges[k];
      if ((e.a == a && e.b == b) || (e.a == b && e.b == a)) return static_cast<int>(k);
    }
    return -1;
  }

  void remove_isolated() {
    std::vector<int> degree(pos.size(), 0);
    for (const auto& e : edges) {
      ++degree[static_cast<std::size_t>(e.a)];
      ++degree[static_cast<std::size_t>(e.b)];
    }
    std::vector<int> remap(pos.size(), -1);
    std::vector<Point2> np;
    std::vector<double> ne;
    for (std::size_t i = 0; i < pos.size(); ++i) {
      if (degree[i] == 0 && pos.size() > 2) continue;
      remap[i] = static_cast<int>(np.size());
      np.push_back(pos[i]);
      ne.push_back(err[i]);
    }
    if (np.size() == pos.size()) return;
    for (auto& e : edges) {
      e.a = remap[static_cast<std::size_t>(e.a)];
      e.b = remap[static_cast<std::size_t>(e.b)];
    }
    pos = std::move(np);
    err = std::move(ne);
  }
};

}  // namespace

void GngParams::validate() const {
  require(eps_b > 0.0 && eps_b <= 1.0, "eps_b must lie in (0, 1]");
  require(eps_n >= 0.0 && eps_n <= 1.0, "eps_n must lie in [0, 1]");
  require(max_age >= 1, "max_age must be >= 1");
  require(lambda >= 1, "lambda must be >= 1");
  require(decay > 0.0 && decay <= 1.0, "decay must lie in (0, 1]");
  require(alpha > 0.0 && alpha <= 1.0, "alpha must lie in (0, 1]");
  require(max_nodes >= 2, "max_nodes must be >= 2");
  require(max_passes >= 1, "max_passes must be >= 1");
}

GngResult gng_train(std::span<const Point2> samples, const GngParams& params) {
  params.validate();
  require(samples.size() >= 2, "gng_train needs at least 2 samples");
  Rng rng(params.seed);

  Net net;
  const std::size_t i0 = rng.index(samples.size());
  std::size_t i1 = rng.index(samples.size());
  if (i1 == i0) i1 = (i0 + 1) % samples.size();
  net.pos = {samples[i0], samples[i1]};
  net.err = {0.0, 0.0};

  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), 0);
  std::size_t seen = 0;
  for (int pass = 0; pass < params.max_passes; ++pass) {
    for (std::size_t k = order.size(); k > 1; --k) std::swap(order[k - 1], order[rng.index(k)]);
    for (std::size_t idx : order) {
      const Point2& x = samples[idx];
      int s1 = -1, s2 = -1;
      double d1 = std::numeric_limits<double>::infinity(), d2 = d1;
      for (int i = 0; i < static_cast<int>(net.pos.size()); ++i) {
        const double d = dist2(net.pos[static_cast<std::size_t>(i)], x);
        if (d < d1) {
          d2 = d1;
          s2 = s1;
          d1 = d;
          s1 = i;
        } else if (d < d2) {
          d2 = d;
          s2 = i;
        }
      }
      for (auto& e : net.edges) {
        if (e.a == s1 || e.b == s1) ++e.age;
      }
      net.err[static_cast<std::size_t>(s1)] += d1;
      auto& w = net.pos[static_cast<std::size_t>(s1)];
      w[0] += params.eps_b * (x[0] - w[0]);
      w[1] += params.eps_b * (x[1] - w[1]);
      for (const auto& e : net.edges) {
        const int nb = e.a == s1 ? e.b : (e.b == s1 ? e.a : -1);
        if (nb < 0) continue;
        auto& v = net.pos[static_cast<std::size_t>(nb)];
        v[0] += params.eps_n * (x[0] - v[0]);
        v[1] += params.eps_n * (x[1] - v[1]);
      }
      const int ek = net.find_edge(s1, s2);
      if (ek >= 0) {
        net.edges[static_cast<std::size_t>(ek)].age = 0;
      } else {
        net.edges.push_back({s1, s2, 0});
      }
      std::erase_if(net.edges, [&](const GngEdge& e) { return e.age > params.max_age; });
      net.remove_isolated();

      ++seen;
      if (seen % static_cast<std::size_t>(params.lambda) == 0 &&
          static_cast<int>(net.pos.size()) < params.max_nodes) {
        const auto q = static_cast<int>(
            std::max_element(net.err.begin(), net.err.end()) - net.err.begin());
        int f = -1;
        double fe = -1.0;
        for (const auto& e : net.edges) {
          const int nb = e.a == q ? e.b : (e.b == q ? e.a : -1);
          if (nb >= 0 && net.err[static_cast<std::size_t>(nb)] > fe) {
            fe = net.err[static_cast<std::size_t>(nb)];
            f = nb;
          }
        }
        if (f >= 0) {
          const auto& pq = net.pos[static_cast<std::size_t>(q)];
          const auto& pf = net.pos[static_cast<std::size_t>(f)];
          const int r = static_cast<int>(net.pos.size());
          net.pos.push_back({0.5 * (pq[0] + pf[0]), 0.5 * (pq[1] + pf[1])});
          net.err[static_cast<std::size_t>(q)] *= params.alpha;
          net.err[static_cast<std::size_t>(f)] *= params.alpha;
          net.err.push_back(net.err[static_cast<std::size_t>(q)]);
          const int ek2 = net.find_edge(q, f);
          net.edges.erase(net.edges.begin() + ek2);
          net.edges.push_back({q, r, 0});
          net.edges.push_back({f, r, 0});
        }
      }
      for (auto& e : net.err) e *= params.decay;
    }
  }

  // Receptive-field pass: centroid and variance of the samples each node wins.
  const std::size_t m = net.pos.size();
  std::vector<Point2> sum(m, Point2{0, 0}), sum2(m, Point2{0, 0});
  std::vector<std::size_t> cnt(m, 0);
  for (const auto& x : samples) {
    std::size_t best = 0;
    double bd = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m; ++i) {
      const double d = dist2(net.pos[i], x);
      if (d < bd) {
        bd = d;
        best = i;
      }
    }
    ++cnt[best];
    for (int c = 0; c < 2; ++c) {
      sum[best][static_cast<std::size_t>(c)] += x[static_cast<std::size_t>(c)];
    }
  }
  std::vector<Point2> centroid(m);
  for (std::size_t i = 0; i < m; ++i) {
    centroid[i] = cnt[i] ? Point2{sum[i][0] / double(cnt[i]), sum[i][1] / double(cnt[i])} : net.pos[i];
  }
  // second sweep for variances around the final centroids
  for (const auto& x : samples) {
    std::size_t best = 0;
    double bd = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m; ++i) {
      const double d = dist2(net.pos[i], x);
      if (d < bd) {
        bd = d;
        best = i;
      }
    }
    for (std::size_t c = 0; c < 2; ++c) {
      const double dx = x[c] - centroid[best][c];
      sum2[best][c] += dx * dx;
    }
  }

  GngResult out;
  std::vector<int> remap(m, -1);
  for (std::size_t i = 0; i < m; ++i) {
    if (cnt[i] == 0) continue;
    int same = -1;
    for (std::size_t k = 0; k < out.nodes.size(); ++k) {
      if (out.nodes[k].position == centroid[i]) same = static_cast<int>(k);
    }
    if (same >= 0) {
      auto& node = out.nodes[static_cast<std::size_t>(same)];
      const double n0 = double(node.count), n1 = double(cnt[i]);
      for (std::size_t c = 0; c < 2; ++c) {
        node.variance[c] = (node.variance[c] * n0 + sum2[i][c]) / (n0 + n1);
      }
      node.count += cnt[i];
      remap[i] = same;
      continue;
    }
    GngNode node;
    node.position = centroid[i];
    node.count = cnt[i];
    for (std::size_t c = 0; c < 2; ++c) node.variance[c] = sum2[i][c] / double(cnt[i]);
    remap[i] = static_cast<int>(out.nodes.size());
    out.nodes.push_back(node);
  }
  for (const auto& e : net.edges) {
    const int a = remap[static_cast<std::size_t>(e.a)], b = remap[static_cast<std::size_t>(e.b)];
    if (a >= 0 && b >= 0 && a != b) out.edges.push_back({a, b, e.age});
  }
  return out;
}

}  // namespace antijam::wm
