#include "antijam/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>

#include "antijam/error.hpp"

namespace antijam::geo {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap(double a) {
  a = std::fmod(a, kTwoPi);
  return a < 0 ? a + kTwoPi : a;
}

struct Node {
  Vec2 p;
  int circle = -1;  // -1 for the free endpoints
  double angle = 0.0;
};

struct Edge {
  int to;
  double w;
  bool arc;
  bool ccw;
};

}  // namespace

double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double len2 = ab.squaredNorm();
  if (len2 == 0.0) return (p - a).norm();
  const double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
  return (p - (a + t * ab)).norm();
}

bool segment_clear(const Vec2& a, const Vec2& b, std::span<const Circle> circles, double tol) {
  for (const auto& c : circles) {
    if (point_segment_distance(c.center, a, b) < c.radius - tol) return false;
  }
  return true;
}

std::vector<Circle> merge_overlapping(std::vector<Circle> circles) {
  bool merged = true;
  while (merged) {
    merged = false;
    for (std::size_t i = 0; i < circles.size() && !merged; ++i) {
      for (std::size_t j = i + 1; j < circles.size() && !merged; ++j) {
        const Circle& a = circles[i];
        const Circle& b = circles[j];
        const double d = (b.center - a.center).norm();
        if (d >= a.radius + b.radius) continue;
        Circle m;
        if (d + b.radius <= a.radius) {
          m = a;
        } else if (d + a.radius <= b.radius) {
          m = b;
        } else {
          m.radius = 0.5 * (d + a.radius + b.radius);
          const Vec2 u = (b.center - a.center) / d;
          m.center = a.center + u * (m.radius - a.radius);
        }
        circles[i] = m;
        circles.erase(circles.begin() + static_cast<std::ptrdiff_t>(j));
        merged = true;
      }
    }
  }
  return circles;
}

std::vector<Vec2> shortest_detour(const Vec2& a, const Vec2& b, std::span<const Circle> input,
                                  double arc_step_rad) {
  require(arc_step_rad > 0.0 && arc_step_rad < 1.0, "arc step must lie in (0, 1) rad");
  for (const auto& c : input) {
    require(c.radius > 0.0, "circle radius must be > 0");
    if ((a - c.center).norm() < c.radius * (1.0 - 1e-9) ||
        (b - c.center).norm() < c.radius * (1.0 - 1e-9)) {
      fail(ErrorCode::Infeasible, "infeasible endpoints");
    }
  }
  if (segment_clear(a, b, input)) return {a, b};

  const std::vector<Circle> circles = merge_overlapping({input.begin(), input.end()});
  for (const auto& c : circles) {
    if ((a - c.center).norm() < c.radius * (1.0 - 1e-9) ||
        (b - c.center).norm() < c.radius * (1.0 - 1e-9)) {
      fail(ErrorCode::Infeasible, "infeasible endpoints");
    }
  }

  std::vector<Node> nodes{{a, -1, 0.0}, {b, -1, 0.0}};
  std::vector<std::pair<int, int>> segments;
  auto add_on_circle = [&](int ci, double ang) {
    const Circle& c = circles[static_cast<std::size_t>(ci)];
    nodes.push_back({c.center + c.radius * Vec2(std::cos(ang), std::sin(ang)), ci, wrap(ang)});
    return static_cast<int>(nodes.size()) - 1;
  };

  // Tangents from the free endpoints.
  for (int e = 0; e < 2; ++e) {
    const Vec2 p = nodes[static_cast<std::size_t>(e)].p;
    for (int ci = 0; ci < static_cast<int>(circles.size()); ++ci) {
      const Circle& c = circles[static_cast<std::size_t>(ci)];
      const Vec2 d = p - c.center;
      const double dist = d.norm();
      const double base = std::atan2(d.y(), d.x());
      if (dist <= c.radius * (1.0 + 1e-9)) {
        segments.emplace_back(e, add_on_circle(ci, base));
        continue;
      }
      const double off = std::acos(c.radius / dist);
      segments.emplace_back(e, add_on_circle(ci, base + off));
      segments.emplace_back(e, add_on_circle(ci, base - off));
    }
  }
  // Bitangents between circle pairs (outer and inner).
  for (int i = 0; i < static_cast<int>(circles.size()); ++i) {
    for (int j = i + 1; j < static_cast<int>(circles.size()); ++j) {
      const Circle& c1 = circles[static_cast<std::size_t>(i)];
      const Circle& c2 = circles[static_cast<std::size_t>(j)];
      const Vec2 d = c2.center - c1.center;
      const double dist = d.norm();
      const double base = std::atan2(d.y(), d.x());
      for (int sign : {1, -1}) {
        // outer: both tangent points at the same normal angle
        const double ro = (c1.radius - c2.radius) / dist;
        if (std::abs(ro) <= 1.0) {
          const double ang = base + sign * std::acos(ro);
          segments.emplace_back(add_on_circle(i, ang), add_on_circle(j, ang));
        }
        const double ri = (c1.radius + c2.radius) / dist;
        if (ri <= 1.0) {
          const double ang = base + sign * std::acos(ri);
          segments.emplace_back(add_on_circle(i, ang), add_on_circle(j, ang + std::numbers::pi));
        }
      }
    }
  }

  std::vector<std::vector<Edge>> adj(nodes.size());
  auto add_segment = [&](int u, int v) {
    const Vec2 pu = nodes[static_cast<std::size_t>(u)].p;
    const Vec2 pv = nodes[static_cast<std::size_t>(v)].p;
    if (!segment_clear(pu, pv, circles, 1e-6)) return;
    const double w = (pv - pu).norm();
    adj[static_cast<std::size_t>(u)].push_back({v, w, false, false});
    adj[static_cast<std::size_t>(v)].push_back({u, w, false, false});
  };
  add_segment(0, 1);
  for (auto [u, v] : segments) add_segment(u, v);

  for (int ci = 0; ci < static_cast<int>(circles.size()); ++ci) {
    std::vector<int> on;
    for (int k = 0; k < static_cast<int>(nodes.size()); ++k) {
      if (nodes[static_cast<std::size_t>(k)].circle == ci) on.push_back(k);
    }
    std::sort(on.begin(), on.end(), [&](int u, int v) {
      return nodes[static_cast<std::size_t>(u)].angle < nodes[static_cast<std::size_t>(v)].angle;
    });
    const double r = circles[static_cast<std::size_t>(ci)].radius;
    for (std::size_t k = 0; k < on.size() && on.size() > 1; ++k) {
      const int u = on[k];
      const int v = on[(k + 1) % on.size()];
      const double span = wrap(nodes[static_cast<std::size_t>(v)].angle -
                               nodes[static_cast<std::size_t>(u)].angle);
      adj[static_cast<std::size_t>(u)].push_back({v, r * span, true, true});
      adj[static_cast<std::size_t>(v)].push_back({u, r * span, true, false});
    }
  }

  std::vector<double> dist(nodes.size(), std::numeric_limits<double>::infinity());
  std::vector<int> prev(nodes.size(), -1);
  std::vector<Edge> via(nodes.size());
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  dist[0] = 0.0;
  pq.push({0.0, 0});
  while (!pq.empty()) {
    auto [d, u] = pq.top();
    pq.pop();
    if (d > dist[static_cast<std::size_t>(u)]) continue;
    if (u == 1) break;
    for (const Edge& e : adj[static_cast<std::size_t>(u)]) {
      const double nd = d + e.w;
      if (nd < dist[static_cast<std::size_t>(e.to)]) {
        dist[static_cast<std::size_t>(e.to)] = nd;
        prev[static_cast<std::size_t>(e.to)] = u;
        via[static_cast<std::size_t>(e.to)] = e;
        pq.push({nd, e.to});
      }
    }
  }
  if (prev[1] < 0) fail(ErrorCode::Infeasible, "no obstacle-free route between endpoints");

  std::vector<int> chain;
  for (int v = 1; v != -1; v = prev[static_cast<std::size_t>(v)]) chain.push_back(v);
  std::reverse(chain.begin(), chain.end());

  std::vector<Vec2> out{a};
  for (std::size_t k = 1; k < chain.size(); ++k) {
    const Node& from = nodes[static_cast<std::size_t>(chain[k - 1])];
    const Node& to = nodes[static_cast<std::size_t>(chain[k])];
    const Edge& e = via[static_cast<std::size_t>(chain[k])];
    if (e.arc) {
      const Circle& c = circles[static_cast<std::size_t>(to.circle)];
      double span = e.ccw ? wrap(to.angle - from.angle) : wrap(from.angle - to.angle);
      const double dir = e.ccw ? 1.0 : -1.0;
      const int m = std::max(1, static_cast<int>(std::ceil(span / arc_step_rad)));
      const double delta = span / m;
      const double rv = c.radius / std::cos(0.5 * delta);
      for (int s = 0; s < m; ++s) {
        const double ang = from.angle + dir * (s + 0.5) * delta;
        out.push_back(c.center + rv * Vec2(std::cos(ang), std::sin(ang)));
      }
    }
    if ((to.p - out.back()).norm() > 1e-12) out.push_back(to.p);
  }
  return out;
}

double polyline_length(std::span<const Vec2> pts) {
  double len = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) len += (pts[i] - pts[i - 1]).norm();
  return len;
}

std::vector<Vec2> resample(std::span<const Vec2> pts, double step) {
  require(step > 0.0, "step must be > 0");
  std::vector<Vec2> out;
  if (pts.empty()) return out;
  out.push_back(pts.front());
  double carry = 0.0;  // distance travelled since the last emitted sample
  for (std::size_t i = 1; i < pts.size(); ++i) {
    const Vec2 a = pts[i - 1];
    const Vec2 d = pts[i] - a;
    const double len = d.norm();
    if (len == 0.0) continue;
    double s = step - carry;
    while (s < len - 1e-9) {
      out.push_back(a + d * (s / len));
      s += step;
    }
    carry = len - (s - step);
  }
  if ((out.back() - pts.back()).norm() > 1e-9) {
    out.push_back(pts.back());
  } else {
    out.back() = pts.back();
  }
  return out;
}

}  // namespace antijam::geo
