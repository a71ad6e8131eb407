#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

#include "antijam/channel.hpp"

namespace antijam::geo {

using Vec2 = Eigen::Vector2d;

struct Circle {
  Vec2 center = Vec2::Zero();
  double radius = 0.0;
};

inline Vec2 xy(const channel::Position& p) { return {p.x, p.y}; }
inline channel::Position at_altitude(const Vec2& v, double z) { return {v.x(), v.y(), z}; }

double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b);
bool segment_clear(const Vec2& a, const Vec2& b, std::span<const Circle> circles,
                   double tol = 1e-7);

// Replaces overlapping circles by their enclosing circle until all are disjoint.
std::vector<Circle> merge_overlapping(std::vector<Circle> circles);

// Shortest path from a to b that stays outside every circle, built from
// tangent segments and arcs. Arcs are emitted as circumscribed polygons so
// every point of the polyline keeps distance >= radius. Throws Infeasible
// "infeasible endpoints" if a or b lies strictly inside a circle.
std::vector<Vec2> shortest_detour(const Vec2& a, const Vec2& b, std::span<const Circle> circles,
                                  double arc_step_rad = 0.05);

double polyline_length(std::span<const Vec2> pts);

// Points every `step` along the polyline, starting at the first vertex and
// always ending exactly at the last one.
std::vector<Vec2> resample(std::span<const Vec2> pts, double step);

}  // namespace antijam::geo
