#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace antijam::wm {

using Point2 = std::array<double, 2>;

struct GngParams {
  double eps_b = 0.05;
  double eps_n = 0.006;
  int max_age = 50;
  int lambda = 100;       // insertion period, in samples
  double decay = 0.995;   // global error decay per sample
  double alpha = 0.5;     // error split on insertion
  int max_nodes = 16;
  int max_passes = 10;
  std::uint64_t seed = 0;

  void validate() const;
};

struct GngNode {
  Point2 position{};
  Point2 variance{};  // receptive-field variance per dimension
  std::size_t count = 0;
};

struct GngEdge {
  int a = 0;
  int b = 0;
  int age = 0;
};

struct GngResult {
  std::vector<GngNode> nodes;
  std::vector<GngEdge> edges;  // topology after the last pass
};

// Growing Neural Gas followed by one receptive-field centroid pass. Nodes
// that end up with identical positions (identical samples) are merged.
GngResult gng_train(std::span<const Point2> samples, const GngParams& params);

}  // namespace antijam::wm
