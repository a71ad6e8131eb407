#pragma once

#include <cstdint>
#include <random>

namespace antijam {

std::uint64_t splitmix64(std::uint64_t x);

// Mixes several integers into one seed; used to derive per-cell and
// per-mission streams from a base seed.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0,
                          std::uint64_t c = 0);

// Portable random stream: the engine is fully specified by the standard, the
// distributions are implemented here so results do not depend on the
// standard library vendor.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

  std::uint64_t next() { return engine_(); }
  double uniform();  // [0, 1)
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  std::size_t index(std::size_t n);
  double normal();

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace antijam
