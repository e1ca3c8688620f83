#pragma once

#include "gresfa/model_spec.hpp"

#include <cstdint>
#include <random>

namespace gresfa {

/// Seeded pseudo-random stream. Sub-streams are derived deterministically from
/// a parent seed and an integer path, so replications and Monte Carlo blocks
/// get disjoint, reproducible streams regardless of scheduling.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed);

  /// Stream keyed by (seed, a, b); distinct keys give unrelated streams.
  static RandomStream derive(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0);

  std::uint64_t seed() const { return seed_; }
  double normal();
  double uniform();
  /// Vector of independent standard normals.
  Vector normal_vector(Eigen::Index size);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace gresfa
