#pragma once

// Seeded (x, y) sampling: x uniform in a box, y uniform on the unit
// alpha-sphere at x and then scaled by a factor in [0.5, 2].

#include <cstdint>
#include <random>
#include <vector>

#include "finsler/geometry.hpp"

namespace finsler {

inline constexpr std::uint64_t kDefaultSeed = 12345;

/// FINSLER_LAB_SEED when set and numeric, else kDefaultSeed.
std::uint64_t default_seed();

struct Sample {
  Point x;
  Direction y;
  double b2 = 0.0, s = 0.0;
};

struct SamplingOptions {
  std::vector<double> lo, hi;  // empty: [0.5, 1.5]^n
  /// |phi - s phi_2| and |phi - s phi_2 + (b^2 - s^2) phi_22| must exceed this times max(1, |phi|).
  double denominator_floor = 0.05;
  int max_attempts = 200;
  /// Singular families: s > singular_s_floor * b.
  double singular_s_floor = 0.25;
};

class Sampler {
 public:
  Sampler(const MetricInstance& inst, std::uint64_t seed, SamplingOptions opts = {});

  /// Throws DomainError when no admissible draw is found at all.
  Sample next();
  std::vector<Sample> draw(int count);
  /// count unit-alpha directions at x (scaled), admissible for the instance.
  std::vector<Direction> directions(const Point& x, int count);

 private:
  bool admissible(double b2, double s) const;
  Point draw_point();
  Direction draw_direction(const Eigen::MatrixXd& chol_upper_inv);

  const MetricInstance& inst_;
  std::mt19937_64 rng_;
  SamplingOptions opts_;
};

}  // namespace finsler
