#pragma once

// Grid check of the regularity inequalities on { |s| <= b < b0_probe }:
//   phi > 0,  phi - s phi_2 > 0 (n >= 3 only),  phi - s phi_2 + (b^2 - s^2) phi_22 > 0.

#include <string>
#include <vector>

#include "finsler/geometry.hpp"

namespace finsler {

struct RegularityViolation {
  double b2 = 0.0, s = 0.0;
  std::string inequality;  // "phi", "phi-s*phi2", "phi-s*phi2+(b2-s2)*phi22" or "evaluation"
  double value = 0.0;
  std::string message;  // evaluation failures only
};

struct RegularityReport {
  bool pass = false;
  bool singular = false;  // phi is only defined for s > 0
  std::string dimension_mode;  // "n>=3" or "n=2"
  double b0_probe = 0.0;
  /// Largest b below which every grid row passes (b0_probe when nothing fails).
  double b0_estimate = 0.0;
  /// Same, from the first (coarse) pass.
  double b0_estimate_coarse = 0.0;
  int grid_rows = 0, grid_cols = 0;
  long violation_count = 0;
  std::vector<RegularityViolation> violations;  // first kMaxStored of them
  static constexpr std::size_t kMaxStored = 256;
};

/// grid_density rows and columns per unit b, refined once at double density.
RegularityReport check_regularity(const PhiFunction& phi, double b0_probe, int n, int grid_density = 64);

/// The inequalities at a single point.
std::vector<RegularityViolation> check_point(const PhiFunction& phi, double b2, double s, int n);

}  // namespace finsler
