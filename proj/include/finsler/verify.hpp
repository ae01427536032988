#pragma once

// Check suites run against one instance, and the JSON run report.

#include <cstdint>
#include <map>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "finsler/classify.hpp"
#include "finsler/registry.hpp"

namespace finsler {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr int kReportVersion = 1;

/// spray, berwald, isotropic, lemma41, pde, regularity
const std::vector<std::string>& check_names();

struct CheckResult {
  std::string name;
  bool pass = false;
  /// The entry closest to (or furthest past) its tolerance.
  double residual = 0.0;
  double tol = 0.0;
  std::vector<ResidualEntry> entries;
  std::string note;
  nlohmann::json details = nlohmann::json::object();
  double seconds = 0.0;
};

struct VerifyOptions {
  std::vector<std::string> checks;  // empty: all
  int samples = 50;
  std::uint64_t seed = 12345;
  /// "check" overrides every entry of a check, "check.entry" a single entry.
  std::map<std::string, double> tol;
  int grid_density = 64;
};

struct RunReport {
  nlohmann::json instance;  // summary
  std::vector<CheckResult> checks;
  std::uint64_t seed = 0;
  int samples = 0;
  double seconds = 0.0;

  bool all_pass() const;
  nlohmann::json to_json(bool with_timing) const;
};

/// Throws std::invalid_argument for unknown checks, samples < 1 or bad tolerances.
RunReport verify_instance(const InstanceSpec& spec, const VerifyOptions& opts);

/// b^2 and s ranges over a seeded sample, regularity and conformal summaries.
RunReport inspect_instance(const InstanceSpec& spec, std::uint64_t seed, int samples = 50);

/// Pointwise quantity on the (b^2, s) plane: "phi", "E", "H" or
/// "residual:<eq>" with eq one of lresult1, lresult2, TTT1, HHH1, Ds, Ds1,
/// Ds2, Ds3, 1order.  NaN where the quantity cannot be evaluated.
class SweepQuantity {
 public:
  /// Throws std::invalid_argument for unknown names.
  SweepQuantity(const PhiFunction& phi, std::string name);
  const std::string& name() const { return name_; }
  double operator()(double b2, double s) const;

 private:
  PhiFunction phi_;
  std::string name_, eq_;
  ClassificationParams params_;
  double rho_ = 0.0;
};

}  // namespace finsler
