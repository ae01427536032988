#include "finsler/regularity.hpp"

#include <cmath>
#include <algorithm>
#include <future>
#include <thread>
#include <sstream>

#include "finsler/errors.hpp"

namespace finsler {

std::vector<RegularityViolation> check_point(const PhiFunction& phi, double b2, double s, int n) {
  std::vector<RegularityViolation> out;
  double p, p2, p22;
  try {
    auto space = JetSpace::uniform(2, 2);
    const Jet j = phi.raw(Jet::variable(space, 0, b2), Jet::variable(space, 1, s));
    p = j.value();
    p2 = j.derivative({0, 1});
    p22 = j.derivative({0, 2});
  } catch (const std::exception& e) {
    out.push_back({b2, s, "evaluation", std::nan(""), e.what()});
    return out;
  }
  if (!std::isfinite(p) || !std::isfinite(p2) || !std::isfinite(p22)) {
    out.push_back({b2, s, "evaluation", std::nan(""), "non-finite value"});
    return out;
  }
  const double d1 = p - s * p2;
  const double d2 = d1 + (b2 - s * s) * p22;
  if (!(p > 0.0)) out.push_back({b2, s, "phi", p, ""});
  if (n >= 3 && !(d1 > 0.0)) out.push_back({b2, s, "phi-s*phi2", d1, ""});
  if (!(d2 > 0.0)) out.push_back({b2, s, "phi-s*phi2+(b2-s2)*phi22", d2, ""});
  return out;
}

namespace {

struct Pass {
  std::vector<RegularityViolation> violations;
  long count = 0;
  double b0_estimate = 0.0;
  int rows = 0, cols = 0;
};

Pass run_pass(const PhiFunction& phi, double b0_probe, int n, int rows, int cols) {
  // row r: b = b0_probe r / rows; column m: s = b (-1 + 2 m / cols)
  auto row = [&phi, b0_probe, n, rows, cols](int r) {
    std::vector<RegularityViolation> v;
    const double b = b0_probe * r / rows;
    for (int m = 0; m <= cols; ++m) {
      const double s = b * (-1.0 + 2.0 * m / cols);
      auto pt = check_point(phi, b * b, s, n);
      v.insert(v.end(), pt.begin(), pt.end());
    }
    return v;
  };
  const int workers = std::clamp(static_cast<int>(std::thread::hardware_concurrency()), 1, 8);
  std::vector<std::vector<RegularityViolation>> per_row(rows);
  std::vector<std::future<void>> jobs;
  for (int w = 0; w < workers; ++w)
    jobs.push_back(std::async(std::launch::async, [&, w] {
      for (int r = w; r < rows; r += workers) per_row[r] = row(r);
    }));
  for (auto& j : jobs) j.get();

  Pass p;
  p.rows = rows;
  p.cols = cols + 1;
  p.b0_estimate = b0_probe;
  bool failed = false;
  for (int r = 0; r < rows; ++r) {
    auto& v = per_row[r];
    if (!v.empty() && !failed) {
      failed = true;
      p.b0_estimate = b0_probe * r / rows;
    }
    p.count += static_cast<long>(v.size());
    for (auto& x : v)
      if (p.violations.size() < RegularityReport::kMaxStored) p.violations.push_back(std::move(x));
  }
  return p;
}

}  // namespace

RegularityReport check_regularity(const PhiFunction& phi, double b0_probe, int n, int grid_density) {
  if (grid_density < 8) throw std::invalid_argument("check_regularity: grid_density must be >= 8");
  if (!(b0_probe > 0.0) || !std::isfinite(b0_probe))
    throw std::invalid_argument("check_regularity: b0_probe must be positive and finite");
  if (n < 2) throw std::invalid_argument("check_regularity: n must be >= 2");
  const int rows = std::max(grid_density, static_cast<int>(std::ceil(grid_density * b0_probe)));
  const int cols = grid_density + grid_density % 2;

  RegularityReport rep;
  rep.singular = phi.singular();
  rep.dimension_mode = n >= 3 ? "n>=3" : "n=2";
  rep.b0_probe = b0_probe;
  const Pass coarse = run_pass(phi, b0_probe, n, rows, cols);
  const Pass fine = run_pass(phi, b0_probe, n, 2 * rows, 2 * cols);
  rep.b0_estimate_coarse = coarse.b0_estimate;
  rep.b0_estimate = std::min(coarse.b0_estimate, fine.b0_estimate);
  rep.grid_rows = fine.rows;
  rep.grid_cols = fine.cols;
  rep.violation_count = fine.count;
  rep.violations = fine.violations;
  rep.pass = rep.violation_count == 0;
  return rep;
}

}  // namespace finsler
