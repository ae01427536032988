#include "finsler/sampling.hpp"

#include <cmath>
#include <cstdlib>
#include <optional>
#include <string>

#include "finsler/errors.hpp"

namespace finsler {

std::uint64_t default_seed() {
  if (const char* env = std::getenv("FINSLER_LAB_SEED")) {
    try {
      std::size_t used = 0;
      const auto v = std::stoull(env, &used);
      if (used == std::string(env).size()) return v;
    } catch (const std::exception&) {
    }
  }
  return kDefaultSeed;
}

Sampler::Sampler(const MetricInstance& inst, std::uint64_t seed, SamplingOptions opts)
    : inst_(inst), rng_(seed), opts_(std::move(opts)) {
  const int n = inst.dim;
  if (opts_.lo.empty()) opts_.lo.assign(n, 0.5);
  if (opts_.hi.empty()) opts_.hi.assign(n, 1.5);
  if (static_cast<int>(opts_.lo.size()) != n || static_cast<int>(opts_.hi.size()) != n)
    throw std::invalid_argument("Sampler: box dimension does not match the instance");
}

bool Sampler::admissible(double b2, double s) const {
  const PhiFunction& phi = inst_.phi;
  if (!phi.in_domain(b2, s)) return false;
  if (phi.singular() && !(s > opts_.singular_s_floor * std::sqrt(b2))) return false;
  try {
    const PhiJet j(phi, b2, s, 2);
    const double d1 = j.value() - s * j.d2();
    const double d2 = d1 + (b2 - s * s) * j.d22();
    const double scale = std::max(1.0, std::abs(j.value()));
    return std::isfinite(d2) && std::abs(d1) > opts_.denominator_floor * scale &&
           std::abs(d2) > opts_.denominator_floor * scale;
  } catch (const Error&) {
    return false;
  }
}

Point Sampler::draw_point() {
  std::vector<double> x(inst_.dim);
  for (int i = 0; i < inst_.dim; ++i) x[i] = std::uniform_real_distribution<double>(opts_.lo[i], opts_.hi[i])(rng_);
  return Point(std::move(x));
}

Direction Sampler::draw_direction(const Eigen::MatrixXd& chol_upper_inv) {
  // a = L L^T; y = L^{-T} z / |z| has alpha(y) = 1
  std::normal_distribution<double> normal;
  Eigen::VectorXd z(inst_.dim);
  do {
    for (int i = 0; i < inst_.dim; ++i) z[i] = normal(rng_);
  } while (z.norm() < 1e-8);
  const double scale = std::uniform_real_distribution<double>(0.5, 2.0)(rng_);
  const Eigen::VectorXd y = scale * (chol_upper_inv * (z / z.norm()));
  return Direction(std::vector<double>(y.data(), y.data() + y.size()));
}

namespace {

Eigen::MatrixXd inverse_cholesky_transpose(const MetricInstance& inst, const Point& x) {
  Eigen::LLT<Eigen::MatrixXd> llt(inst.alpha.matrix(x));
  if (llt.info() != Eigen::Success) throw SingularMatrixError("alpha is not positive definite at the sample point");
  const Eigen::MatrixXd lt = llt.matrixU();
  return lt.inverse();
}

}  // namespace

Sample Sampler::next() {
  std::optional<Sample> last;
  for (int attempt = 0; attempt < opts_.max_attempts; ++attempt) {
    Point x = draw_point();
    double b2;
    Eigen::MatrixXd m;
    try {
      b2 = compute_b2(inst_, x);
      m = inverse_cholesky_transpose(inst_, x);
    } catch (const Error&) {
      continue;
    }
    Direction y = draw_direction(m);
    double s;
    try {
      s = compute_s(inst_, x, y);
    } catch (const Error&) {
      continue;
    }
    if (inst_.phi.in_domain(b2, s)) last = Sample{x, y, b2, s};
    if (admissible(b2, s)) return Sample{std::move(x), std::move(y), b2, s};
  }
  if (last) return *last;
  throw DomainError("sampling: no admissible (x, y) found in the sample box");
}

std::vector<Sample> Sampler::draw(int count) {
  std::vector<Sample> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) out.push_back(next());
  return out;
}

std::vector<Direction> Sampler::directions(const Point& x, int count) {
  const double b2 = compute_b2(inst_, x);
  const Eigen::MatrixXd m = inverse_cholesky_transpose(inst_, x);
  std::vector<Direction> out;
  for (int k = 0; k < count; ++k) {
    std::optional<Direction> pick;
    for (int attempt = 0; attempt < opts_.max_attempts; ++attempt) {
      Direction y = draw_direction(m);
      const double s = compute_s(inst_, x, y);
      if (inst_.phi.in_domain(b2, s)) pick = y;
      if (admissible(b2, s)) break;
    }
    if (!pick) throw DomainError("sampling: no admissible direction at the sample point");
    out.push_back(*pick);
  }
  return out;
}

}  // namespace finsler
