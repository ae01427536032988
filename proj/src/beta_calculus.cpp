#include "finsler/beta_calculus.hpp"

#include <cmath>
#include <stdexcept>

#include "finsler/errors.hpp"

namespace finsler {

namespace {

Eigen::MatrixXd checked_inverse(const Eigen::MatrixXd& a) {
  Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
  if (!lu.isInvertible()) throw SingularMatrixError("a(x) is singular");
  return lu.inverse();
}

}  // namespace

Eigen::VectorXd Christoffel::spray(std::span<const double> y) const {
  Eigen::Map<const Eigen::VectorXd> yv(y.data(), static_cast<Eigen::Index>(y.size()));
  Eigen::VectorXd g(n);
  for (int i = 0; i < n; ++i) g(i) = 0.5 * yv.dot(gamma[i] * yv);
  return g;
}

JetVector Christoffel::spray(std::span<const Jet> y) const {
  JetVector g(n, Jet(0.0));
  for (int i = 0; i < n; ++i) {
    Jet acc(0.0);
    for (int j = 0; j < n; ++j) {
      Jet row(0.0);
      for (int k = 0; k < n; ++k) row += gamma[i](j, k) * y[k];
      acc += row * y[j];
    }
    g[i] = 0.5 * acc;
  }
  return g;
}

Christoffel christoffel(const MetricField& alpha, const Point& x) {
  const int n = alpha.dim();
  const Eigen::MatrixXd a_inv = checked_inverse(alpha.matrix(x));
  const auto da = alpha.derivative(x);
  Christoffel c;
  c.n = n;
  c.gamma.assign(n, Eigen::MatrixXd::Zero(n, n));
  // Gamma_ljk = 1/2 (d_j a_lk + d_k a_lj - d_l a_jk)
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = j; k < n; ++k) {
        double acc = 0.0;
        for (int l = 0; l < n; ++l) acc += a_inv(i, l) * 0.5 * (da[j](l, k) + da[k](l, j) - da[l](j, k));
        c.gamma[i](j, k) = acc;
        c.gamma[i](k, j) = acc;
      }
  return c;
}

double metric_compatibility_residual(const MetricField& alpha, const Point& x, const Christoffel& g) {
  const int n = alpha.dim();
  const Eigen::MatrixXd a = alpha.matrix(x);
  const auto da = alpha.derivative(x);
  double worst = 0.0;
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double rhs = 0.0;
        for (int l = 0; l < n; ++l) rhs += a(l, j) * g(l, i, k) + a(i, l) * g(l, j, k);
        worst = std::max(worst, std::abs(da[k](i, j) - rhs));
      }
  return worst;
}

Eigen::MatrixXd covariant_derivative_beta(const MetricInstance& inst, const Point& x) {
  const int n = inst.dim;
  const Christoffel gam = christoffel(inst.alpha, x);
  const Eigen::VectorXd b = inst.beta.vector(x);
  Eigen::MatrixXd cov = inst.beta.derivative(x);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) cov(i, j) -= b(k) * gam(k, i, j);
  return cov;
}

BetaTensors beta_tensors(const MetricInstance& inst, const Point& x) {
  BetaTensors t;
  t.a = inst.alpha.matrix(x);
  t.a_inv = checked_inverse(t.a);
  t.b_lower = inst.beta.vector(x);
  t.b_upper = t.a_inv * t.b_lower;
  t.b2 = t.b_lower.dot(t.b_upper);
  t.b_cov = covariant_derivative_beta(inst, x);
  t.r = 0.5 * (t.b_cov + t.b_cov.transpose());
  t.s = 0.5 * (t.b_cov - t.b_cov.transpose());
  t.r_lower = t.r.transpose() * t.b_upper;  // b^j r_ji
  t.s_lower = t.s.transpose() * t.b_upper;  // b^j s_ji
  t.r_upper = t.a_inv * t.r_lower;
  t.s_upper = t.a_inv * t.s_lower;
  t.r_scalar = t.b_upper.dot(t.r_lower);
  return t;
}

BetaInvariants beta_invariants(const MetricInstance& inst, const Point& x, const Direction& y) {
  const BetaTensors t = beta_tensors(inst, x);
  Eigen::Map<const Eigen::VectorXd> yv(y.values().data(), y.dim());
  BetaInvariants inv;
  inv.b_cov = t.b_cov;
  inv.r_ij = t.r;
  inv.s_ij = t.s;
  inv.r00 = yv.dot(t.r * yv);
  inv.s_i0 = t.a_inv * (t.s * yv);
  inv.r_lower = t.r_lower;
  inv.s_lower = t.s_lower;
  inv.r0 = t.r_lower.dot(yv);
  inv.s0 = t.s_lower.dot(yv);
  inv.r_upper = t.r_upper;
  inv.s_upper = t.s_upper;
  inv.r = t.r_scalar;
  return inv;
}

ConformalFit conformal_fit(const MetricInstance& inst, const Point& x, double tol) {
  const Eigen::MatrixXd a = inst.alpha.matrix(x);
  const Eigen::MatrixXd cov = covariant_derivative_beta(inst, x);
  ConformalFit fit;
  if (cov.cwiseAbs().maxCoeff() < tol) {
    fit.c = 0.0;
    fit.trivial = true;
    fit.residual = cov.cwiseAbs().maxCoeff();
    fit.is_conformal_closed = true;
    return fit;
  }
  fit.c = (checked_inverse(a) * cov).trace() / inst.dim;
  fit.residual = (cov - fit.c * a).cwiseAbs().maxCoeff();
  fit.is_conformal_closed = fit.residual < tol;
  return fit;
}

std::vector<ConformalFit> conformal_check(const MetricInstance& inst, const std::vector<Point>& points, double tol) {
  if (points.empty()) throw std::invalid_argument("conformal_check: need at least one sample point");
  std::vector<ConformalFit> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(conformal_fit(inst, p, tol));
  return out;
}

}  // namespace finsler
