#pragma once

// Levi-Civita data of alpha and the covariant-derivative invariants of beta.

#include <Eigen/Dense>
#include <vector>

#include "finsler/geometry.hpp"

namespace finsler {

struct Christoffel {
  int n = 0;
  /// gamma[i](j, k) = Gamma^i_jk
  std::vector<Eigen::MatrixXd> gamma;

  double operator()(int i, int j, int k) const { return gamma[i](j, k); }
  /// ^alpha G^i = 1/2 Gamma^i_jk y^j y^k
  Eigen::VectorXd spray(std::span<const double> y) const;
  JetVector spray(std::span<const Jet> y) const;
};

Christoffel christoffel(const MetricField& alpha, const Point& x);

/// Largest |d_k a_ij - a_lj Gamma^l_ik - a_il Gamma^l_jk|.
double metric_compatibility_residual(const MetricField& alpha, const Point& x, const Christoffel& g);

/// b_{i|j} = d_j b_i - b_k Gamma^k_ij
Eigen::MatrixXd covariant_derivative_beta(const MetricInstance& inst, const Point& x);

/// The y-independent part of the invariants: everything except r_00, r_0, s_0, s^i_0.
struct BetaTensors {
  Eigen::MatrixXd a, a_inv;
  Eigen::VectorXd b_lower, b_upper;
  double b2 = 0.0;
  Eigen::MatrixXd b_cov, r, s;  // b_{i|j}, r_ij, s_ij
  Eigen::VectorXd r_lower, s_lower;  // r_i = b^j r_ji, s_i = b^j s_ji
  Eigen::VectorXd r_upper, s_upper;  // r^i, s^i
  double r_scalar = 0.0;             // r = b^i r_i
};

BetaTensors beta_tensors(const MetricInstance& inst, const Point& x);

struct BetaInvariants {
  Eigen::MatrixXd r_ij, s_ij, b_cov;
  double r00 = 0.0, r0 = 0.0, s0 = 0.0, r = 0.0;
  Eigen::VectorXd s_i0;  // s^i_0 = a^{ij} s_jk y^k
  Eigen::VectorXd r_upper, s_upper;  // r^i, s^i
  Eigen::VectorXd r_lower, s_lower;  // r_i, s_i
};

BetaInvariants beta_invariants(const MetricInstance& inst, const Point& x, const Direction& y);

struct ConformalFit {
  double c = 0.0;
  double residual = 0.0;  // max |b_{i|j} - c a_ij|
  bool is_conformal_closed = false;
  /// b_{i|j} vanishes: c = 0, which makes every phi Berwald.
  bool trivial = false;
};

inline constexpr double kConformalTolerance = 1e-8;

ConformalFit conformal_fit(const MetricInstance& inst, const Point& x, double tol = kConformalTolerance);
std::vector<ConformalFit> conformal_check(const MetricInstance& inst, const std::vector<Point>& points,
                                          double tol = kConformalTolerance);

}  // namespace finsler
