#pragma once

// Spray coefficients G^i of F = alpha phi(b^2, s), computed three ways:
//
//  * definitional: 1/4 g^{il} ([F^2]_{x^k y^l} y^k - [F^2]_{x^l}), with every
//    derivative taken by jets of F^2.  This is the oracle.
//  * general: ^alpha G^i plus the beta-invariant correction with the scalar
//    functions Q, R, Theta, Psi, Pi, Omega.
//  * conformal: ^alpha G^i + c alpha E y^i + c alpha^2 H b^i, valid when
//    b_{i|j} = c a_ij.

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "finsler/geometry.hpp"

namespace finsler {

struct SprayScalars {
  double Q = 0.0, R = 0.0, Theta = 0.0, Psi = 0.0, Pi = 0.0, Omega = 0.0;
};

/// Throws RegularityError when phi - s phi_2 or phi - s phi_2 + (b^2 - s^2) phi_22 vanishes.
SprayScalars spray_scalars(const PhiJet& jet);
SprayScalars spray_scalars(const PhiJet& jet, double b2, double s);

struct EHScalars {
  double E = 0.0, E2 = 0.0, E22 = 0.0, E222 = 0.0;
  double H = 0.0, H2 = 0.0, H22 = 0.0, H222 = 0.0;
};

/// E, H and their first three s-derivatives, by jets through the closed forms
///   H = (phi_22 - 2(phi_1 - s phi_12)) / (2 [phi - s phi_2 + (b^2 - s^2) phi_22])
///   E = (phi_2 + 2 s phi_1) / (2 phi) - H (s phi + (b^2 - s^2) phi_2) / phi
EHScalars eh_scalars(const PhiFunction& phi, double b2, double s);

/// Taylor coefficients in s (around s) of E and H, up to `order` (<= 3).
struct EHSeries {
  std::vector<double> E, H;
};
EHSeries eh_series(const PhiFunction& phi, double b2, double s, int order);

/// E and H evaluated on jets of s, for residual checks that need more
/// s-derivatives (s_jet lives in a one-variable space).
struct EHJets {
  Jet E, H, phi, phi1, phi2, phi12, phi22;
};
EHJets eh_jets(const PhiFunction& phi, double b2, const Jet& s_jet);

struct SprayResult {
  Eigen::VectorXd G;
  Eigen::VectorXd G_alpha;  // ^alpha G^i = 1/2 Gamma^i_jk y^j y^k
  /// For the conformal form: G = G_alpha + y_coefficient y + b_coefficient b^i.
  std::optional<double> y_coefficient;
  std::optional<double> b_coefficient;
};

SprayResult spray_definitional(const MetricInstance& inst, const Point& x, const Direction& y);
SprayResult spray_general(const MetricInstance& inst, const Point& x, const Direction& y);
/// Throws PreconditionError unless beta is closed and conformal at x with factor c.
SprayResult spray_conformal(const MetricInstance& inst, double c, const Point& x, const Direction& y);
/// Same, with c fitted at x.
SprayResult spray_conformal(const MetricInstance& inst, const Point& x, const Direction& y);

/// Jet versions.  The definitional one builds its own y-space of the given
/// order; the others take y already expanded in any space.
JetVector spray_definitional_jet(const MetricInstance& inst, const Point& x, const Direction& y, int order);
JetVector spray_general_jet(const MetricInstance& inst, const Point& x, std::span<const Jet> y);
JetVector spray_conformal_jet(const MetricInstance& inst, double c, const Point& x, std::span<const Jet> y);

}  // namespace finsler
