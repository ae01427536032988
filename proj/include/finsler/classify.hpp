#pragma once

// Isotropic-Berwald classification: residual checkers for the characterizing
// equations, the four solution families, and the Bernoulli/characteristic ODE
// layer behind the Berwald family.

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "finsler/geometry.hpp"
#include "finsler/univariate.hpp"

namespace finsler {

/// rho = tau / c and the scalar functions of b^2 in
///   E - rho phi = sigma s / 2,   H = (t1 + t2 s^2) / 2.
struct ClassificationParams {
  double rho = 0.0;
  UnivariateFunction sigma, t1, t2;
  UnivariateFunction t3 = UnivariateFunction::constant(1.0);
  UnivariateFunction k = UnivariateFunction::constant(1.0);
  UnivariateFunction a = UnivariateFunction::constant(1.0);
  double ref = 1.0;  // lower limit of the quadratures
};

struct ResidualEntry {
  std::string name;
  double max_abs = 0.0;
  double rms = 0.0;
  double tol = 0.0;
  int points = 0;
  int skipped = 0;  // grid points where the equation could not be evaluated
  bool pass = false;
  std::string note;  // first evaluation error, if any
};

struct ResidualReport {
  std::vector<ResidualEntry> entries;

  bool all_pass() const;
  /// nullptr when absent
  const ResidualEntry* find(const std::string& name) const;
  void append(const ResidualReport& other);
};
using PDEResiduals = ResidualReport;

struct GridPoint {
  double b2, s;
};

/// nb rows b = b_max (r + 1) / nb and ns columns s = b (s_lo + (s_hi - s_lo) m / (ns - 1)).
/// Defaults: b_max = min(0.6, 0.9 b0); s/b in [-0.9, 0.9], or [0.05, 0.8] for
/// singular families.
struct GridSpec {
  int nb = 20, ns = 20;
  std::optional<double> b_max;
  std::optional<double> s_lo, s_hi;
};
std::vector<GridPoint> make_grid(const PhiFunction& phi, const GridSpec& spec = {});

inline constexpr double kLemmaTolerance = 1e-9;
inline constexpr double kPdeTolerance = 1e-7;
inline constexpr double kIdentityTolerance = 1e-8;

/// lresult1: E - s E_2 - rho (phi - s phi_2),  lresult2: H_2 - s H_22,
/// each divided by 1 + the magnitude of its terms (E and H grow like 1/b^2
/// for the Berwald family).
ResidualReport lemma41_residuals(const PhiFunction& phi, double rho, std::span<const GridPoint> grid,
                                 double tol = kLemmaTolerance);

/// TTT1, HHH1, Ds, Ds1, Ds2, plus the derivation identities
///   Ds1 = d_s TTT1 - HHH1   and   Ds2 = 2 TTT1 - s Ds1
/// with d_s TTT1 taken by jets.
ResidualReport pde_residuals(const PhiFunction& phi, const ClassificationParams& params,
                             std::span<const GridPoint> grid, double tol = kPdeTolerance);

/// Ds3 by jets, and its agreement with -2 Ds2 / phi^3.
ResidualReport ds3_residuals(const PhiFunction& phi, const ClassificationParams& params,
                             std::span<const GridPoint> grid, double tol = kPdeTolerance);

/// phi_1 + s [1/b^2 - (b^2 - s^2) t2] phi_2 / 2 - (-1/b^2 + t2 s^2) phi / 2
ResidualReport order1_residuals(const PhiFunction& phi, const UnivariateFunction& t2,
                                std::span<const GridPoint> grid, double tol = kPdeTolerance);

/// sigma, t1, t2 at one b^2 from least-squares fits of E - rho phi (odd linear)
/// and H (even quadratic) over s; the fit residuals measure how far phi is
/// from the isotropic-Berwald structure.
struct RecoveredParams {
  double b2 = 0.0, sigma = 0.0, t1 = 0.0, t2 = 0.0;
  double linearity_residual = 0.0;  // E - rho phi vs sigma s / 2
  double quadratic_residual = 0.0;  // H vs (t1 + t2 s^2) / 2
};
RecoveredParams recover_params(const PhiFunction& phi, double rho, double b2, std::span<const double> s_values);

/// eq9 / eq10 entries, one fit per distinct b^2 of the grid.
ResidualReport recovery_residuals(const PhiFunction& phi, double rho, std::span<const GridPoint> grid,
                                  double tol = kLemmaTolerance);

/// Params whose sigma, t1, t2 are recovered on demand at each b^2.
ClassificationParams recovered_params(const PhiFunction& phi, double rho);

/// The parameters a theorem family was built from, or nullopt for other
/// families.  Kropina and the Berwald family carry sigma = -2/b^2, t1 = 1/b^2.
std::optional<ClassificationParams> declared_params(const PhiFunction& phi);

/// rho stored in the family parameters (0 when absent).
double family_rho(const PhiFunction& phi);

// Families.  `probe_b` bounds the b-range on which the radicand is checked
// at construction; violations raise DomainError naming the point.
PhiFunction family_randers(const UnivariateFunction& k, const UnivariateFunction& t1, const UnivariateFunction& sigma,
                           double rho, double probe_b = 0.6);
PhiFunction family_kropina(const UnivariateFunction& a, double rho = 0.0);
PhiFunction family_riemannian(const UnivariateFunction& t3, const UnivariateFunction& t1,
                              const UnivariateFunction& sigma, double probe_b = 0.6);
/// phi = varphi(xi) e^{K(b^2)} s,  xi = s^2 / (A + s^2 C) with
///   A = exp int_ref^{b^2} (1/v - v t2),  C = int_ref^{b^2} t2 A,  K = int_ref^{b^2} (v t2 / 2 - 1/v).
PhiFunction family_berwald(const UnivariateFunction& t2, const UnivariateFunction& varphi, double ref = 1.0);

/// The quadratures shared by the Berwald family and the Bernoulli solution,
/// memoized per b^2.
class BerwaldIntegrals {
 public:
  BerwaldIntegrals(UnivariateFunction t2, double ref, double tol = kQuadratureTolerance);

  Jet J(const Jet& u) const;  // int (1/v - v t2)
  Jet C(const Jet& u) const;  // int t2 e^J
  Jet K(const Jet& u) const;  // int (v t2 / 2 - 1/v)
  double ref() const { return ref_; }
  const UnivariateFunction& t2() const { return t2_; }

 private:
  struct Cache;
  Jet moment(const Jet& u) const;
  UnivariateFunction t2_;
  double ref_, tol_;
  std::shared_ptr<Cache> cache_;
};

/// 1/s^2 along a characteristic of the first-order PDE:
///   1/s^2 = e^{-J(b^2)} [c1 - C(b^2)],
/// the solution of d/du (1/s^2) = (u t2 - 1/u) / s^2 - t2 with value c1 at u = ref.
class OdeSolution {
 public:
  OdeSolution(UnivariateFunction t2, double c1, double ref = 1.0, double tol = kQuadratureTolerance);

  Jet inv_s2(const Jet& u) const;
  double inv_s2(double u) const { return inv_s2(Jet(u)).value(); }
  /// s > 0 on the characteristic; DomainError once 1/s^2 <= 0.
  double s(double u) const;
  /// |d/du(1/s^2) - (u t2 - 1/u)/s^2 + t2| by jets.
  double ode_residual(double u) const;

  double c1() const { return c1_; }
  double ref() const { return integrals_.ref(); }
  double tolerance() const { return tol_; }
  const BerwaldIntegrals& integrals() const { return integrals_; }

 private:
  BerwaldIntegrals integrals_;
  double c1_, tol_;
};

OdeSolution bernoulli_solve(const UnivariateFunction& t2, double c1, double ref = 1.0);

/// A characteristic traced by an independent Runge-Kutta integration of
///   ds/du = s [1/u - (u - s^2) t2] / 2,   dphi/du = (-1/u + t2 s^2) phi / 2
/// from (ref, s0, phi0), with both first integrals evaluated at every output.
struct CharacteristicTrace {
  std::vector<double> u, s, phi;
  std::vector<double> chara3;  // s^2 / (A + s^2 C)
  std::vector<double> chara6;  // ln(s / phi) - int (1/v - v t2 / 2)
  double chara3_variation = 0.0;
  double chara6_variation = 0.0;
  /// max |1/s^2 (RK) - closed form| over the outputs
  double closed_form_deviation = 0.0;
};
CharacteristicTrace trace_characteristic(const OdeSolution& sol, double phi0, double u_end, int outputs = 40);

struct QuadraticSprayCheck {
  double residual = 0.0;  // relative to max |G - tau F y|
  double tol = 1e-8;
  int directions = 0;
  bool pass = false;
};

/// Fits G^i - tau F y^i by quadratic forms in y over the given directions
/// (at least 2 n^2 of them).
QuadraticSprayCheck quadratic_spray_check(const MetricInstance& inst, double tau, const Point& x,
                                          std::span<const Direction> directions, double tol = 1e-8);

}  // namespace finsler
