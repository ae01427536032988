#pragma once

// Scalar functions of b^2 used as classification parameters, adaptive Simpson
// quadrature, and integrals that stay differentiable under jets.

#include <functional>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "finsler/jet.hpp"

namespace finsler {

class UnivariateFunction {
 public:
  using Eval = std::function<Jet(const Jet&)>;

  UnivariateFunction() : UnivariateFunction(constant(0.0)) {}

  static UnivariateFunction constant(double v);
  /// sum_k coeffs[k] u^k
  static UnivariateFunction polynomial(std::vector<double> coeffs);
  static UnivariateFunction rational(std::vector<double> num, std::vector<double> den);
  /// Arbitrary callable; serializes as {"opaque": description}.
  static UnivariateFunction callable(std::string description, Eval eval);

  /// number | {"poly": [...]} | {"num": [...], "den": [...]}
  static UnivariateFunction from_json(const nlohmann::json& j);
  nlohmann::json to_json() const { return json_; }

  Jet operator()(const Jet& u) const { return eval_(u); }
  double operator()(double u) const { return eval_(Jet(u)).value(); }
  bool is_zero() const { return zero_; }

 private:
  UnivariateFunction(Eval eval, nlohmann::json j, bool zero) : eval_(std::move(eval)), json_(std::move(j)), zero_(zero) {}
  Eval eval_;
  nlohmann::json json_;
  bool zero_ = false;
};

inline constexpr double kQuadratureTolerance = 1e-10;

/// Adaptive Simpson on [a, b] (b < a allowed).  Throws IntegrationError on a
/// non-finite integrand or when the recursion depth runs out.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double tol = kQuadratureTolerance, int max_depth = 48);

/// int_lower^u g(v) dv with u a jet: the value comes from quadrature, the
/// higher Taylor coefficients from the Taylor coefficients of g at u.
Jet integral_jet(const std::function<Jet(const Jet&)>& g, double lower, const Jet& u,
                 double tol = kQuadratureTolerance);

/// Same, with the value at u already known.
Jet antiderivative_jet(const std::function<Jet(const Jet&)>& g, double value, const Jet& u);

}  // namespace finsler
