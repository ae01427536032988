#include "finsler/univariate.hpp"

#include <cmath>
#include <sstream>

#include "finsler/errors.hpp"

namespace finsler {

namespace {

Jet horner(const std::vector<double>& c, const Jet& u) {
  Jet acc(0.0);
  for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * u + *it;
  return acc;
}

std::vector<double> coeff_list(const nlohmann::json& j, const char* field) {
  if (!j.is_array() || j.empty()) throw std::invalid_argument(std::string("'") + field + "' must be a non-empty array");
  std::vector<double> c;
  for (const auto& v : j) {
    if (!v.is_number()) throw std::invalid_argument(std::string("'") + field + "' entries must be numbers");
    c.push_back(v.get<double>());
  }
  return c;
}

bool all_zero(const std::vector<double>& c) {
  for (double v : c)
    if (v != 0.0) return false;
  return true;
}

}  // namespace

UnivariateFunction UnivariateFunction::constant(double v) {
  return UnivariateFunction([v](const Jet&) { return Jet(v); }, v, v == 0.0);
}

UnivariateFunction UnivariateFunction::polynomial(std::vector<double> coeffs) {
  if (coeffs.empty()) throw std::invalid_argument("polynomial: no coefficients");
  const bool zero = all_zero(coeffs);
  nlohmann::json j = {{"poly", coeffs}};
  return UnivariateFunction([c = std::move(coeffs)](const Jet& u) { return horner(c, u); }, std::move(j), zero);
}

UnivariateFunction UnivariateFunction::rational(std::vector<double> num, std::vector<double> den) {
  if (num.empty() || den.empty()) throw std::invalid_argument("rational: empty numerator or denominator");
  if (all_zero(den)) throw std::invalid_argument("rational: zero denominator");
  const bool zero = all_zero(num);
  nlohmann::json j = {{"num", num}, {"den", den}};
  return UnivariateFunction(
      [n = std::move(num), d = std::move(den)](const Jet& u) {
        const Jet q = horner(d, u);
        if (q.value() == 0.0) {
          std::ostringstream os;
          os << "rational function: denominator vanishes at b^2 = " << u.value();
          throw DomainError(os.str());
        }
        return horner(n, u) / q;
      },
      std::move(j), zero);
}

UnivariateFunction UnivariateFunction::callable(std::string description, Eval eval) {
  return UnivariateFunction(std::move(eval), {{"opaque", std::move(description)}}, false);
}

UnivariateFunction UnivariateFunction::from_json(const nlohmann::json& j) {
  if (j.is_number()) return constant(j.get<double>());
  if (j.is_object()) {
    if (j.contains("poly")) return polynomial(coeff_list(j.at("poly"), "poly"));
    if (j.contains("num") || j.contains("den")) {
      if (!j.contains("num") || !j.contains("den")) throw std::invalid_argument("rational function needs 'num' and 'den'");
      return rational(coeff_list(j.at("num"), "num"), coeff_list(j.at("den"), "den"));
    }
  }
  throw std::invalid_argument("expected a number, {\"poly\": [...]} or {\"num\": [...], \"den\": [...]}");
}

namespace {

struct SimpsonState {
  const std::function<double(double)>* f;
  int max_depth;
};

double checked(const SimpsonState& st, double x) {
  const double v = (*st.f)(x);
  if (!std::isfinite(v)) {
    std::ostringstream os;
    os << "quadrature: integrand is not finite at " << x;
    throw IntegrationError(os.str());
  }
  return v;
}

double simpson_rec(const SimpsonState& st, double a, double b, double fa, double fm, double fb, double whole,
                   double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = checked(st, lm), frm = checked(st, rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double diff = left + right - whole;
  if (std::abs(diff) <= 15.0 * tol) return left + right + diff / 15.0;
  if (depth >= st.max_depth) {
    std::ostringstream os;
    os << "quadrature did not converge on [" << a << ", " << b << "] (error estimate " << std::abs(diff) / 15.0 << ")";
    throw IntegrationError(os.str());
  }
  return simpson_rec(st, a, m, fa, flm, fm, left, 0.5 * tol, depth + 1) +
         simpson_rec(st, m, b, fm, frm, fb, right, 0.5 * tol, depth + 1);
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol, int max_depth) {
  if (a == b) return 0.0;
  if (b < a) return -adaptive_simpson(f, b, a, tol, max_depth);
  const SimpsonState st{&f, max_depth};
  const double fa = checked(st, a), fb = checked(st, b), fm = checked(st, 0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_rec(st, a, b, fa, fm, fb, whole, tol, 0);
}

Jet integral_jet(const std::function<Jet(const Jet&)>& g, double lower, const Jet& u, double tol) {
  const double value = adaptive_simpson([&](double v) { return g(Jet(v)).value(); }, lower, u.value(), tol);
  return antiderivative_jet(g, value, u);
}

Jet antiderivative_jet(const std::function<Jet(const Jet&)>& g, double value, const Jet& u) {
  const double u0 = u.value();
  if (u.is_scalar()) return Jet(value);
  const int order = u.space()->max_total_degree();
  if (order == 0) return Jet::constant(u.space(), value);
  auto line = JetSpace::uniform(1, order - 1);
  const Jet gj = g(Jet::variable(line, 0, u0));
  std::vector<double> taylor(order + 1, 0.0);
  taylor[0] = value;
  double fact = 1.0;
  for (int k = 1; k <= order; ++k) {
    if (k > 1) fact *= k - 1;
    const double dk = gj.is_scalar() ? (k == 1 ? gj.value() : 0.0) : gj.derivative({k - 1}) / fact;
    taylor[k] = dk / k;
  }
  return compose(u, taylor);
}

}  // namespace finsler
