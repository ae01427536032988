#include "finsler/geometry.hpp"

#include <cmath>
#include <sstream>

#include "finsler/errors.hpp"

namespace finsler {

Point::Point(std::vector<double> coords) : x_(std::move(coords)) {
  if (x_.size() < 2) throw DomainError("Point: dimension must be >= 2");
  for (double v : x_)
    if (!std::isfinite(v)) throw DomainError("Point: non-finite coordinate");
}

Direction::Direction(std::vector<double> comps) : y_(std::move(comps)) {
  if (y_.size() < 2) throw DomainError("Direction: dimension must be >= 2");
  bool nonzero = false;
  for (double v : y_) {
    if (!std::isfinite(v)) throw DomainError("Direction: non-finite component");
    nonzero = nonzero || v != 0.0;
  }
  if (!nonzero) throw DomainError("Direction: y = 0");
}

Direction Direction::scaled(double lambda) const {
  std::vector<double> v = y_;
  for (auto& c : v) c *= lambda;
  return Direction(std::move(v));
}

MetricField::MetricField(std::string family, nlohmann::json params, int dim, Eval eval)
    : family_(std::move(family)), params_(std::move(params)), dim_(dim), eval_(std::move(eval)) {}

Eigen::MatrixXd MetricField::matrix(const Point& x) const { return values_of(at(x.as_jets())); }

std::vector<Eigen::MatrixXd> MetricField::derivative(const Point& x) const {
  const int n = dim_;
  auto space = JetSpace::uniform(n, 1);
  JetVector xj;
  for (int i = 0; i < n; ++i) xj.push_back(Jet::variable(space, i, x[i]));
  const JetMatrix a = at(xj);
  std::vector<Eigen::MatrixXd> da(n, Eigen::MatrixXd::Zero(n, n));
  std::vector<int> orders(n, 0);
  for (int k = 0; k < n; ++k) {
    orders.assign(n, 0);
    orders[k] = 1;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) da[k](i, j) = a(i, j).derivative(orders);
  }
  return da;
}

OneFormField::OneFormField(std::string family, nlohmann::json params, int dim, Eval eval)
    : family_(std::move(family)), params_(std::move(params)), dim_(dim), eval_(std::move(eval)) {}

Eigen::VectorXd OneFormField::vector(const Point& x) const { return values_of(at(x.as_jets())); }

Eigen::MatrixXd OneFormField::derivative(const Point& x) const {
  const int n = dim_;
  auto space = JetSpace::uniform(n, 1);
  JetVector xj;
  for (int i = 0; i < n; ++i) xj.push_back(Jet::variable(space, i, x[i]));
  const JetVector b = at(xj);
  Eigen::MatrixXd db(n, n);
  std::vector<int> orders(n, 0);
  for (int j = 0; j < n; ++j) {
    orders.assign(n, 0);
    orders[j] = 1;
    for (int i = 0; i < n; ++i) db(i, j) = b[i].derivative(orders);
  }
  return db;
}

PhiFunction::PhiFunction(std::string family, nlohmann::json params, Eval eval, double b0, bool singular)
    : family_(std::move(family)), params_(std::move(params)), eval_(std::move(eval)), b0_(b0), singular_(singular) {
  if (!(b0_ > 0.0)) throw std::invalid_argument("PhiFunction: b0 must be positive");
}

bool PhiFunction::in_domain(double b2, double s) const {
  if (!(b2 >= 0.0) || !std::isfinite(s)) return false;
  const double b = std::sqrt(b2);
  if (!(b < b0_)) return false;
  if (std::abs(s) > b * (1.0 + 1e-10) + 1e-14) return false;
  if (singular_ && !(s > 0.0)) return false;
  return true;
}

void PhiFunction::check_domain(double b2, double s) const {
  if (in_domain(b2, s)) return;
  std::ostringstream os;
  os << "phi '" << family_ << "' evaluated outside its domain at (b^2, s) = (" << b2 << ", " << s << ")";
  if (!(b2 >= 0.0)) os << ": negative b^2";
  else if (!(std::sqrt(b2) < b0_)) os << ": b >= b0 = " << b0_;
  else if (singular_ && !(s > 0.0)) os << ": singular family requires s > 0";
  else os << ": |s| > b";
  throw DomainError(os.str());
}

Jet PhiFunction::operator()(const Jet& b2, const Jet& s) const {
  check_domain(b2.value(), s.value());
  return eval_(b2, s);
}

double PhiFunction::operator()(double b2, double s) const { return (*this)(Jet(b2), Jet(s)).value(); }

PhiJet::PhiJet(const PhiFunction& phi, double b2, double s, int order) : b2_(b2), s_(s), order_(order) {
  auto space = JetSpace::uniform(2, order);
  jet_ = phi(Jet::variable(space, 0, b2), Jet::variable(space, 1, s));
}

double PhiJet::partial(int i, int j) const {
  if (i + j > order_) throw std::out_of_range("PhiJet: partial beyond the computed order");
  const int o[2] = {i, j};
  return jet_.derivative(std::span<const int>(o, 2));
}

Jet PhiJet::along_s(int i, int j, const Jet& s_jet) const {
  const int top = order_ - i - j;
  if (top < 0) throw std::out_of_range("PhiJet::along_s: order exhausted");
  std::vector<double> taylor(top + 1);
  double fact = 1.0;
  for (int m = 0; m <= top; ++m) {
    if (m > 0) fact *= m;
    taylor[m] = partial(i, j + m) / fact;
  }
  return compose(s_jet, taylor);
}

MetricInstance::MetricInstance(std::string name_, MetricField alpha_, OneFormField beta_, PhiFunction phi_)
    : name(std::move(name_)), dim(alpha_.dim()), alpha(std::move(alpha_)), beta(std::move(beta_)), phi(std::move(phi_)) {
  if (beta.dim() != dim) throw std::invalid_argument("MetricInstance: alpha/beta dimension mismatch");
  if (dim < 2) throw std::invalid_argument("MetricInstance: dimension must be >= 2");
}

LocalJets local_jets(const MetricInstance& inst, std::span<const Jet> x) {
  if (static_cast<int>(x.size()) != inst.dim) throw DomainError("point dimension does not match the instance");
  LocalJets l;
  l.a = inst.alpha.at(x);
  l.b_lower = inst.beta.at(x);
  l.b_upper = solve(l.a, l.b_lower);
  Jet b2(0.0);
  for (int i = 0; i < inst.dim; ++i) b2 += l.b_lower[i] * l.b_upper[i];
  l.b2 = b2;
  return l;
}

Jet eval_F_jet(const MetricInstance& inst, std::span<const Jet> x, std::span<const Jet> y) {
  const LocalJets l = local_jets(inst, x);
  const Jet alpha2 = quadratic_form(l.a, y);
  if (!(alpha2.value() > 0.0)) throw DomainError("alpha(x, y) must be positive");
  const Jet alpha = sqrt(alpha2);
  Jet beta(0.0);
  for (int i = 0; i < inst.dim; ++i) beta += l.b_lower[i] * y[i];
  return alpha * inst.phi(l.b2, beta / alpha);
}

double compute_b2(const MetricInstance& inst, const Point& x) {
  const Eigen::MatrixXd a = inst.alpha.matrix(x);
  const Eigen::VectorXd b = inst.beta.vector(x);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
  if (!lu.isInvertible()) throw SingularMatrixError("compute_b2: a(x) is singular");
  return b.dot(lu.solve(b));
}

double compute_s(const MetricInstance& inst, const Point& x, const Direction& y) {
  const Eigen::MatrixXd a = inst.alpha.matrix(x);
  const Eigen::VectorXd b = inst.beta.vector(x);
  Eigen::Map<const Eigen::VectorXd> yv(y.values().data(), y.dim());
  const double alpha2 = yv.dot(a * yv);
  if (!(alpha2 > 0.0)) throw DomainError("compute_s: alpha(x, y) must be positive");
  return b.dot(yv) / std::sqrt(alpha2);
}

double eval_F(const MetricInstance& inst, const Point& x, const Direction& y) {
  return eval_F_jet(inst, x.as_jets(), y.as_jets()).value();
}

void FundamentalTensor::require_positive_definite() const {
  if (positive_definite()) return;
  std::ostringstream os;
  os << "fundamental tensor is not positive definite (smallest eigenvalue " << min_eigenvalue << ")";
  throw RegularityError(os.str());
}

FundamentalTensor fundamental_tensor(const MetricInstance& inst, const Point& x, const Direction& y) {
  const int n = inst.dim;
  auto space = JetSpace::uniform(n, 2);
  JetVector yj;
  for (int i = 0; i < n; ++i) yj.push_back(Jet::variable(space, i, y[i]));
  const Jet F = eval_F_jet(inst, x.as_jets(), yj);
  const Jet F2 = F * F;
  FundamentalTensor out;
  out.g.resize(n, n);
  std::vector<int> o(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      o.assign(n, 0);
      ++o[i];
      ++o[j];
      out.g(i, j) = 0.5 * F2.derivative(o);
    }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(out.g, Eigen::EigenvaluesOnly);
  out.min_eigenvalue = es.eigenvalues().minCoeff();
  return out;
}

PhiFunction navigation_randers_phi() {
  return PhiFunction(
      "navigation-randers", nlohmann::json::object(),
      [](const Jet& b2, const Jet& s) {
        const Jet one_minus = 1.0 - b2;
        return (sqrt(one_minus + s * s) + s) / one_minus;
      },
      1.0);
}

MetricInstance navigation_randers(MetricField abar, OneFormField bbar) {
  return MetricInstance("navigation-randers", std::move(abar), std::move(bbar), navigation_randers_phi());
}

}  // namespace finsler
