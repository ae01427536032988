#pragma once

// Data model of a general (alpha, beta)-metric F = alpha * phi(b^2, beta/alpha)
// and the pointwise quantities built from it.

#include <Eigen/Dense>
#include <functional>
#include <limits>
#include <nlohmann/json.hpp>
#include <span>
#include <string>
#include <vector>

#include "finsler/jet.hpp"
#include "finsler/linalg.hpp"

namespace finsler {

/// A base point x in chart coordinates.
class Point {
 public:
  explicit Point(std::vector<double> coords);
  Point(std::initializer_list<double> coords) : Point(std::vector<double>(coords)) {}

  int dim() const { return static_cast<int>(x_.size()); }
  double operator[](int i) const { return x_[i]; }
  std::span<const double> values() const { return x_; }
  JetVector as_jets() const { return {x_.begin(), x_.end()}; }

 private:
  std::vector<double> x_;
};

/// A nonzero tangent vector y at some base point.
class Direction {
 public:
  explicit Direction(std::vector<double> comps);
  Direction(std::initializer_list<double> comps) : Direction(std::vector<double>(comps)) {}

  int dim() const { return static_cast<int>(y_.size()); }
  double operator[](int i) const { return y_[i]; }
  std::span<const double> values() const { return y_; }
  Direction scaled(double lambda) const;
  JetVector as_jets() const { return {y_.begin(), y_.end()}; }

 private:
  std::vector<double> y_;
};

/// Riemannian metric field a_ij(x), evaluated on jets so that coordinate
/// derivatives are exact.
class MetricField {
 public:
  using Eval = std::function<JetMatrix(std::span<const Jet> x)>;

  MetricField(std::string family, nlohmann::json params, int dim, Eval eval);

  const std::string& family() const { return family_; }
  const nlohmann::json& params() const { return params_; }
  int dim() const { return dim_; }

  JetMatrix at(std::span<const Jet> x) const { return eval_(x); }
  Eigen::MatrixXd matrix(const Point& x) const;
  /// da[k](i, j) = d a_ij / d x^k
  std::vector<Eigen::MatrixXd> derivative(const Point& x) const;

 private:
  std::string family_;
  nlohmann::json params_;
  int dim_;
  Eval eval_;
};

/// One-form field b_i(x).
class OneFormField {
 public:
  using Eval = std::function<JetVector(std::span<const Jet> x)>;

  OneFormField(std::string family, nlohmann::json params, int dim, Eval eval);

  const std::string& family() const { return family_; }
  const nlohmann::json& params() const { return params_; }
  int dim() const { return dim_; }

  JetVector at(std::span<const Jet> x) const { return eval_(x); }
  Eigen::VectorXd vector(const Point& x) const;
  /// db(i, j) = d b_i / d x^j
  Eigen::MatrixXd derivative(const Point& x) const;

 private:
  std::string family_;
  nlohmann::json params_;
  int dim_;
  Eval eval_;
};

/// phi(b^2, s) with its domain { |s| <= b < b0 }.  Singular families (phi
/// proportional to s) are only defined for s > 0.
class PhiFunction {
 public:
  using Eval = std::function<Jet(const Jet& b2, const Jet& s)>;

  PhiFunction(std::string family, nlohmann::json params, Eval eval,
              double b0 = std::numeric_limits<double>::infinity(), bool singular = false);

  const std::string& family() const { return family_; }
  const nlohmann::json& params() const { return params_; }
  double b0() const { return b0_; }
  bool singular() const { return singular_; }

  /// Throws DomainError when (b2, s) lies outside the domain.
  void check_domain(double b2, double s) const;
  bool in_domain(double b2, double s) const;

  Jet operator()(const Jet& b2, const Jet& s) const;
  double operator()(double b2, double s) const;
  /// Evaluation without the domain check.
  Jet raw(const Jet& b2, const Jet& s) const { return eval_(b2, s); }
  /// Same function with a different b0.
  PhiFunction with_b0(double b0) const { return PhiFunction(family_, params_, eval_, b0, singular_); }

 private:
  std::string family_;
  nlohmann::json params_;
  Eval eval_;
  double b0_;
  bool singular_;
};

/// All partials d^(i+j) phi / d(b^2)^i ds^j with i + j <= order at one point.
class PhiJet {
 public:
  static constexpr int kDefaultOrder = 5;

  PhiJet(const PhiFunction& phi, double b2, double s, int order = kDefaultOrder);

  double b2() const { return b2_; }
  double s() const { return s_; }
  int order() const { return order_; }

  double partial(int i, int j) const;
  double value() const { return partial(0, 0); }
  double d1() const { return partial(1, 0); }
  double d2() const { return partial(0, 1); }
  double d12() const { return partial(1, 1); }
  double d22() const { return partial(0, 2); }
  double d222() const { return partial(0, 3); }

  /// The function s' -> d^i_{b2} d^j_s phi(b2, s') composed with the jet
  /// `s_jet` (whose value must equal s()).
  Jet along_s(int i, int j, const Jet& s_jet) const;

 private:
  double b2_, s_;
  int order_;
  Jet jet_;
};

struct MetricInstance {
  MetricInstance(std::string name, MetricField alpha, OneFormField beta, PhiFunction phi);

  std::string name;
  int dim;
  MetricField alpha;
  OneFormField beta;
  PhiFunction phi;
};

/// Jet-level pieces at one base point.
struct LocalJets {
  JetMatrix a;
  JetVector b_lower;
  JetVector b_upper;  // a^{ij} b_j
  Jet b2;
};

LocalJets local_jets(const MetricInstance& inst, std::span<const Jet> x);
Jet eval_F_jet(const MetricInstance& inst, std::span<const Jet> x, std::span<const Jet> y);

double compute_b2(const MetricInstance& inst, const Point& x);
double compute_s(const MetricInstance& inst, const Point& x, const Direction& y);
double eval_F(const MetricInstance& inst, const Point& x, const Direction& y);

struct FundamentalTensor {
  Eigen::MatrixXd g;
  double min_eigenvalue = 0.0;

  bool positive_definite() const { return min_eigenvalue > 0.0; }
  /// Throws RegularityError naming the offending eigenvalue.
  void require_positive_definite() const;
};

/// g_ij = 1/2 [F^2]_{y^i y^j}
FundamentalTensor fundamental_tensor(const MetricInstance& inst, const Point& x, const Direction& y);

/// phi(b^2, s) = (sqrt((1 - b^2) + s^2) + s) / (1 - b^2), i.e. the Randers metric
/// with navigation data (abar, bbar) written as a general (alpha, beta)-metric.
PhiFunction navigation_randers_phi();
MetricInstance navigation_randers(MetricField abar, OneFormField bbar);

}  // namespace finsler
