#pragma once

// Truncated multivariate Taylor arithmetic ("jets").
//
// A Jet stores the Taylor coefficients of a scalar function around a base
// point, for every monomial of a JetSpace.  A space is built from groups of
// variables, each with its own degree cap, plus an optional cap on the total
// degree.  For example the spray oracle uses {n y-variables up to degree 5,
// n x-variables up to degree 1}; the phi jets use {b^2, s} with total
// degree 5.
//
// Arithmetic is exact on every coefficient that is kept: the product of two
// truncated series agrees with the product of the full series on all
// monomials of the space.  After differentiating a jet, the coefficients at
// the top of the space become zero instead of their true value; callers only
// read the orders that are still valid.
//
// A Jet without a space is a plain scalar and mixes freely with jets of any
// space, so callables written against Jet also work on doubles.

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

namespace finsler {

struct VarGroup {
  int count = 0;
  int max_degree = 0;
};

class JetSpace {
 public:
  /// Returns a cached space; identical requests share one instance.
  /// `max_total < 0` means "no cap beyond the group caps".
  static std::shared_ptr<const JetSpace> get(std::vector<VarGroup> groups, int max_total = -1);

  /// Convenience: `nvars` variables, total degree <= order.
  static std::shared_ptr<const JetSpace> uniform(int nvars, int order);

  int num_vars() const { return nvars_; }
  int size() const { return size_; }
  int max_total_degree() const { return max_total_; }
  const std::vector<VarGroup>& groups() const { return groups_; }

  std::span<const int> exponents(int idx) const {
    return {exps_.data() + static_cast<std::size_t>(idx) * nvars_, static_cast<std::size_t>(nvars_)};
  }
  int total_degree(int idx) const { return degree_[idx]; }

  /// Index of a monomial, or -1 when it is outside the space.
  int index_of(std::span<const int> exps) const;

  struct Triple {
    int a, b, out;
  };
  const std::vector<Triple>& products() const { return products_; }

  struct DerivEntry {
    int src, dst;
    double factor;
  };
  const std::vector<DerivEntry>& derivative_table(int var) const { return deriv_[var]; }

  JetSpace(std::vector<VarGroup> groups, int max_total);

 private:
  std::uint64_t key(std::span<const int> exps) const;

  std::vector<VarGroup> groups_;
  std::vector<int> cap_;  // per variable
  int nvars_ = 0;
  int max_total_ = 0;
  int size_ = 0;
  std::vector<int> exps_;
  std::vector<int> degree_;
  std::vector<std::pair<std::uint64_t, int>> lookup_;  // sorted by key
  std::vector<Triple> products_;
  std::vector<std::vector<DerivEntry>> deriv_;
};

using JetSpacePtr = std::shared_ptr<const JetSpace>;

class Jet {
 public:
  Jet() : c_(1, 0.0) {}
  Jet(double v) : c_(1, v) {}  // NOLINT(google-explicit-constructor)

  static Jet constant(JetSpacePtr space, double v);
  /// The coordinate function `var` of `space`, expanded around `value`.
  static Jet variable(JetSpacePtr space, int var, double value);
  static Jet from_coefficients(JetSpacePtr space, std::vector<double> coeffs);

  bool is_scalar() const { return !space_; }
  const JetSpacePtr& space() const { return space_; }
  double value() const { return c_[0]; }
  std::span<const double> coefficients() const { return c_; }
  double coeff(int idx) const { return c_[idx]; }

  /// Partial derivative of the represented function at the base point.
  /// `orders[v]` is the derivative order in variable v.
  double derivative(std::span<const int> orders) const;
  double derivative(std::initializer_list<int> orders) const {
    return derivative(std::span<const int>(orders.begin(), orders.size()));
  }

  Jet& operator+=(const Jet& o);
  Jet& operator-=(const Jet& o);
  Jet& operator*=(const Jet& o);
  Jet& operator/=(const Jet& o);
  Jet& operator+=(double v) {
    c_[0] += v;
    return *this;
  }
  Jet& operator-=(double v) {
    c_[0] -= v;
    return *this;
  }
  Jet& operator*=(double v);
  Jet& operator/=(double v) { return *this *= 1.0 / v; }

  Jet operator-() const;

 private:
  friend Jet operator*(const Jet& a, const Jet& b);
  friend Jet compose(const Jet& a, std::span<const double> taylor);
  friend Jet differentiate(const Jet& f, int var);
  friend Jet project(const Jet& f, const JetSpacePtr& target, std::span<const int> var_map);

  JetSpacePtr space_;
  std::vector<double> c_;
};

Jet operator+(Jet a, const Jet& b);
Jet operator-(Jet a, const Jet& b);
Jet operator*(const Jet& a, const Jet& b);
Jet operator/(const Jet& a, const Jet& b);
inline Jet operator+(Jet a, double b) { return a += b; }
inline Jet operator+(double a, Jet b) { return b += a; }
inline Jet operator-(Jet a, double b) { return a -= b; }
inline Jet operator-(double a, const Jet& b) { return -b + a; }
inline Jet operator*(Jet a, double b) { return a *= b; }
inline Jet operator*(double a, Jet b) { return b *= a; }
inline Jet operator/(Jet a, double b) { return a /= b; }
Jet operator/(double a, const Jet& b);

/// f(a) for a univariate f given by its Taylor coefficients
/// taylor[k] = f^(k)(a0) / k! at a0 = a.value().
Jet compose(const Jet& a, std::span<const double> taylor);

Jet sqrt(const Jet& a);
Jet exp(const Jet& a);
Jet log(const Jet& a);
Jet pow(const Jet& a, double p);
Jet sin(const Jet& a);
Jet cos(const Jet& a);
Jet reciprocal(const Jet& a);
Jet square(const Jet& a);

/// d/dvar within the same space (top-degree coefficients become zero).
Jet differentiate(const Jet& f, int var);

/// Re-express f in `target`.  var_map[v] gives the target variable for source
/// variable v, or -1 to evaluate that variable at its base point.
Jet project(const Jet& f, const JetSpacePtr& target, std::span<const int> var_map);

inline double value_of(double v) { return v; }
inline double value_of(const Jet& j) { return j.value(); }

}  // namespace finsler
