#include "finsler/linalg.hpp"

#include <cmath>
#include <utility>

#include "finsler/errors.hpp"

namespace finsler {

JetVector solve(JetMatrix a, JetVector rhs) {
  const int n = a.dim();
  double scale = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) scale = std::max(scale, std::abs(a(i, j).value()));
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(a(r, col).value()) > std::abs(a(piv, col).value())) piv = r;
    if (!(std::abs(a(piv, col).value()) > 1e-14 * scale))
      throw SingularMatrixError("singular matrix in linear solve (pivot " + std::to_string(a(piv, col).value()) + ")");
    if (piv != col) {
      for (int j = 0; j < n; ++j) std::swap(a(col, j), a(piv, j));
      std::swap(rhs[col], rhs[piv]);
    }
    const Jet inv = reciprocal(a(col, col));
    for (int r = col + 1; r < n; ++r) {
      const Jet f = a(r, col) * inv;
      for (int j = col + 1; j < n; ++j) a(r, j) -= f * a(col, j);
      rhs[r] -= f * rhs[col];
    }
  }
  JetVector z(n);
  for (int i = n - 1; i >= 0; --i) {
    Jet acc = rhs[i];
    for (int j = i + 1; j < n; ++j) acc -= a(i, j) * z[j];
    z[i] = acc / a(i, i);
  }
  return z;
}

Jet quadratic_form(const JetMatrix& a, std::span<const Jet> y) {
  const int n = a.dim();
  Jet acc(0.0);
  for (int i = 0; i < n; ++i) {
    Jet row(0.0);
    for (int j = 0; j < n; ++j) row += a(i, j) * y[j];
    acc += row * y[i];
  }
  return acc;
}

Eigen::MatrixXd values_of(const JetMatrix& a) {
  Eigen::MatrixXd m(a.dim(), a.dim());
  for (int i = 0; i < a.dim(); ++i)
    for (int j = 0; j < a.dim(); ++j) m(i, j) = a(i, j).value();
  return m;
}

Eigen::VectorXd values_of(std::span<const Jet> v) {
  Eigen::VectorXd r(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) r(static_cast<Eigen::Index>(i)) = v[i].value();
  return r;
}

}  // namespace finsler
