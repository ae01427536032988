#pragma once

// Small dense helpers shared by the double and Jet code paths (n <= 4).

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "finsler/jet.hpp"

namespace finsler {

template <class T>
class SquareMatrix {
 public:
  SquareMatrix() = default;
  explicit SquareMatrix(int n, const T& fill = T(0.0)) : n_(n), data_(static_cast<std::size_t>(n) * n, fill) {}

  int dim() const { return n_; }
  T& operator()(int i, int j) { return data_[static_cast<std::size_t>(i) * n_ + j]; }
  const T& operator()(int i, int j) const { return data_[static_cast<std::size_t>(i) * n_ + j]; }

 private:
  int n_ = 0;
  std::vector<T> data_;
};

using JetMatrix = SquareMatrix<Jet>;
using JetVector = std::vector<Jet>;

/// Solves A z = rhs by Gaussian elimination with partial pivoting on the
/// constant terms.  Throws SingularMatrixError when a pivot vanishes.
JetVector solve(JetMatrix a, JetVector rhs);

/// y^T A y
Jet quadratic_form(const JetMatrix& a, std::span<const Jet> y);

Eigen::MatrixXd values_of(const JetMatrix& a);
Eigen::VectorXd values_of(std::span<const Jet> v);

}  // namespace finsler
