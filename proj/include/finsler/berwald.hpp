#pragma once

// Berwald curvature B_j^i_kl = d^3 G^i / dy^j dy^k dy^l, by jets of the spray
// and by the closed form for closed conformal beta, plus the isotropic fit
// B = tau (F_jk delta^i_l + F_jl delta^i_k + F_lk delta^i_j + F_jkl y^i).

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "finsler/geometry.hpp"
#include "finsler/spray.hpp"

namespace finsler {

enum class BerwaldSource { Oracle, ClosedForm, Pattern };

class BerwaldTensor {
 public:
  BerwaldTensor() = default;
  BerwaldTensor(int n, BerwaldSource source) : n_(n), source_(source), data_(static_cast<std::size_t>(n) * n * n * n, 0.0) {}

  int dim() const { return n_; }
  BerwaldSource source() const { return source_; }

  /// B_j^i_kl
  double& operator()(int j, int i, int k, int l) { return data_[idx(j, i, k, l)]; }
  double operator()(int j, int i, int k, int l) const { return data_[idx(j, i, k, l)]; }
  std::span<const double> data() const { return data_; }

  double max_abs() const;
  /// Largest deviation from total symmetry in (j, k, l).
  double symmetry_defect() const;
  /// max |B_j^i_kl y^j|
  double y_contraction(std::span<const double> y) const;

 private:
  std::size_t idx(int j, int i, int k, int l) const {
    return ((static_cast<std::size_t>(j) * n_ + i) * n_ + k) * n_ + l;
  }
  int n_ = 0;
  BerwaldSource source_ = BerwaldSource::Oracle;
  std::vector<double> data_;
};

double max_abs_diff(const BerwaldTensor& a, const BerwaldTensor& b);

enum class SprayPath { Definitional, General };

BerwaldTensor berwald_oracle(const MetricInstance& inst, const Point& x, const Direction& y,
                             SprayPath path = SprayPath::Definitional);

/// Throws PreconditionError unless beta is closed and conformal at x with factor c.
BerwaldTensor berwald_closed_form(const MetricInstance& inst, double c, const Point& x, const Direction& y);

/// The closed form on raw frame data: a_ij, b_i, y^i and the E/H scalars at s.
BerwaldTensor berwald_closed_form(const EHScalars& eh, double c, const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                                  std::span<const double> y);

struct FJets {
  int n = 0;
  Eigen::MatrixXd Fyy;       // F_{y^j y^k}
  std::vector<double> Fyyy;  // F_{y^j y^k y^l}, row-major (j, k, l)

  double third(int j, int k, int l) const { return Fyyy[(static_cast<std::size_t>(j) * n + k) * n + l]; }
};

FJets f_jets_closed(const MetricInstance& inst, const Point& x, const Direction& y);
FJets f_jets_ad(const MetricInstance& inst, const Point& x, const Direction& y);

/// F_jk delta^i_l + F_jl delta^i_k + F_lk delta^i_j + F_jkl y^i
BerwaldTensor isotropic_pattern(const FJets& f, std::span<const double> y);

struct IsotropicFit {
  double tau = 0.0;
  double residual_max = 0.0;
  double b_max = 0.0;  // max |B| over the samples
  bool is_isotropic = false;
  bool is_berwald = false;
  int samples = 0;
};

inline constexpr double kIsotropicTolerance = 1e-7;

/// B from the definitional oracle, pattern from the closed F jets.
IsotropicFit isotropic_fit(const MetricInstance& inst, const Point& x, std::span<const Direction> ys,
                           double tol = kIsotropicTolerance);

}  // namespace finsler
