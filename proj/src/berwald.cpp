#include "finsler/berwald.hpp"

#include <cmath>
#include <sstream>

#include "finsler/beta_calculus.hpp"
#include "finsler/errors.hpp"

namespace finsler {

double BerwaldTensor::max_abs() const {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::abs(v));
  return m;
}

double BerwaldTensor::symmetry_defect() const {
  double m = 0.0;
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j)
      for (int k = 0; k < n_; ++k)
        for (int l = 0; l < n_; ++l) {
          const double v = (*this)(j, i, k, l);
          m = std::max({m, std::abs(v - (*this)(k, i, j, l)), std::abs(v - (*this)(l, i, k, j)),
                        std::abs(v - (*this)(j, i, l, k))});
        }
  return m;
}

double BerwaldTensor::y_contraction(std::span<const double> y) const {
  double m = 0.0;
  for (int i = 0; i < n_; ++i)
    for (int k = 0; k < n_; ++k)
      for (int l = 0; l < n_; ++l) {
        double acc = 0.0;
        for (int j = 0; j < n_; ++j) acc += (*this)(j, i, k, l) * y[j];
        m = std::max(m, std::abs(acc));
      }
  return m;
}

double max_abs_diff(const BerwaldTensor& a, const BerwaldTensor& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("max_abs_diff: dimension mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i) m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  return m;
}

namespace {

std::vector<int> unit_orders(int n, int j, int k, int l) {
  std::vector<int> o(n, 0);
  ++o[j];
  ++o[k];
  ++o[l];
  return o;
}

// T(j,k,l) + T(k,l,j) + T(l,j,k)
template <class Term>
double cyclic(const Term& t, int j, int k, int l) {
  return t(j, k, l) + t(k, l, j) + t(l, j, k);
}

struct Frame {
  int n;
  Eigen::MatrixXd a;
  Eigen::VectorXd b, b_up, y, y_low;
  double alpha, s, b2;
};

Frame make_frame(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, std::span<const double> y) {
  Frame f;
  f.n = static_cast<int>(a.rows());
  f.a = a;
  f.b = b;
  f.y = Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size()));
  f.y_low = a * f.y;
  const double alpha2 = f.y.dot(f.y_low);
  if (!(alpha2 > 0.0)) throw DomainError("alpha(x, y) must be positive");
  f.alpha = std::sqrt(alpha2);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
  if (!lu.isInvertible()) throw SingularMatrixError("a(x) is singular");
  f.b_up = lu.solve(b);
  f.b2 = b.dot(f.b_up);
  f.s = b.dot(f.y) / f.alpha;
  return f;
}

}  // namespace

BerwaldTensor berwald_oracle(const MetricInstance& inst, const Point& x, const Direction& y, SprayPath path) {
  const int n = inst.dim;
  JetVector G;
  if (path == SprayPath::Definitional) {
    G = spray_definitional_jet(inst, x, y, 3);
  } else {
    auto space = JetSpace::uniform(n, 3);
    JetVector yj;
    for (int i = 0; i < n; ++i) yj.push_back(Jet::variable(space, i, y[i]));
    G = spray_general_jet(inst, x, yj);
  }
  BerwaldTensor B(n, BerwaldSource::Oracle);
  for (int j = 0; j < n; ++j)
    for (int k = j; k < n; ++k)
      for (int l = k; l < n; ++l) {
        const auto o = unit_orders(n, j, k, l);
        for (int i = 0; i < n; ++i) {
          const double v = G[i].derivative(o);
          B(j, i, k, l) = v;
          B(j, i, l, k) = v;
          B(k, i, j, l) = v;
          B(k, i, l, j) = v;
          B(l, i, j, k) = v;
          B(l, i, k, j) = v;
        }
      }
  return B;
}

BerwaldTensor berwald_closed_form(const EHScalars& eh, double c, const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                                  std::span<const double> y) {
  const Frame f = make_frame(a, b, y);
  const int n = f.n;
  const double al = f.alpha, s = f.s;
  const auto& yl = f.y_low;
  const auto& bl = f.b;
  const double E = eh.E, E2 = eh.E2, E22 = eh.E22, E222 = eh.E222;
  const double H2 = eh.H2, H22 = eh.H22, H222 = eh.H222;

  const double e_a = E - s * E2;
  const double e_yy = (s / al) * (3.0 * E22 + s * E222);
  const double e_by = E22 + s * E222;
  const double e_c = E - s * E2 - s * s * E22;
  const double e3 = 3.0 * E - 3.0 * s * E2 - 6.0 * s * s * E22 - s * s * s * E222;
  const double h_a = H2 - s * H22;
  const double h_c = H2 - s * H22 - s * s * H222;
  const double h3 = 3.0 * H2 - 3.0 * s * H22 - s * s * H222;

  BerwaldTensor B(n, BerwaldSource::ClosedForm);
  for (int i = 0; i < n; ++i) {
    const double yi = f.y(i), bi = f.b_up(i);
    auto delta = [i](int m) { return m == i ? 1.0 : 0.0; };
    auto t1 = [&](int j, int k, int l) {
      return (c / al) * ((e_a * a(k, l) + E22 * bl(l) * bl(k)) * delta(j) +
                         (1.0 / (al * al)) * (e_yy * yl(l) * yl(j) - e_by * bl(l) * yl(j)) * bl(k) * yi);
    };
    auto t2 = [&](int j, int k, int l) {
      return (c / (al * al)) *
             (s * E22 * ((yl(k) * bl(l) + yl(l) * bl(k)) * delta(j) + a(j, l) * bl(k) * yi) +
              (1.0 / al) * e_c * (yl(l) * delta(j) + a(l, j) * yi) * yl(k));
    };
    auto t4 = [&](int j, int k, int l) {
      return (c / al) *
             (h_a * (bl(j) - (s / al) * yl(j)) * a(k, l) - (1.0 / (al * al)) * h_c * bl(l) * yl(j) * yl(k) -
              (s * H222 / al) * bl(k) * bl(l) * yl(j)) *
             bi;
    };
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          const double b3 = (c / (al * al)) *
                            ((1.0 / (al * al * al)) * e3 * yl(k) * yl(j) * yl(l) + E222 * bl(l) * bl(k) * bl(j)) * yi;
          const double b5 = (c / al) *
                            ((s / (al * al * al)) * h3 * yl(j) * yl(k) * yl(l) + H222 * bl(l) * bl(k) * bl(j)) * bi;
          B(j, i, k, l) = cyclic(t1, j, k, l) - cyclic(t2, j, k, l) + b3 + cyclic(t4, j, k, l) + b5;
        }
  }
  return B;
}

BerwaldTensor berwald_closed_form(const MetricInstance& inst, double c, const Point& x, const Direction& y) {
  const ConformalFit fit = conformal_fit(inst, x);
  if (!fit.is_conformal_closed) {
    std::ostringstream os;
    os << "closed-form Berwald tensor requires b_{i|j} = c a_ij; residual " << fit.residual;
    throw PreconditionError(os.str());
  }
  if (std::abs(fit.c - c) > 1e-8 * std::max(1.0, std::abs(fit.c))) {
    std::ostringstream os;
    os << "conformal factor mismatch: supplied c = " << c << ", fitted c = " << fit.c;
    throw PreconditionError(os.str());
  }
  const Eigen::MatrixXd a = inst.alpha.matrix(x);
  const Eigen::VectorXd b = inst.beta.vector(x);
  if (c == 0.0) return BerwaldTensor(inst.dim, BerwaldSource::ClosedForm);
  const Frame f = make_frame(a, b, y.values());
  inst.phi.check_domain(f.b2, f.s);
  return berwald_closed_form(eh_scalars(inst.phi, f.b2, f.s), c, a, b, y.values());
}

FJets f_jets_closed(const MetricInstance& inst, const Point& x, const Direction& y) {
  const Frame f = make_frame(inst.alpha.matrix(x), inst.beta.vector(x), y.values());
  inst.phi.check_domain(f.b2, f.s);
  const PhiJet pj(inst.phi, f.b2, f.s, 3);
  const double p = pj.value(), p2 = pj.d2(), p22 = pj.d22(), p222 = pj.d222();
  const double al = f.alpha, s = f.s;
  const int n = f.n;
  const auto& a = f.a;
  const auto& yl = f.y_low;
  const auto& bl = f.b;

  FJets out;
  out.n = n;
  out.Fyy.resize(n, n);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k)
      out.Fyy(j, k) = (1.0 / al) * (p - s * p2) * a(j, k) - (s * p22 / (al * al)) * (bl(k) * yl(j) + bl(j) * yl(k)) +
                      (p22 / al) * bl(j) * bl(k) -
                      (1.0 / (al * al * al)) * (p - s * p2 - s * s * p22) * yl(j) * yl(k);

  const double c_a = s * p2 + s * s * p22 - p;
  const double c_byy = (s / (al * al)) * (3.0 * p22 + s * p222);
  const double c_bby = p22 + s * p222;
  const double c3 = 3.0 * p - 3.0 * s * p2 - 6.0 * s * s * p22 - s * s * s * p222;
  auto term = [&](int j, int k, int l) {
    return (1.0 / (al * al)) * ((1.0 / al) * c_a * a(k, l) * yl(j) + c_byy * bl(k) * yl(l) * yl(j) -
                                s * p22 * a(j, l) * bl(k) - (1.0 / al) * c_bby * bl(l) * bl(j) * yl(k));
  };
  const double al5 = al * al * al * al * al;
  out.Fyyy.resize(static_cast<std::size_t>(n) * n * n);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k)
      for (int l = 0; l < n; ++l)
        out.Fyyy[(static_cast<std::size_t>(j) * n + k) * n + l] =
            cyclic(term, j, k, l) + (c3 / al5) * yl(j) * yl(k) * yl(l) + (p222 / (al * al)) * bl(j) * bl(k) * bl(l);
  return out;
}

FJets f_jets_ad(const MetricInstance& inst, const Point& x, const Direction& y) {
  const int n = inst.dim;
  auto space = JetSpace::uniform(n, 3);
  JetVector yj;
  for (int i = 0; i < n; ++i) yj.push_back(Jet::variable(space, i, y[i]));
  const Jet F = eval_F_jet(inst, x.as_jets(), yj);
  FJets out;
  out.n = n;
  out.Fyy.resize(n, n);
  out.Fyyy.resize(static_cast<std::size_t>(n) * n * n);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) {
      std::vector<int> o(n, 0);
      ++o[j];
      ++o[k];
      out.Fyy(j, k) = F.derivative(o);
      for (int l = 0; l < n; ++l)
        out.Fyyy[(static_cast<std::size_t>(j) * n + k) * n + l] = F.derivative(unit_orders(n, j, k, l));
    }
  return out;
}

BerwaldTensor isotropic_pattern(const FJets& f, std::span<const double> y) {
  const int n = f.n;
  BerwaldTensor P(n, BerwaldSource::Pattern);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l)
          P(j, i, k, l) = f.Fyy(j, k) * (i == l) + f.Fyy(j, l) * (i == k) + f.Fyy(l, k) * (i == j) +
                          f.third(j, k, l) * y[i];
  return P;
}

IsotropicFit isotropic_fit(const MetricInstance& inst, const Point& x, std::span<const Direction> ys, double tol) {
  if (ys.empty()) throw std::invalid_argument("isotropic_fit: need at least one direction");
  std::vector<BerwaldTensor> Bs, Ps;
  double bp = 0.0, pp = 0.0;
  IsotropicFit fit;
  for (const auto& y : ys) {
    Bs.push_back(berwald_oracle(inst, x, y));
    Ps.push_back(isotropic_pattern(f_jets_closed(inst, x, y), y.values()));
    const auto bd = Bs.back().data();
    const auto pd = Ps.back().data();
    for (std::size_t m = 0; m < bd.size(); ++m) {
      bp += bd[m] * pd[m];
      pp += pd[m] * pd[m];
    }
    fit.b_max = std::max(fit.b_max, Bs.back().max_abs());
  }
  fit.samples = static_cast<int>(ys.size());
  fit.is_berwald = fit.b_max < tol;
  fit.tau = (fit.is_berwald || pp == 0.0) ? 0.0 : bp / pp;
  for (std::size_t q = 0; q < Bs.size(); ++q) {
    const auto bd = Bs[q].data();
    const auto pd = Ps[q].data();
    for (std::size_t m = 0; m < bd.size(); ++m)
      fit.residual_max = std::max(fit.residual_max, std::abs(bd[m] - fit.tau * pd[m]));
  }
  fit.is_isotropic = fit.residual_max < tol;
  return fit;
}

}  // namespace finsler
