#include "finsler/spray.hpp"

#include <cmath>
#include <sstream>

#include "finsler/beta_calculus.hpp"
#include "finsler/errors.hpp"

namespace finsler {

namespace {

template <class T>
struct ScalarsT {
  T Q, R, Theta, Psi, Pi, Omega;
};

void check_denominator(double d, double scale, const char* what, double b2, double s) {
  if (std::abs(d) > 1e-12 * std::max(1.0, scale)) return;
  std::ostringstream os;
  os << "regularity violation: " << what << " = " << d << " at (b^2, s) = (" << b2 << ", " << s << ")";
  throw RegularityError(os.str());
}

template <class T>
ScalarsT<T> scalars_from(const T& phi, const T& p1, const T& p2, const T& p12, const T& p22, double b2, const T& s) {
  const T d1 = phi - s * p2;
  const T d2 = d1 + (b2 - s * s) * p22;
  const double scale = std::abs(value_of(phi));
  check_denominator(value_of(d1), scale, "phi - s phi_2", b2, value_of(s));
  check_denominator(value_of(d2), scale, "phi - s phi_2 + (b^2 - s^2) phi_22", b2, value_of(s));
  ScalarsT<T> r;
  r.Q = p2 / d1;
  r.R = p1 / d1;
  r.Theta = (d1 * p2 - s * phi * p22) / (2.0 * phi * d2);
  r.Psi = p22 / (2.0 * d2);
  r.Pi = (d1 * p12 - s * p1 * p22) / (d1 * d2);
  r.Omega = 2.0 * p1 / phi - (s * phi + (b2 - s * s) * p2) / phi * r.Pi;
  return r;
}

template <class T>
std::pair<T, T> eh_from(const T& phi, const T& p1, const T& p2, const T& p12, const T& p22, double b2, const T& s) {
  const T d2 = phi - s * p2 + (b2 - s * s) * p22;
  check_denominator(value_of(d2), std::abs(value_of(phi)), "phi - s phi_2 + (b^2 - s^2) phi_22", b2, value_of(s));
  const T H = (p22 - 2.0 * (p1 - s * p12)) / (2.0 * d2);
  const T E = (p2 + 2.0 * s * p1) / (2.0 * phi) - H * (s * phi + (b2 - s * s) * p2) / phi;
  return {E, H};
}

int jet_order(std::span<const Jet> y) {
  for (const auto& v : y)
    if (!v.is_scalar()) return v.space()->max_total_degree();
  return 0;
}

struct YFrame {
  Jet alpha, beta, s;
};

YFrame y_frame(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, std::span<const Jet> y) {
  const int n = static_cast<int>(y.size());
  Jet alpha2(0.0), beta(0.0);
  for (int i = 0; i < n; ++i) {
    Jet row(0.0);
    for (int j = 0; j < n; ++j) row += a(i, j) * y[j];
    alpha2 += row * y[i];
    beta += b(i) * y[i];
  }
  if (!(alpha2.value() > 0.0)) throw DomainError("alpha(x, y) must be positive");
  YFrame f;
  f.alpha = sqrt(alpha2);
  f.beta = beta;
  f.s = beta / f.alpha;
  return f;
}

Eigen::VectorXd values(const JetVector& v) { return values_of(v); }

}  // namespace

SprayScalars spray_scalars(const PhiJet& jet) {
  const auto r = scalars_from<double>(jet.value(), jet.d1(), jet.d2(), jet.d12(), jet.d22(), jet.b2(), jet.s());
  return {r.Q, r.R, r.Theta, r.Psi, r.Pi, r.Omega};
}

SprayScalars spray_scalars(const PhiJet& jet, double b2, double s) {
  if (std::abs(jet.b2() - b2) > 1e-15 * std::max(1.0, std::abs(b2)) || std::abs(jet.s() - s) > 1e-15)
    throw std::invalid_argument("spray_scalars: jet evaluated at a different (b^2, s)");
  return spray_scalars(jet);
}

EHJets eh_jets(const PhiFunction& phi, double b2, const Jet& s_jet) {
  const PhiJet pj(phi, b2, s_jet.value());
  EHJets r;
  r.phi = pj.along_s(0, 0, s_jet);
  r.phi1 = pj.along_s(1, 0, s_jet);
  r.phi2 = pj.along_s(0, 1, s_jet);
  r.phi12 = pj.along_s(1, 1, s_jet);
  r.phi22 = pj.along_s(0, 2, s_jet);
  std::tie(r.E, r.H) = eh_from<Jet>(r.phi, r.phi1, r.phi2, r.phi12, r.phi22, b2, s_jet);
  return r;
}

EHSeries eh_series(const PhiFunction& phi, double b2, double s, int order) {
  if (order < 0 || order > 3) throw std::invalid_argument("eh_series: order must be in [0, 3]");
  auto space = JetSpace::uniform(1, order);
  const EHJets j = eh_jets(phi, b2, Jet::variable(space, 0, s));
  EHSeries out;
  out.E.assign(j.E.coefficients().begin(), j.E.coefficients().end());
  out.H.assign(j.H.coefficients().begin(), j.H.coefficients().end());
  return out;
}

EHScalars eh_scalars(const PhiFunction& phi, double b2, double s) {
  const EHSeries ser = eh_series(phi, b2, s, 3);
  EHScalars r;
  r.E = ser.E[0];
  r.E2 = ser.E[1];
  r.E22 = 2.0 * ser.E[2];
  r.E222 = 6.0 * ser.E[3];
  r.H = ser.H[0];
  r.H2 = ser.H[1];
  r.H22 = 2.0 * ser.H[2];
  r.H222 = 6.0 * ser.H[3];
  return r;
}

JetVector spray_definitional_jet(const MetricInstance& inst, const Point& x, const Direction& y, int order) {
  const int n = inst.dim;
  if (x.dim() != n || y.dim() != n) throw DomainError("spray: dimension mismatch");
  // y-variables 0..n-1 up to order + 2, x-variables n..2n-1 up to order 1.
  auto space = JetSpace::get({VarGroup{n, order + 2}, VarGroup{n, 1}});
  JetVector xj, yj;
  for (int i = 0; i < n; ++i) yj.push_back(Jet::variable(space, i, y[i]));
  for (int i = 0; i < n; ++i) xj.push_back(Jet::variable(space, n + i, x[i]));
  const Jet F = eval_F_jet(inst, xj, yj);
  const Jet W = F * F;

  auto target = JetSpace::uniform(n, order);
  std::vector<int> var_map(2 * n, -1);
  for (int i = 0; i < n; ++i) var_map[i] = i;
  auto down = [&](const Jet& j) { return project(j, target, var_map); };

  std::vector<Jet> dW_dy(n), dW_dx(n);
  for (int i = 0; i < n; ++i) {
    dW_dy[i] = differentiate(W, i);
    dW_dx[i] = differentiate(W, n + i);
  }
  JetMatrix g(n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      g(i, j) = 0.5 * down(differentiate(dW_dy[i], j));
      if (j != i) g(j, i) = g(i, j);
    }
  JetVector y_t;
  for (int i = 0; i < n; ++i) y_t.push_back(Jet::variable(target, i, y[i]));
  JetVector rhs(n);
  for (int l = 0; l < n; ++l) {
    Jet acc = -down(dW_dx[l]);
    for (int k = 0; k < n; ++k) acc += down(differentiate(dW_dy[l], n + k)) * y_t[k];
    rhs[l] = acc;
  }
  JetVector G = solve(g, rhs);
  for (auto& gi : G) gi *= 0.25;
  return G;
}

JetVector spray_general_jet(const MetricInstance& inst, const Point& x, std::span<const Jet> y) {
  const int n = inst.dim;
  const BetaTensors t = beta_tensors(inst, x);
  const Christoffel gam = christoffel(inst.alpha, x);
  const YFrame f = y_frame(t.a, t.b_lower, y);
  const PhiJet pj(inst.phi, t.b2, f.s.value());
  const auto sc = scalars_from<Jet>(pj.along_s(0, 0, f.s), pj.along_s(1, 0, f.s), pj.along_s(0, 1, f.s),
                                    pj.along_s(1, 1, f.s), pj.along_s(0, 2, f.s), t.b2, f.s);

  Jet r00(0.0), r0(0.0), s0(0.0);
  JetVector s_i0(n, Jet(0.0));
  JetVector sy(n, Jet(0.0));  // s_jk y^k
  for (int j = 0; j < n; ++j) {
    Jet ry(0.0);
    for (int k = 0; k < n; ++k) {
      ry += t.r(j, k) * y[k];
      sy[j] += t.s(j, k) * y[k];
    }
    r00 += ry * y[j];
    r0 += t.r_lower(j) * y[j];
    s0 += t.s_lower(j) * y[j];
  }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) s_i0[i] += t.a_inv(i, j) * sy[j];

  const Jet& alpha = f.alpha;
  const Jet common = -2.0 * alpha * sc.Q * s0 + r00 + 2.0 * alpha * alpha * sc.R * t.r_scalar;
  const Jet y_coef = (sc.Theta * common + alpha * sc.Omega * (r0 + s0)) / alpha;
  const Jet b_coef = sc.Psi * common + alpha * sc.Pi * (r0 + s0);
  const Jet rs_coef = alpha * alpha * sc.R;

  JetVector G = gam.spray(y);
  for (int i = 0; i < n; ++i)
    G[i] += alpha * sc.Q * s_i0[i] + y_coef * y[i] + b_coef * t.b_upper(i) - rs_coef * (t.r_upper(i) + t.s_upper(i));
  return G;
}

namespace {

ConformalFit require_conformal(const MetricInstance& inst, double c, const Point& x) {
  const ConformalFit fit = conformal_fit(inst, x);
  if (!fit.is_conformal_closed) {
    std::ostringstream os;
    os << "conformal spray requires b_{i|j} = c a_ij; residual " << fit.residual << " at this point";
    throw PreconditionError(os.str());
  }
  if (std::abs(fit.c - c) > 1e-8 * std::max(1.0, std::abs(fit.c))) {
    std::ostringstream os;
    os << "conformal factor mismatch: supplied c = " << c << ", fitted c = " << fit.c;
    throw PreconditionError(os.str());
  }
  return fit;
}

}  // namespace

JetVector spray_conformal_jet(const MetricInstance& inst, double c, const Point& x, std::span<const Jet> y) {
  require_conformal(inst, c, x);
  const int n = inst.dim;
  const Eigen::MatrixXd a = inst.alpha.matrix(x);
  const Eigen::VectorXd b = inst.beta.vector(x);
  const Eigen::VectorXd b_up = a.fullPivLu().solve(b);
  const double b2 = b.dot(b_up);
  const YFrame f = y_frame(a, b, y);
  const Christoffel gam = christoffel(inst.alpha, x);
  JetVector G = gam.spray(y);
  if (c == 0.0) return G;
  const EHSeries ser = eh_series(inst.phi, b2, f.s.value(), std::min(3, jet_order(y)));
  const Jet E = compose(f.s, ser.E);
  const Jet H = compose(f.s, ser.H);
  const Jet y_coef = c * f.alpha * E;
  const Jet b_coef = c * f.alpha * f.alpha * H;
  for (int i = 0; i < n; ++i) G[i] += y_coef * y[i] + b_coef * b_up(i);
  return G;
}

SprayResult spray_definitional(const MetricInstance& inst, const Point& x, const Direction& y) {
  SprayResult r;
  r.G = values(spray_definitional_jet(inst, x, y, 0));
  r.G_alpha = christoffel(inst.alpha, x).spray(y.values());
  return r;
}

SprayResult spray_general(const MetricInstance& inst, const Point& x, const Direction& y) {
  SprayResult r;
  r.G = values(spray_general_jet(inst, x, y.as_jets()));
  r.G_alpha = christoffel(inst.alpha, x).spray(y.values());
  return r;
}

SprayResult spray_conformal(const MetricInstance& inst, double c, const Point& x, const Direction& y) {
  SprayResult r;
  r.G = values(spray_conformal_jet(inst, c, x, y.as_jets()));
  r.G_alpha = christoffel(inst.alpha, x).spray(y.values());
  const Eigen::MatrixXd a = inst.alpha.matrix(x);
  const Eigen::VectorXd b = inst.beta.vector(x);
  Eigen::Map<const Eigen::VectorXd> yv(y.values().data(), y.dim());
  const double alpha = std::sqrt(yv.dot(a * yv));
  if (c == 0.0) {
    r.y_coefficient = 0.0;
    r.b_coefficient = 0.0;
    return r;
  }
  const double b2 = b.dot(a.fullPivLu().solve(b));
  const EHScalars eh = eh_scalars(inst.phi, b2, b.dot(yv) / alpha);
  r.y_coefficient = c * alpha * eh.E;
  r.b_coefficient = c * alpha * alpha * eh.H;
  return r;
}

SprayResult spray_conformal(const MetricInstance& inst, const Point& x, const Direction& y) {
  const ConformalFit fit = conformal_fit(inst, x);
  if (!fit.is_conformal_closed) {
    std::ostringstream os;
    os << "conformal spray requires b_{i|j} = c a_ij; residual " << fit.residual << " at this point";
    throw PreconditionError(os.str());
  }
  return spray_conformal(inst, fit.c, x, y);
}

}  // namespace finsler
