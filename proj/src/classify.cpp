#include "finsler/classify.hpp"

#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <functional>
#include <map>
#include <mutex>
#include <sstream>
#include <unordered_map>

#include "finsler/errors.hpp"
#include "finsler/spray.hpp"

namespace finsler {

bool ResidualReport::all_pass() const {
  for (const auto& e : entries)
    if (!e.pass) return false;
  return !entries.empty();
}

const ResidualEntry* ResidualReport::find(const std::string& name) const {
  for (const auto& e : entries)
    if (e.name == name) return &e;
  return nullptr;
}

void ResidualReport::append(const ResidualReport& other) {
  entries.insert(entries.end(), other.entries.begin(), other.entries.end());
}

std::vector<GridPoint> make_grid(const PhiFunction& phi, const GridSpec& spec) {
  if (spec.nb < 1 || spec.ns < 2) throw std::invalid_argument("make_grid: need nb >= 1 and ns >= 2");
  const double b_max = spec.b_max.value_or(std::min(0.6, 0.9 * phi.b0()));
  const double lo = spec.s_lo.value_or(phi.singular() ? 0.05 : -0.9);
  const double hi = spec.s_hi.value_or(phi.singular() ? 0.8 : 0.9);
  std::vector<GridPoint> g;
  g.reserve(static_cast<std::size_t>(spec.nb) * spec.ns);
  for (int r = 0; r < spec.nb; ++r) {
    const double b = b_max * (r + 1) / spec.nb;
    for (int m = 0; m < spec.ns; ++m) g.push_back({b * b, b * (lo + (hi - lo) * m / (spec.ns - 1))});
  }
  return g;
}

namespace {

// Accumulates several named residuals over a grid.
class Accumulator {
 public:
  Accumulator(std::vector<std::pair<std::string, double>> names_tols) {
    for (auto& [n, t] : names_tols) {
      ResidualEntry e;
      e.name = n;
      e.tol = t;
      entries_.push_back(e);
      sumsq_.push_back(0.0);
    }
  }

  void run(std::span<const GridPoint> grid, const std::function<std::vector<double>(const GridPoint&)>& eval) {
    for (const auto& p : grid) {
      std::vector<double> r;
      try {
        r = eval(p);
      } catch (const Error& e) {
        for (auto& en : entries_) {
          ++en.skipped;
          if (en.note.empty()) en.note = e.what();
        }
        continue;
      }
      for (std::size_t i = 0; i < entries_.size(); ++i) {
        const double v = std::abs(r[i]);
        auto& en = entries_[i];
        ++en.points;
        if (!std::isfinite(v)) {
          en.max_abs = std::numeric_limits<double>::infinity();
        } else {
          en.max_abs = std::max(en.max_abs, v);
        }
        sumsq_[i] += v * v;
      }
    }
  }

  ResidualReport finish() {
    ResidualReport rep;
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      auto& e = entries_[i];
      e.rms = e.points > 0 ? std::sqrt(sumsq_[i] / e.points) : 0.0;
      e.pass = e.points > 0 && e.skipped == 0 && e.max_abs < e.tol;
      if (e.points == 0 && e.note.empty()) e.note = "no grid point could be evaluated";
      rep.entries.push_back(e);
    }
    return rep;
  }

 private:
  std::vector<ResidualEntry> entries_;
  std::vector<double> sumsq_;
};

struct AlongS {
  Jet s, p, p1, p2, p12, p22;
};

AlongS along_s(const PhiFunction& phi, double b2, double s0, int order) {
  phi.check_domain(b2, s0);
  const PhiJet pj(phi, b2, s0);
  AlongS a;
  a.s = Jet::variable(JetSpace::uniform(1, order), 0, s0);
  a.p = pj.along_s(0, 0, a.s);
  a.p1 = pj.along_s(1, 0, a.s);
  a.p2 = pj.along_s(0, 1, a.s);
  a.p12 = pj.along_s(1, 1, a.s);
  a.p22 = pj.along_s(0, 2, a.s);
  return a;
}

struct ParamsAt {
  double rho, sigma, t1, t2;
};

ParamsAt params_at(const ClassificationParams& p, double u) { return {p.rho, p.sigma(u), p.t1(u), p.t2(u)}; }

Jet ttt1(const AlongS& a, const ParamsAt& q, double u) {
  const Jet& s = a.s;
  const Jet T = q.t1 + q.t2 * s * s;
  return (1.0 - T * (u - s * s)) * a.p2 + 2.0 * s * a.p1 - s * (T + q.sigma) * a.p - 2.0 * q.rho * a.p * a.p;
}

Jet ds2(const AlongS& a, const ParamsAt& q, double u) {
  const Jet& s = a.s;
  return (2.0 - 2.0 * q.t1 * (u - s * s) + q.sigma * s * s) * a.p2 - (2.0 * q.t1 + q.sigma) * s * a.p -
         4.0 * q.rho * a.p * a.p + 4.0 * q.rho * s * a.p * a.p2;
}

}  // namespace

ResidualReport lemma41_residuals(const PhiFunction& phi, double rho, std::span<const GridPoint> grid, double tol) {
  Accumulator acc({{"lresult1", tol}, {"lresult2", tol}});
  acc.run(grid, [&](const GridPoint& p) {
    phi.check_domain(p.b2, p.s);
    const EHJets j = eh_jets(phi, p.b2, Jet::variable(JetSpace::uniform(1, 2), 0, p.s));
    const double E = j.E.value(), E2 = j.E.derivative({1});
    const double H = j.H.value(), H2 = j.H.derivative({1}), H22 = j.H.derivative({2});
    const double p0 = j.phi.value(), sp2 = p.s * j.phi2.value();
    const double m1 = 1.0 + std::abs(E) + std::abs(p.s * E2) + std::abs(rho) * (std::abs(p0) + std::abs(sp2));
    const double m2 = 1.0 + std::abs(H) + std::abs(p.s * H2) + std::abs(p.s * p.s * H22);
    return std::vector<double>{(E - p.s * E2 - rho * (p0 - sp2)) / m1, (H2 - p.s * H22) / m2};
  });
  return acc.finish();
}

ResidualReport pde_residuals(const PhiFunction& phi, const ClassificationParams& params,
                             std::span<const GridPoint> grid, double tol) {
  Accumulator acc({{"TTT1", tol},
                   {"HHH1", tol},
                   {"Ds", tol},
                   {"Ds1", tol},
                   {"Ds2", tol},
                   {"Ds-identity", kIdentityTolerance},
                   {"Ds1-identity", kIdentityTolerance},
                   {"Ds2-identity", kIdentityTolerance}});
  acc.run(grid, [&](const GridPoint& g) {
    const double u = g.b2, s = g.s;
    const ParamsAt q = params_at(params, u);
    const AlongS a = along_s(phi, u, s, 1);
    const Jet t = ttt1(a, q, u);
    const double T = q.t1 + q.t2 * s * s;
    const double p = a.p.value(), p1 = a.p1.value(), p2 = a.p2.value(), p12 = a.p12.value(), p22 = a.p22.value();
    const double hhh1 = (1.0 - (u - s * s) * T) * p22 - 2.0 * p1 + 2.0 * s * p12 + s * T * p2 - T * p;
    const double ds = (1.0 - T * (u - s * s)) * p22 + 2.0 * p1 + 2.0 * s * p12 +
                      s * (q.t1 - q.sigma - 2.0 * u * q.t2 + 3.0 * q.t2 * s * s) * p2 -
                      (q.t1 + q.sigma + 3.0 * q.t2 * s * s) * p - 4.0 * q.rho * p * p2;
    const double ds1 = 4.0 * p1 - s * (2.0 * q.t2 * (u - s * s) + q.sigma) * p2 - (q.sigma + 2.0 * q.t2 * s * s) * p -
                       4.0 * q.rho * p * p2;
    const double d2 = ds2(a, q, u).value();
    const double ds_ad = t.derivative({1});
    return std::vector<double>{t.value(),       hhh1,
                               ds,              ds1,
                               d2,              ds - ds_ad,
                               ds1 - (ds_ad - hhh1), d2 - (2.0 * t.value() - s * ds1)};
  });
  return acc.finish();
}

ResidualReport ds3_residuals(const PhiFunction& phi, const ClassificationParams& params,
                             std::span<const GridPoint> grid, double tol) {
  Accumulator acc({{"Ds3", tol}, {"Ds3-identity", kIdentityTolerance}});
  acc.run(grid, [&](const GridPoint& g) {
    const double u = g.b2;
    const ParamsAt q = params_at(params, u);
    const AlongS a = along_s(phi, u, g.s, 1);
    const Jet& s = a.s;
    const Jet w = (2.0 - 2.0 * q.t1 * (u - s * s) + q.sigma * s * s) / (a.p * a.p) + 8.0 * q.rho * s / a.p;
    const double d3 = w.derivative({1});
    const double p = a.p.value();
    return std::vector<double>{d3, d3 + 2.0 * ds2(a, q, u).value() / (p * p * p)};
  });
  return acc.finish();
}

ResidualReport order1_residuals(const PhiFunction& phi, const UnivariateFunction& t2, std::span<const GridPoint> grid,
                                double tol) {
  Accumulator acc({{"1order", tol}});
  acc.run(grid, [&](const GridPoint& g) {
    const double u = g.b2, s = g.s, t = t2(u);
    phi.check_domain(u, s);
    const PhiJet pj(phi, u, s, 1);
    const double r = pj.d1() + 0.5 * s * (1.0 / u - (u - s * s) * t) * pj.d2() - 0.5 * (-1.0 / u + t * s * s) * pj.value();
    return std::vector<double>{r};
  });
  return acc.finish();
}

RecoveredParams recover_params(const PhiFunction& phi, double rho, double b2, std::span<const double> s_values) {
  if (s_values.size() < 2) throw std::invalid_argument("recover_params: need at least two s values");
  std::vector<double> psi, hs;
  for (double s : s_values) {
    phi.check_domain(b2, s);
    const EHSeries e = eh_series(phi, b2, s, 0);
    psi.push_back(e.E[0] - rho * phi(b2, s));
    hs.push_back(e.H[0]);
  }
  RecoveredParams r;
  r.b2 = b2;
  double num = 0.0, den = 0.0;
  for (std::size_t m = 0; m < s_values.size(); ++m) {
    num += psi[m] * s_values[m];
    den += s_values[m] * s_values[m];
  }
  r.sigma = den > 0.0 ? 2.0 * num / den : 0.0;
  const int n = static_cast<int>(s_values.size());
  Eigen::MatrixXd A(n, 2);
  Eigen::VectorXd h(n);
  for (int m = 0; m < n; ++m) {
    A(m, 0) = 1.0;
    A(m, 1) = s_values[m] * s_values[m];
    h(m) = hs[m];
  }
  const Eigen::VectorXd c = A.colPivHouseholderQr().solve(h);
  r.t1 = 2.0 * c(0);
  r.t2 = 2.0 * c(1);
  for (int m = 0; m < n; ++m) {
    const double s = s_values[m];
    r.linearity_residual = std::max(r.linearity_residual, std::abs(psi[m] - 0.5 * r.sigma * s));
    r.quadratic_residual = std::max(r.quadratic_residual, std::abs(hs[m] - 0.5 * (r.t1 + r.t2 * s * s)));
  }
  return r;
}

ResidualReport recovery_residuals(const PhiFunction& phi, double rho, std::span<const GridPoint> grid, double tol) {
  std::map<double, std::vector<double>> rows;
  for (const auto& p : grid) rows[p.b2].push_back(p.s);
  std::vector<GridPoint> keys;
  for (const auto& [u, ss] : rows) keys.push_back({u, 0.0});
  Accumulator acc({{"eq9", tol}, {"eq10", tol}});
  acc.run(keys, [&](const GridPoint& g) {
    const RecoveredParams r = recover_params(phi, rho, g.b2, rows.at(g.b2));
    return std::vector<double>{r.linearity_residual, r.quadratic_residual};
  });
  return acc.finish();
}

namespace {

std::vector<double> recovery_samples(const PhiFunction& phi, double u) {
  const double b = std::sqrt(u);
  std::vector<double> s;
  const double lo = phi.singular() ? 0.1 : -0.8, hi = 0.8;
  for (int m = 0; m < 7; ++m) s.push_back(b * (lo + (hi - lo) * m / 6.0));
  return s;
}

UnivariateFunction recovered_component(const PhiFunction& phi, double rho, double RecoveredParams::*field,
                                       const char* name) {
  return UnivariateFunction::callable(std::string("recovered ") + name, [phi, rho, field](const Jet& u) {
    if (!u.is_scalar()) throw std::logic_error("recovered parameters are only available as values");
    const double uv = u.value();
    return Jet(recover_params(phi, rho, uv, recovery_samples(phi, uv)).*field);
  });
}

UnivariateFunction inverse_u(double scale) {
  return UnivariateFunction::rational({scale}, {0.0, 1.0});
}

UnivariateFunction param(const nlohmann::json& p, const char* key, double fallback) {
  if (!p.contains(key)) return UnivariateFunction::constant(fallback);
  return UnivariateFunction::from_json(p.at(key));
}

}  // namespace

ClassificationParams recovered_params(const PhiFunction& phi, double rho) {
  ClassificationParams c;
  c.rho = rho;
  c.sigma = recovered_component(phi, rho, &RecoveredParams::sigma, "sigma");
  c.t1 = recovered_component(phi, rho, &RecoveredParams::t1, "t1");
  c.t2 = recovered_component(phi, rho, &RecoveredParams::t2, "t2");
  return c;
}

double family_rho(const PhiFunction& phi) {
  const auto& p = phi.params();
  return p.is_object() && p.contains("rho") ? p.at("rho").get<double>() : 0.0;
}

std::optional<ClassificationParams> declared_params(const PhiFunction& phi) {
  const auto& f = phi.family();
  const auto& p = phi.params();
  ClassificationParams c;
  c.rho = family_rho(phi);
  if (f == "thm-randers") {
    c.k = param(p, "k", 1.0);
    c.t1 = param(p, "t1", 0.0);
    c.sigma = param(p, "sigma", 0.0);
    return c;
  }
  if (f == "thm-riemannian") {
    c.t3 = param(p, "t3", 1.0);
    c.t1 = param(p, "t1", 0.0);
    c.sigma = param(p, "sigma", 0.0);
    return c;
  }
  if (f == "thm-kropina") {
    c.a = param(p, "a", 1.0);
    c.sigma = inverse_u(-2.0);
    c.t1 = inverse_u(1.0);
    const UnivariateFunction a = c.a;
    const double rho = c.rho;
    c.t2 = UnivariateFunction::callable("kropina t2", [a, rho](const Jet& u) {
      if (!u.is_scalar()) throw std::logic_error("kropina t2 is only available as a value");
      const double uv = u.value();
      const Jet aj = a(Jet::variable(JetSpace::uniform(1, 1), 0, uv));
      const double av = aj.value(), da = aj.derivative({1});
      return Jet((-2.0 * da / av + 2.0 / uv - 2.0 * rho / av) / uv);
    });
    return c;
  }
  if (f == "thm-berwald") {
    c.t2 = param(p, "t2", 0.0);
    c.sigma = inverse_u(-2.0);
    c.t1 = inverse_u(1.0);
    c.ref = p.value("ref", 1.0);
    return c;
  }
  return std::nullopt;
}

namespace {

template <class Radicand>
void probe_radicand(const char* family, double probe_b, const Radicand& rad) {
  const int n = 20;
  for (int r = 0; r <= n; ++r) {
    const double b = probe_b * r / n;
    for (int m = 0; m <= n; ++m) {
      const double s = b * (-1.0 + 2.0 * m / n);
      const double v = rad(b * b, s);
      if (!(v > 0.0)) {
        std::ostringstream os;
        os << family << ": radicand " << v << " <= 0 at (b^2, s) = (" << b * b + 0.0 << ", " << s + 0.0 << ")";
        throw DomainError(os.str());
      }
    }
  }
}

void radicand_error(const char* family, double v, const Jet& b2, const Jet& s) {
  std::ostringstream os;
  os << family << ": radicand " << v << " <= 0 at (b^2, s) = (" << b2.value() + 0.0 << ", " << s.value() + 0.0 << ")";
  throw DomainError(os.str());
}

}  // namespace

PhiFunction family_randers(const UnivariateFunction& k, const UnivariateFunction& t1, const UnivariateFunction& sigma,
                           double rho, double probe_b) {
  auto radicand = [k, t1, sigma, rho](const Jet& u, const Jet& s) {
    const Jet kv = k(u);
    return 2.0 * kv * (1.0 - t1(u) * u) + (16.0 * rho * rho + 2.0 * kv * t1(u) + kv * sigma(u)) * s * s;
  };
  probe_radicand("thm-randers", probe_b, [&](double u, double s) { return radicand(Jet(u), Jet(s)).value(); });
  for (int r = 0; r <= 20; ++r) {
    const double u = probe_b * probe_b * r / 20.0;
    if (k(u) == 0.0) {
      std::ostringstream os;
      os << "thm-randers: k vanishes at b^2 = " << u;
      throw DomainError(os.str());
    }
  }
  nlohmann::json params = {{"k", k.to_json()}, {"t1", t1.to_json()}, {"sigma", sigma.to_json()}, {"rho", rho}};
  return PhiFunction("thm-randers", std::move(params), [k, rho, radicand](const Jet& b2, const Jet& s) {
    const Jet r = radicand(b2, s);
    if (!(r.value() > 0.0)) radicand_error("thm-randers", r.value(), b2, s);
    return (4.0 * rho * s + sqrt(r)) / k(b2);
  });
}

PhiFunction family_kropina(const UnivariateFunction& a, double rho) {
  for (int r = 0; r <= 20; ++r) {
    const double u = 0.05 * r;
    if (!(a(u) > 0.0)) {
      std::ostringstream os;
      os << "thm-kropina: a(b^2) must be positive; a(" << u << ") = " << a(u);
      throw DomainError(os.str());
    }
  }
  nlohmann::json params = {{"a", a.to_json()}, {"rho", rho}};
  return PhiFunction(
      "thm-kropina", std::move(params), [a](const Jet& b2, const Jet& s) { return s / a(b2); },
      std::numeric_limits<double>::infinity(), true);
}

PhiFunction family_riemannian(const UnivariateFunction& t3, const UnivariateFunction& t1,
                              const UnivariateFunction& sigma, double probe_b) {
  auto radicand = [t1, sigma](const Jet& u, const Jet& s) {
    return 2.0 * (1.0 - u * t1(u)) + (sigma(u) + 2.0 * t1(u)) * s * s;
  };
  probe_radicand("thm-riemannian", probe_b, [&](double u, double s) { return radicand(Jet(u), Jet(s)).value(); });
  for (int r = 0; r <= 20; ++r) {
    const double u = probe_b * probe_b * r / 20.0;
    if (!(t3(u) > 0.0)) {
      std::ostringstream os;
      os << "thm-riemannian: t3 must be positive; t3(" << u << ") = " << t3(u);
      throw DomainError(os.str());
    }
  }
  nlohmann::json params = {{"t3", t3.to_json()}, {"t1", t1.to_json()}, {"sigma", sigma.to_json()}, {"rho", 0.0}};
  return PhiFunction("thm-riemannian", std::move(params), [t3, radicand](const Jet& b2, const Jet& s) {
    const Jet r = radicand(b2, s);
    if (!(r.value() > 0.0)) radicand_error("thm-riemannian", r.value(), b2, s);
    return t3(b2) * sqrt(r);
  });
}

struct BerwaldIntegrals::Cache {
  std::mutex m;
  std::unordered_map<double, double> j, c;
};

BerwaldIntegrals::BerwaldIntegrals(UnivariateFunction t2, double ref, double tol)
    : t2_(std::move(t2)), ref_(ref), tol_(tol), cache_(std::make_shared<Cache>()) {
  if (!(ref_ > 0.0)) throw std::invalid_argument("BerwaldIntegrals: reference b^2 must be positive");
}

namespace {

void require_positive_u(double u) {
  if (u > 0.0) return;
  std::ostringstream os;
  os << "quadrature from the reference point needs b^2 > 0, got " << u;
  throw DomainError(os.str());
}

double memo(std::mutex& m, std::unordered_map<double, double>& table, double u, const std::function<double()>& f) {
  {
    std::lock_guard<std::mutex> lock(m);
    auto it = table.find(u);
    if (it != table.end()) return it->second;
  }
  const double v = f();
  std::lock_guard<std::mutex> lock(m);
  table.emplace(u, v);
  return v;
}

}  // namespace

Jet BerwaldIntegrals::J(const Jet& u) const {
  require_positive_u(u.value());
  return log(u / ref_) - moment(u);
}

// int_ref^u v t2(v) dv
Jet BerwaldIntegrals::moment(const Jet& u) const {
  if (t2_.is_zero()) return 0.0 * u;
  const UnivariateFunction t2 = t2_;
  auto g = [t2](const Jet& v) { return v * t2(v); };
  const double value = memo(cache_->m, cache_->j, u.value(), [&] {
    return adaptive_simpson([&](double v) { return g(Jet(v)).value(); }, ref_, u.value(), tol_);
  });
  return antiderivative_jet(g, value, u);
}

Jet BerwaldIntegrals::C(const Jet& u) const {
  require_positive_u(u.value());
  if (t2_.is_zero()) return 0.0 * u;
  auto g = [this](const Jet& v) { return t2_(v) * exp(J(v)); };
  const double value = memo(cache_->m, cache_->c, u.value(), [&] {
    return adaptive_simpson([&](double v) { return g(Jet(v)).value(); }, ref_, u.value(), tol_);
  });
  return antiderivative_jet(g, value, u);
}

Jet BerwaldIntegrals::K(const Jet& u) const {
  require_positive_u(u.value());
  return 0.5 * moment(u) - log(u / ref_);
}

PhiFunction family_berwald(const UnivariateFunction& t2, const UnivariateFunction& varphi, double ref) {
  const BerwaldIntegrals ints(t2, ref);
  nlohmann::json params = {{"t2", t2.to_json()}, {"varphi", varphi.to_json()}, {"ref", ref}, {"rho", 0.0}};
  return PhiFunction(
      "thm-berwald", std::move(params),
      [ints, varphi](const Jet& b2, const Jet& s) {
        const Jet A = exp(ints.J(b2));
        const Jet s2 = s * s;
        const Jet xi = s2 / (A + s2 * ints.C(b2));
        return varphi(xi) * exp(ints.K(b2)) * s;
      },
      std::numeric_limits<double>::infinity(), true);
}

OdeSolution::OdeSolution(UnivariateFunction t2, double c1, double ref, double tol)
    : integrals_(std::move(t2), ref, tol), c1_(c1), tol_(tol) {}

Jet OdeSolution::inv_s2(const Jet& u) const { return exp(-integrals_.J(u)) * (c1_ - integrals_.C(u)); }

double OdeSolution::s(double u) const {
  const double z = inv_s2(u);
  if (!(z > 0.0)) {
    std::ostringstream os;
    os << "characteristic leaves the region s > 0: 1/s^2 = " << z << " at b^2 = " << u;
    throw DomainError(os.str());
  }
  return 1.0 / std::sqrt(z);
}

double OdeSolution::ode_residual(double u) const {
  const Jet z = inv_s2(Jet::variable(JetSpace::uniform(1, 1), 0, u));
  const double t = integrals_.t2()(u);
  return std::abs(z.derivative({1}) - ((u * t - 1.0 / u) * z.value() - t));
}

OdeSolution bernoulli_solve(const UnivariateFunction& t2, double c1, double ref) {
  if (!(c1 > 0.0)) throw DomainError("bernoulli_solve: c1 must be positive so that 1/s^2 > 0 at the reference point");
  return OdeSolution(t2, c1, ref);
}

CharacteristicTrace trace_characteristic(const OdeSolution& sol, double phi0, double u_end, int outputs) {
  namespace odeint = boost::numeric::odeint;
  using State = std::array<double, 2>;
  if (outputs < 2) throw std::invalid_argument("trace_characteristic: need at least two outputs");
  if (!(phi0 > 0.0)) throw DomainError("trace_characteristic: phi0 must be positive");
  require_positive_u(u_end);
  const UnivariateFunction& t2 = sol.integrals().t2();
  const double ref = sol.ref();

  auto rhs = [&t2](const State& x, State& dx, double u) {
    const double s = x[0], t = t2(u);
    dx[0] = 0.5 * s * (1.0 / u - (u - s * s) * t);
    dx[1] = 0.5 * (-1.0 / u + t * s * s) * x[1];
  };
  std::vector<double> times(outputs);
  for (int m = 0; m < outputs; ++m) times[m] = ref + (u_end - ref) * m / (outputs - 1);

  CharacteristicTrace tr;
  State x{sol.s(ref), phi0};
  auto stepper = odeint::make_dense_output(1e-13, 1e-13, odeint::runge_kutta_dopri5<State>());
  const double dt = (u_end - ref) / (10.0 * outputs);
  try {
    odeint::integrate_times(stepper, rhs, x, times.begin(), times.end(), dt, [&](const State& st, double u) {
      tr.u.push_back(u);
      tr.s.push_back(st[0]);
      tr.phi.push_back(st[1]);
    });
  } catch (const std::exception& e) {
    throw IntegrationError(std::string("characteristic integration failed: ") + e.what());
  }

  const BerwaldIntegrals& ints = sol.integrals();
  for (std::size_t m = 0; m < tr.u.size(); ++m) {
    const double u = tr.u[m], s = tr.s[m], phi = tr.phi[m];
    if (!(s > 0.0) || !(phi > 0.0)) throw IntegrationError("characteristic left s > 0 or phi > 0");
    const double A = std::exp(ints.J(u).value()), C = ints.C(u).value();
    tr.chara3.push_back(s * s / (A + s * s * C));
    const double I = adaptive_simpson([&t2](double v) { return 1.0 / v - 0.5 * v * t2(v); }, ref, u);
    tr.chara6.push_back(std::log(s / phi) - I);
    tr.closed_form_deviation = std::max(tr.closed_form_deviation, std::abs(1.0 / (s * s) - sol.inv_s2(u)));
  }
  auto spread = [](const std::vector<double>& v) {
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    return *hi - *lo;
  };
  tr.chara3_variation = spread(tr.chara3);
  tr.chara6_variation = spread(tr.chara6);
  return tr;
}

QuadraticSprayCheck quadratic_spray_check(const MetricInstance& inst, double tau, const Point& x,
                                          std::span<const Direction> directions, double tol) {
  const int n = inst.dim;
  const int need = 2 * n * n;
  if (static_cast<int>(directions.size()) < need) {
    std::ostringstream os;
    os << "quadratic_spray_check: need at least " << need << " directions, got " << directions.size();
    throw std::invalid_argument(os.str());
  }
  const int rows = static_cast<int>(directions.size());
  const int cols = n * (n + 1) / 2;
  Eigen::MatrixXd M(rows, cols), T(rows, n);
  for (int r = 0; r < rows; ++r) {
    const Direction& y = directions[r];
    const SprayResult g = spray_definitional(inst, x, y);
    const double F = eval_F(inst, x, y);
    int c = 0;
    for (int j = 0; j < n; ++j)
      for (int k = j; k < n; ++k) M(r, c++) = y[j] * y[k];
    for (int i = 0; i < n; ++i) T(r, i) = g.G(i) - tau * F * y[i];
  }
  const Eigen::MatrixXd Q = M.colPivHouseholderQr().solve(T);
  QuadraticSprayCheck out;
  out.tol = tol;
  out.directions = rows;
  const double scale = std::max(1.0, T.cwiseAbs().maxCoeff());
  out.residual = (M * Q - T).cwiseAbs().maxCoeff() / scale;
  out.pass = out.residual < tol;
  return out;
}

}  // namespace finsler
