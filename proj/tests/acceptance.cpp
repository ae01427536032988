// One line per acceptance criterion; exit status is the number of failures.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "finsler/berwald.hpp"
#include "finsler/beta_calculus.hpp"
#include "finsler/classify.hpp"
#include "finsler/regularity.hpp"
#include "finsler/registry.hpp"
#include "finsler/sampling.hpp"
#include "finsler/spray.hpp"

using namespace finsler;
using nlohmann::json;
using U = UnivariateFunction;

namespace {

constexpr std::uint64_t kSeed = 20240601;

struct Outcome {
  bool pass = true;
  std::string summary;
  std::vector<std::string> detail;

  void require(bool ok, const std::string& line) {
    pass = pass && ok;
    detail.push_back(std::string(ok ? "ok    " : "FAIL  ") + line);
  }
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

MetricInstance builtin(const std::string& name) { return parse_instance(builtin_instance(name)).instance; }

MetricInstance radial_instance(const PhiFunction& phi, int dim = 3, double c = 0.1) {
  return MetricInstance(phi.family(), make_alpha("euclidean", json::object(), dim),
                        make_beta("radial", {{"c", c}}, dim), phi);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Outcome criterion1() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  for (const char* name : {"riemannian", "randers-radial", "randers-rotational", "navigation-randers", "bao-robles-shen"}) {
    const auto inst = builtin(name);
    Sampler sampler(inst, kSeed);
    double m = 0.0;
    int errors = 0;
    for (int k = 0; k < 100; ++k) {
      const Sample s = sampler.next();
      try {
        const auto gd = spray_definitional(inst, s.x, s.y).G;
        const auto gg = spray_general(inst, s.x, s.y).G;
        m = std::max(m, (gg - gd).cwiseAbs().maxCoeff() / std::max(gd.cwiseAbs().maxCoeff(), 1e-12));
      } catch (const Error&) {
        ++errors;
      }
    }
    worst = std::max(worst, m);
    o.require(m < 1e-8 && errors == 0, fmt("%-20s max rel dev %.2e over 100 samples", name, m));
  }
  const double t = seconds_since(t0);
  o.require(t < 10.0, fmt("runtime %.2f s (limit 10 s)", t));
  o.summary = fmt("spray_general = spray_definitional on 5 instances, worst rel dev %.2e < 1e-8, %.2f s", worst, t);
  return o;
}

Outcome criterion2() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  for (const char* name : {"randers-radial", "randers-radial-3d", "thm-randers", "thm-riemannian", "thm-berwald"}) {
    const auto inst = builtin(name);
    Sampler sampler(inst, kSeed);
    double m = 0.0;
    int nonconformal = 0;
    for (int k = 0; k < 50; ++k) {
      const Sample s = sampler.next();
      const auto fit = conformal_fit(inst, s.x);
      if (!fit.is_conformal_closed) {
        ++nonconformal;
        continue;
      }
      m = std::max(m, max_abs_diff(berwald_oracle(inst, s.x, s.y), berwald_closed_form(inst, fit.c, s.x, s.y)));
    }
    worst = std::max(worst, m);
    o.require(m < 1e-7 && nonconformal == 0, fmt("%-20s n=%d max dev %.2e over 50 samples", name, inst.dim, m));
  }
  const double t = seconds_since(t0);
  o.require(t < 30.0, fmt("runtime %.2f s (limit 30 s)", t));
  o.summary = fmt("berwald_closed_form = berwald_oracle, n in {2,3}, worst dev %.2e < 1e-7, %.2f s", worst, t);
  return o;
}

Outcome criterion3() {
  Outcome o;
  double riem = 0.0;
  for (const char* name : {"riemannian", "thm-riemannian"}) {
    const auto inst = builtin(name);
    Sampler sampler(inst, kSeed);
    for (int k = 0; k < 30; ++k) {
      const Sample s = sampler.next();
      riem = std::max(riem, berwald_oracle(inst, s.x, s.y).max_abs());
    }
  }
  o.require(riem < 1e-10, fmt("Riemannian: max |B| = %.2e (< 1e-10)", riem));
  double triv = 0.0;
  for (const auto& [family, params] : std::vector<std::pair<std::string, json>>{
           {"randers", json::object()}, {"navigation-randers", json::object()}, {"thm-randers", {{"rho", 0.3}}}}) {
    const auto inst = parse_instance({{"dim", 3},
                                      {"alpha", {{"family", "euclidean"}, {"params", json::object()}}},
                                      {"beta", {{"family", "constant"}, {"params", {{"b", {0.1, -0.05, 0.2}}}}}},
                                      {"phi", {{"family", family}, {"params", params}}}})
                          .instance;
    Sampler sampler(inst, kSeed);
    double m = 0.0;
    for (int k = 0; k < 30; ++k) {
      const Sample s = sampler.next();
      m = std::max(m, berwald_oracle(inst, s.x, s.y).max_abs());
    }
    triv = std::max(triv, m);
    o.require(m < 1e-9, fmt("c = 0 with phi %-20s max |B| = %.2e (< 1e-9)", family.c_str(), m));
  }
  o.summary = fmt("Riemannian max|B| %.2e < 1e-10; c = 0 max|B| %.2e < 1e-9 for 3 phi families", riem, triv);
  return o;
}

Outcome criterion4() {
  Outcome o;
  struct Case {
    std::string name;
    std::function<PhiFunction()> make;
    double rho;
    bool expect;
  };
  const std::vector<Case> cases = {
      {"randers rho=0.3", [] { return family_randers(U::polynomial({1.0, -0.72}), U::constant(0.0), U::constant(0.0), 0.3); }, 0.3, true},
      {"kropina a=1", [] { return family_kropina(U::constant(1.0)); }, 0.0, true},
      {"riemannian t1=0 sigma=2", [] { return family_riemannian(U::constant(1 / std::sqrt(2.0)), U::constant(0.0), U::constant(2.0)); }, 0.0, true},
      {"berwald t2=0", [] { return family_berwald(U::constant(0.0), U::polynomial({1.0, 1.0})); }, 0.0, true},
      {"berwald t2=0.5", [] { return family_berwald(U::constant(0.5), U::polynomial({1.0, 1.0})); }, 0.0, true},
      {"control phi=1+s", [] { return make_phi("randers", json::object()); }, 0.0, false}};
  int good = 0;
  for (const auto& c : cases) {
    std::string note;
    bool l41 = false, iso = false;
    double lres = NAN, tau = NAN, ires = NAN;
    try {
      const PhiFunction phi = c.make();
      const auto rep = lemma41_residuals(phi, c.rho, make_grid(phi));
      l41 = rep.all_pass();
      lres = 0.0;
      for (const auto& e : rep.entries) {
        lres = std::max(lres, e.max_abs);
        if (e.skipped && note.empty()) note = e.note;
      }
      const auto inst = radial_instance(phi);
      Sampler sampler(inst, kSeed);
      bool all = true;
      double worst_tau = 0.0;
      ires = 0.0;
      for (int k = 0; k < 3; ++k) {
        const Point x = sampler.next().x;
        const auto fit = isotropic_fit(inst, x, sampler.directions(x, 8));
        all = all && fit.is_isotropic;
        tau = fit.tau;
        ires = std::max(ires, fit.residual_max);
        worst_tau = std::max(worst_tau, std::abs(fit.tau - 0.1 * c.rho));
      }
      iso = all && worst_tau < 1e-7;
    } catch (const std::exception& e) {
      if (note.empty()) note = e.what();
    }
    const bool ok = c.expect ? (l41 && iso) : (!l41 && !iso);
    good += ok;
    std::string line = fmt("%-24s lemma41 %s (max %.2e), isotropic %s (tau %.6g, fit residual %.2e)", c.name.c_str(),
                           l41 ? "pass" : "fail", lres, iso ? "yes" : "no", tau, ires);
    if (!note.empty()) line += " [" + note + "]";
    o.require(ok, line);
  }
  o.summary = fmt("lemma41 residual <=> isotropic fit, tau = rho c: %d/%zu cases as expected", good, cases.size());
  return o;
}

Outcome criterion5() {
  Outcome o;
  const auto randers = family_randers(U::polynomial({1.0, -0.72}), U::constant(0.0), U::constant(0.0), 0.3);
  const auto kropina = family_kropina(U::constant(1.0));
  const auto riem = family_riemannian(U::constant(1 / std::sqrt(2.0)), U::constant(0.0), U::constant(2.0));
  const auto berw = family_berwald(U::constant(0.5), U::polynomial({1.0, 1.0}));
  double worst = 0.0, worst_id = 0.0;
  auto take = [&](const std::string& fam, const ResidualReport& r, std::initializer_list<const char*> names) {
    for (const char* n : names) {
      const ResidualEntry* e = r.find(n);
      const bool identity = std::string(n).find("identity") != std::string::npos;
      const double tol = identity ? 1e-8 : 1e-7;
      const bool ok = e && e->points == 400 && e->skipped == 0 && e->max_abs < tol;
      if (e) (identity ? worst_id : worst) = std::max(identity ? worst_id : worst, e->max_abs);
      o.require(ok, fmt("%-11s %-13s %.2e (< %.0e, %d points)", fam.c_str(), n, e ? e->max_abs : NAN, tol,
                        e ? e->points : 0));
    }
  };
  const auto gr = make_grid(randers);
  const auto pr = *declared_params(randers);
  take("randers", pde_residuals(randers, pr, gr), {"TTT1", "HHH1", "Ds1", "Ds2", "Ds1-identity", "Ds2-identity"});
  take("randers", ds3_residuals(randers, pr, gr), {"Ds3"});
  const auto gk = make_grid(kropina);
  take("kropina", pde_residuals(kropina, *declared_params(kropina), gk), {"Ds2"});
  take("kropina", ds3_residuals(kropina, *declared_params(kropina), gk), {"Ds3"});
  const auto gm = make_grid(riem);
  take("riemannian", pde_residuals(riem, *declared_params(riem), gm), {"Ds2"});
  take("riemannian", pde_residuals(riem, recovered_params(riem, 0.0), gm), {"TTT1", "HHH1", "Ds1", "Ds1-identity"});
  const auto gb = make_grid(berw);
  take("berwald", order1_residuals(berw, U::constant(0.5), gb), {"1order"});
  take("berwald", pde_residuals(berw, *declared_params(berw), gb), {"TTT1", "HHH1", "Ds1", "Ds2", "Ds1-identity"});
  o.summary = fmt("TTT1/HHH1/Ds1/Ds2/Ds3/1order max %.2e < 1e-7; derivation identities max %.2e < 1e-8 (20x20 grids)",
                  worst, worst_id);
  return o;
}

Outcome criterion6() {
  Outcome o;
  double ode = 0.0, c3 = 0.0, c6 = 0.0, dev = 0.0;
  for (double t2 : {0.0, 0.5}) {
    const auto sol = bernoulli_solve(U::constant(t2), 3.0, 1.0);
    for (int k = 1; k <= 20; ++k) ode = std::max(ode, sol.ode_residual(0.2 + 0.07 * k));
    for (double u_end : {0.3, 1.8}) {
      const auto tr = trace_characteristic(sol, 1.0, u_end);
      c3 = std::max(c3, tr.chara3_variation);
      c6 = std::max(c6, tr.chara6_variation);
      dev = std::max(dev, tr.closed_form_deviation);
    }
  }
  o.require(ode < 1e-8, fmt("linear ODE residual by AD %.2e (< 1e-8)", ode));
  o.require(c3 < 1e-7, fmt("chara3 variation %.2e (< 1e-7)", c3));
  o.require(c6 < 1e-7, fmt("chara6 variation %.2e (< 1e-7)", c6));
  o.require(dev < 1e-7, fmt("Runge-Kutta vs closed form %.2e (< 1e-7)", dev));
  double hand = 0.0;
  for (double c1 : {0.5, 1.0, 2.0})
    for (double u : {0.25, 1.0, 4.0, 9.0}) {
      const auto sol = bernoulli_solve(U::constant(0.0), c1, 1.0);
      const double s = sol.s(u);
      hand = std::max(hand, std::abs(s * s - u / c1) / (u / c1));
    }
  o.require(hand < 1e-14, fmt("t2 = 0: s^2 = b^2 / c1 to rel %.1e", hand));
  const auto unit = bernoulli_solve(U::constant(0.0), 1.0, 1.0);
  o.require(unit.s(4.0) * unit.s(4.0) == 4.0, fmt("t2 = 0, c1 = 1, ref = 1: s^2(4) = %.17g", unit.s(4.0) * unit.s(4.0)));
  o.summary = fmt("ODE residual %.2e < 1e-8; chara3/chara6 variation %.2e/%.2e < 1e-7; t2=0 hand solution rel %.1e",
                  ode, c3, c6, hand);
  return o;
}

Outcome criterion7() {
  Outcome o;
  const auto onep = make_phi("randers", json::object()).with_b0(INFINITY);
  const auto a = check_regularity(onep, 1.0, 3);
  o.require(a.pass, fmt("phi=1+s, b0=1: pass=%d, %ld violations", a.pass, a.violation_count));
  const auto b = check_regularity(onep, 1.2, 3);
  o.require(!b.pass, fmt("phi=1+s, b0=1.2: pass=%d, %ld violations, b0 estimate %.4f", b.pass, b.violation_count,
                         b.b0_estimate));
  const auto w = check_point(onep, 1.21, -1.1, 3);
  const bool witness = w.size() == 1 && w[0].inequality == "phi" && std::abs(w[0].value + 0.1) < 1e-12;
  o.require(witness, fmt("witness (1.21, -1.1): phi = %.6g", w.empty() ? NAN : w[0].value));
  const auto riem = check_regularity(
      family_riemannian(U::constant(1 / std::sqrt(2.0)), U::constant(0.0), U::constant(2.0)), 0.6, 3);
  o.require(riem.pass, fmt("Riemannian family, b0=0.6: pass=%d", riem.pass));
  const auto kr = check_regularity(family_kropina(U::constant(1.0)), 0.6, 3);
  o.require(kr.singular && !kr.pass, fmt("Kropina: singular=%d pass=%d", kr.singular, kr.pass));
  o.summary = "phi=1+s passes at b0=1, fails at b0=1.2 with witness phi(1.21,-1.1)=-0.1; Riemannian passes; Kropina singular";
  return o;
}

Outcome criterion8() {
  Outcome o;
  int total = 0, passed = 0;
  for (const auto& name : builtin_instance_names()) {
    if (name == "thm-kropina") continue;
    const auto inst = builtin(name);
    Sampler sampler(inst, kSeed);
    int t = 0, p = 0;
    for (int k = 0; k < 20; ++k) {
      const Sample s = sampler.next();
      auto check = [&](bool ok) {
        ++t;
        p += ok;
      };
      const double f = eval_F(inst, s.x, s.y);
      for (double lam : {0.5, 2.0, 3.0}) check(std::abs(eval_F(inst, s.x, s.y.scaled(lam)) - lam * f) <= 1e-13 * lam * f);
      const auto g = spray_general(inst, s.x, s.y).G;
      const double gs = std::max(g.cwiseAbs().maxCoeff(), 1e-12);
      for (double lam : {0.5, 2.0})
        check((spray_general(inst, s.x, s.y.scaled(lam)).G - lam * lam * g).cwiseAbs().maxCoeff() <= 1e-12 * lam * lam * gs);
      const auto b = berwald_oracle(inst, s.x, s.y);
      const double bs = 1.0 + b.max_abs();
      check(b.symmetry_defect() < 1e-9 * bs);
      check(b.y_contraction(s.y.values()) < 1e-8 * bs);
      const auto gt = fundamental_tensor(inst, s.x, s.y).g;
      Eigen::Map<const Eigen::VectorXd> y(s.y.values().data(), inst.dim);
      check(std::abs(y.dot(gt * y) - f * f) < 1e-10 * f * f);
    }
    total += t;
    passed += p;
    o.require(p == t, fmt("%-20s %d/%d", name.c_str(), p, t));
  }
  o.summary = fmt("F 1-homogeneous, G 2-homogeneous, B symmetric with B.y = 0, g(y,y) = F^2: %d/%d", passed, total);
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  const bool verbose = argc > 1 && std::string(argv[1]) == "-v";
  const std::vector<std::function<Outcome()>> criteria = {criterion1, criterion2, criterion3, criterion4,
                                                          criterion5, criterion6, criterion7, criterion8};
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i]();
    } catch (const std::exception& e) {
      o.pass = false;
      o.summary = std::string("error: ") + e.what();
    }
    failures += !o.pass;
    std::printf("[%s] %zu. %s\n", o.pass ? "PASS" : "FAIL", i + 1, o.summary.c_str());
    if (verbose || !o.pass)
      for (const auto& d : o.detail) std::printf("         %s\n", d.c_str());
    std::fflush(stdout);
  }
  return failures;
}
