#include "finsler/beta_calculus.hpp"
#include "finsler/sampling.hpp"
#include "finsler/spray.hpp"
#include "helpers.hpp"

using namespace finsler;

TEST_CASE("Christoffel symbols") {
  const auto eu = th::radial(2, "randers");
  const auto g0 = christoffel(eu.alpha, Point{0.3, 0.4});
  for (const auto& m : g0.gamma) CHECK(m.cwiseAbs().maxCoeff() == 0.0);

  const auto conf = make_alpha("conformal", {{"linear", {0.1, 0.0}}}, 2);
  const auto g = christoffel(conf, Point{0.0, 0.0});
  CHECK(g(0, 0, 0) == doctest::Approx(0.1).epsilon(1e-14));
  CHECK(g(0, 1, 1) == doctest::Approx(-0.1).epsilon(1e-14));
  CHECK(g(1, 0, 1) == doctest::Approx(0.1).epsilon(1e-14));
  CHECK(g(1, 1, 0) == doctest::Approx(0.1).epsilon(1e-14));

  for (const char* name : {"riemannian", "bao-robles-shen", "navigation-randers"}) {
    const auto inst = th::builtin(name);
    const Point x{0.6, 0.9, 1.2};
    const auto c = christoffel(inst.alpha, x);
    for (int i = 0; i < 3; ++i) CHECK((c.gamma[i] - c.gamma[i].transpose()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(metric_compatibility_residual(inst.alpha, x, c) < 1e-8);
  }
}

TEST_CASE("covariant derivative of beta") {
  const auto rad = th::radial(2, "randers");
  const Eigen::MatrixXd bc = covariant_derivative_beta(rad, Point{0.7, 0.2});
  CHECK((bc - 0.1 * Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-15);

  const auto rot = th::make(2, th::block("euclidean"), th::block("rotational", {{"c", 0.1}}), th::block("randers"), 1.0);
  const Eigen::MatrixXd br = covariant_derivative_beta(rot, Point{0.7, 0.2});
  CHECK((br + br.transpose()).cwiseAbs().maxCoeff() < 1e-15);
  const auto inv = beta_invariants(rot, Point{0.7, 0.2}, Direction{0.3, 0.8});
  CHECK(inv.r_ij.cwiseAbs().maxCoeff() < 1e-15);
  CHECK(std::abs(inv.r00) < 1e-15);
  CHECK(inv.s_i0.cwiseAbs().maxCoeff() > 1e-3);

  const auto cst = th::make(2, th::block("euclidean"), th::block("constant", {{"b", {0.1, 0.2}}}), th::block("randers"), 1.0);
  CHECK(covariant_derivative_beta(cst, Point{0.7, 0.2}).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("beta invariants under the closed conformal condition") {
  const auto rad = th::radial(2, "randers");
  const auto inv = beta_invariants(rad, Point{1.0, 0.0}, Direction{0.0, 1.0});
  CHECK(inv.r00 == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(std::abs(inv.s0) < 1e-15);

  for (const char* name : {"randers-radial-3d", "thm-randers"}) {
    const auto inst = th::builtin(name);
    Sampler sampler(inst, 31);
    for (int k = 0; k < 30; ++k) {
      const Sample s = sampler.next();
      const auto fit = conformal_fit(inst, s.x);
      REQUIRE(fit.is_conformal_closed);
      const double c = fit.c;
      const auto v = beta_invariants(inst, s.x, s.y);
      const Eigen::MatrixXd a = inst.alpha.matrix(s.x);
      Eigen::Map<const Eigen::VectorXd> y(s.y.values().data(), inst.dim);
      const double alpha2 = y.dot(a * y);
      const Eigen::VectorXd bu = a.inverse() * inst.beta.vector(s.x);
      const double beta = inst.beta.vector(s.x).dot(y);
      CHECK(std::abs(v.r00 - c * alpha2) < 1e-10);
      CHECK(std::abs(v.r0 - c * beta) < 1e-10);
      CHECK(std::abs(v.r - c * s.b2) < 1e-10);
      CHECK((v.r_upper - c * bu).cwiseAbs().maxCoeff() < 1e-10);
      CHECK(v.s_i0.cwiseAbs().maxCoeff() < 1e-10);
      CHECK(std::abs(v.s0) < 1e-10);
      CHECK(v.s_upper.cwiseAbs().maxCoeff() < 1e-10);
    }
  }
}

TEST_CASE("decomposition and antisymmetry identities") {
  const auto inst = th::builtin("navigation-randers");
  Sampler sampler(inst, 8);
  for (int k = 0; k < 20; ++k) {
    const Sample s = sampler.next();
    const auto v = beta_invariants(inst, s.x, s.y);
    CHECK((v.r_ij + v.s_ij - v.b_cov).cwiseAbs().maxCoeff() < 1e-14);
    CHECK((v.s_ij + v.s_ij.transpose()).cwiseAbs().maxCoeff() == 0.0);
    Eigen::Map<const Eigen::VectorXd> y(s.y.values().data(), inst.dim);
    const Eigen::VectorXd yl = inst.alpha.matrix(s.x) * y;
    CHECK(std::abs(v.s_i0.dot(yl)) < 1e-12);
    CHECK(std::abs(v.r - inst.beta.vector(s.x).dot(v.r_upper)) < 1e-12);
  }
}

TEST_CASE("conformal check") {
  const auto rad = th::radial(3, "randers");
  const auto fit = conformal_fit(rad, Point{0.5, 1.0, 1.5});
  CHECK(fit.is_conformal_closed);
  CHECK(fit.c == doctest::Approx(0.1).epsilon(1e-14));
  CHECK(fit.residual < 1e-12);

  const auto rot = th::builtin("randers-rotational");
  const auto rf = conformal_fit(rot, Point{0.5, 1.0, 1.5});
  CHECK_FALSE(rf.is_conformal_closed);
  CHECK(rf.residual == doctest::Approx(0.1).epsilon(1e-14));

  const auto zero = th::make(3, th::block("euclidean"), th::block("zero"), th::block("randers"), 1.0);
  const auto zf = conformal_fit(zero, Point{0.5, 1.0, 1.5});
  CHECK(zf.trivial);
  CHECK(zf.c == 0.0);
}

TEST_CASE("spray scalars and E, H for the elementary phi") {
  const PhiFunction randers = make_phi("randers", th::json::object());
  const auto q = spray_scalars(PhiJet(randers, 0.04, 0.0));
  CHECK(q.Q == doctest::Approx(1.0));
  CHECK(q.R == 0.0);
  CHECK(q.Psi == 0.0);
  CHECK(q.Pi == 0.0);
  CHECK(q.Omega == 0.0);
  CHECK(q.Theta == doctest::Approx(0.5));
  const auto eh = eh_scalars(randers, 0.04, 0.1);
  CHECK(eh.H == 0.0);
  CHECK(eh.E == doctest::Approx(1.0 / 2.2).epsilon(1e-14));
  CHECK(eh.E2 == doctest::Approx(-1.0 / (2 * 1.21)).epsilon(1e-14));

  const PhiFunction one = make_phi("riemannian", th::json::object());
  const auto q1 = spray_scalars(PhiJet(one, 0.3, 0.2));
  CHECK(q1.Q == 0.0);
  CHECK(q1.Theta == 0.0);
  CHECK(q1.Omega == 0.0);
  const auto e1 = eh_scalars(one, 0.3, 0.2);
  CHECK(e1.E == 0.0);
  CHECK(e1.H == 0.0);
}

TEST_CASE("E and H against Theta, Psi, Pi, Omega, R") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> ub(0.05, 0.55), us(-0.9, 0.9);
  const auto tr = th::builtin("thm-randers");
  for (const PhiFunction& phi : {tr.phi, navigation_randers_phi(), th::builtin("thm-riemannian").phi}) {
    for (int k = 0; k < 20; ++k) {
      const double b = ub(rng), s = us(rng) * b;
      const auto q = spray_scalars(PhiJet(phi, b * b, s));
      const auto eh = eh_scalars(phi, b * b, s);
      CHECK(std::abs(eh.E - (q.Theta * (1 + 2 * q.R * b * b) + s * q.Omega)) < 1e-10);
      CHECK(std::abs(eh.H - (q.Psi * (1 + 2 * q.R * b * b) + s * q.Pi - q.R)) < 1e-10);
    }
  }
}

TEST_CASE("spray examples") {
  const auto rad = th::radial(2, "randers");
  const Point x{1.0, 0.0};
  const Direction y{0.0, 1.0};
  for (const auto& r : {spray_definitional(rad, x, y), spray_general(rad, x, y), spray_conformal(rad, 0.1, x, y)}) {
    CHECK(std::abs(r.G[0]) < 1e-15);
    CHECK(r.G[1] == doctest::Approx(0.05).epsilon(1e-14));
  }
  const auto flat = th::make(2, th::block("euclidean"), th::block("radial"), th::block("riemannian"));
  CHECK(spray_definitional(flat, x, y).G.cwiseAbs().maxCoeff() < 1e-15);

  const auto riem = th::builtin("riemannian");
  const Point x3{0.4, 0.8, 1.1};
  const Direction y3{0.3, -0.4, 0.9};
  const auto gd = spray_definitional(riem, x3, y3);
  CHECK((gd.G - gd.G_alpha).cwiseAbs().maxCoeff() < 1e-14);

  const auto zero = th::make(3, th::block("conformal", {{"linear", {0.1, 0.2, 0.3}}}), th::block("zero"),
                             th::block("randers"), 1.0);
  const auto gz = spray_general(zero, x3, y3);
  CHECK((gz.G - gz.G_alpha).cwiseAbs().maxCoeff() < 1e-15);

  const auto cst = th::make(3, th::block("euclidean"), th::block("constant", {{"b", {0.1, 0.0, 0.2}}}),
                            th::block("thm-randers", {{"rho", 0.3}}));
  const auto gc = spray_conformal(cst, 0.0, x3, y3);
  CHECK((gc.G - gc.G_alpha).cwiseAbs().maxCoeff() == 0.0);

  const auto rot = th::builtin("randers-rotational");
  CHECK_THROWS_AS(spray_conformal(rot, 0.1, x3, y3), PreconditionError);
  CHECK_THROWS_AS(spray_conformal(rad, 0.2, x, y), PreconditionError);
}

TEST_CASE("three-way spray agreement and homogeneity") {
  for (const char* name : {"riemannian", "randers-radial", "randers-radial-3d", "randers-rotational",
                           "navigation-randers", "bao-robles-shen", "thm-randers", "thm-riemannian", "thm-berwald"}) {
    CAPTURE(name);
    const auto inst = th::builtin(name);
    Sampler sampler(inst, 4242);
    for (int k = 0; k < 100; ++k) {
      const Sample s = sampler.next();
      const auto gd = spray_definitional(inst, s.x, s.y).G;
      const double scale = std::max(gd.cwiseAbs().maxCoeff(), 1e-12);
      const auto gg = spray_general(inst, s.x, s.y).G;
      CHECK((gg - gd).cwiseAbs().maxCoeff() / scale < 1e-8);
      const auto fit = conformal_fit(inst, s.x);
      if (fit.is_conformal_closed) {
        const auto gc = spray_conformal(inst, fit.c, s.x, s.y);
        CHECK((gc.G - gd).cwiseAbs().maxCoeff() / scale < 1e-8);
        REQUIRE(gc.y_coefficient.has_value());
      }
      if (k < 20)
        for (double lam : {0.5, 2.0}) {
          const auto gl = spray_general(inst, s.x, s.y.scaled(lam)).G;
          CHECK((gl - lam * lam * gg).cwiseAbs().maxCoeff() / (lam * lam * scale) < 1e-12);
        }
    }
  }
}
