#include "finsler/berwald.hpp"
#include "finsler/beta_calculus.hpp"
#include "finsler/classify.hpp"
#include "finsler/sampling.hpp"
#include "helpers.hpp"

using namespace finsler;

TEST_CASE("Riemannian and trivial cases have vanishing B") {
  const auto riem = th::builtin("riemannian");
  Sampler sr(riem, 3);
  for (int k = 0; k < 10; ++k) {
    const Sample s = sr.next();
    CHECK(berwald_oracle(riem, s.x, s.y).max_abs() < 1e-10);
  }
  for (const char* phi : {"randers", "thm-randers", "navigation-randers"}) {
    CAPTURE(phi);
    const auto inst = th::make(3, th::block("euclidean"), th::block("constant", {{"b", {0.1, -0.05, 0.2}}}),
                               th::block(phi, phi == std::string("thm-randers") ? th::json{{"rho", 0.3}} : th::json::object()));
    Sampler sc(inst, 4);
    for (int k = 0; k < 10; ++k) {
      const Sample s = sc.next();
      CHECK(berwald_oracle(inst, s.x, s.y).max_abs() < 1e-9);
      CHECK(berwald_closed_form(inst, 0.0, s.x, s.y).max_abs() == 0.0);
    }
  }
}

TEST_CASE("closed form against the oracle, n = 2 example") {
  const auto inst = th::radial(2, "randers");
  const Point x{1.0, 0.0};
  const Direction y{0.0, 1.0};
  const auto bo = berwald_oracle(inst, x, y);
  const auto bc = berwald_closed_form(inst, 0.1, x, y);
  CHECK(max_abs_diff(bo, bc) < 1e-7);
  CHECK(bo.max_abs() > 1e-3);
  CHECK(bc.symmetry_defect() == 0.0);
  const auto b2 = berwald_closed_form(inst, 0.1, x, y.scaled(2.0));
  for (std::size_t i = 0; i < bc.data().size(); ++i) CHECK(std::abs(b2.data()[i] - 0.5 * bc.data()[i]) < 1e-14);
}

TEST_CASE("closed form with Berwald-type E, H vanishes term by term") {
  EHScalars eh;
  eh.E = 0.0;
  eh.H = 0.25;
  const Eigen::MatrixXd a = Eigen::MatrixXd::Identity(3, 3);
  const Eigen::VectorXd b = Eigen::Vector3d(0.1, 0.2, 0.0);
  const std::vector<double> y{0.3, 0.5, 1.0};
  CHECK(berwald_closed_form(eh, 0.1, a, b, y).max_abs() == 0.0);
}

TEST_CASE("oracle over closed conformal instances, n = 2 and 3") {
  for (const char* name : {"randers-radial", "randers-radial-3d", "thm-randers", "thm-riemannian"}) {
    CAPTURE(name);
    const auto inst = th::builtin(name);
    Sampler sampler(inst, 77);
    for (int k = 0; k < 50; ++k) {
      const Sample s = sampler.next();
      const auto fit = conformal_fit(inst, s.x);
      REQUIRE(fit.is_conformal_closed);
      const auto bo = berwald_oracle(inst, s.x, s.y);
      CHECK(max_abs_diff(bo, berwald_closed_form(inst, fit.c, s.x, s.y)) < 1e-7);
      CHECK(bo.symmetry_defect() < 1e-9);
      CHECK(bo.y_contraction(s.y.values()) < 1e-8);
      if (k < 10) CHECK(max_abs_diff(bo, berwald_oracle(inst, s.x, s.y, SprayPath::General)) < 1e-7);
    }
  }
  CHECK_THROWS_AS(berwald_closed_form(th::builtin("randers-rotational"), 0.1, Point{1, 1, 1}, Direction{1, 0, 0}),
                  PreconditionError);
}

TEST_CASE("F jets: closed form against AD") {
  const auto one = th::make(2, th::block("euclidean"), th::block("radial"), th::block("riemannian"));
  const auto fj = f_jets_closed(one, Point{0.4, 0.3}, Direction{1.0, 0.0});
  CHECK(fj.Fyy(1, 1) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(std::abs(fj.Fyy(0, 0)) < 1e-15);

  for (const char* name : {"randers-radial-3d", "thm-randers", "thm-berwald"}) {
    CAPTURE(name);
    const auto inst = th::builtin(name);
    Sampler sampler(inst, 12);
    for (int k = 0; k < 20; ++k) {
      const Sample s = sampler.next();
      const auto c = f_jets_closed(inst, s.x, s.y), a = f_jets_ad(inst, s.x, s.y);
      const double scale = 1.0 + a.Fyy.cwiseAbs().maxCoeff();
      CHECK((c.Fyy - a.Fyy).cwiseAbs().maxCoeff() / scale < 1e-8);
      for (std::size_t i = 0; i < c.Fyyy.size(); ++i) CHECK(std::abs(c.Fyyy[i] - a.Fyyy[i]) / scale < 1e-8);
      Eigen::Map<const Eigen::VectorXd> y(s.y.values().data(), inst.dim);
      CHECK((c.Fyy * y).cwiseAbs().maxCoeff() / scale < 1e-12);
    }
  }
}

TEST_CASE("isotropic fit") {
  const auto riem = th::builtin("thm-riemannian");
  Sampler sr(riem, 1);
  const Point xr{0.7, 0.8, 0.9};
  const auto fr = isotropic_fit(riem, xr, sr.directions(xr, 6));
  CHECK(fr.is_berwald);
  CHECK(fr.is_isotropic);
  CHECK(std::abs(fr.tau) < 1e-7);

  const auto rnd = th::builtin("thm-randers");
  Sampler sa(rnd, 2);
  for (int k = 0; k < 5; ++k) {
    const Point x = sa.next().x;
    const auto f = isotropic_fit(rnd, x, sa.directions(x, 6));
    CHECK(f.is_isotropic);
    CHECK_FALSE(f.is_berwald);
    CHECK(std::abs(f.tau - 0.03) < 1e-7);
    const auto q = quadratic_spray_check(rnd, f.tau, x, sa.directions(x, 20));
    CHECK(q.pass);
  }

  const auto rot = th::builtin("randers-rotational");
  Sampler so(rot, 3);
  const Point xo{0.9, 1.2, 0.6};
  CHECK_FALSE(isotropic_fit(rot, xo, so.directions(xo, 6)).is_isotropic);

  const auto plain = th::builtin("randers-radial-3d");
  Sampler sp(plain, 4);
  const Point xp{0.9, 1.2, 0.6};
  CHECK_FALSE(isotropic_fit(plain, xp, sp.directions(xp, 6)).is_isotropic);
  CHECK_FALSE(quadratic_spray_check(plain, 0.0, xp, sp.directions(xp, 20)).pass);
}

TEST_CASE("Berwald metrics have quadratic sprays") {
  for (const char* name : {"thm-riemannian", "thm-berwald", "riemannian"}) {
    CAPTURE(name);
    const auto inst = th::builtin(name);
    Sampler sampler(inst, 9);
    const Point x = sampler.next().x;
    CHECK(isotropic_fit(inst, x, sampler.directions(x, 6)).is_berwald);
    CHECK(quadratic_spray_check(inst, 0.0, x, sampler.directions(x, 20)).pass);
  }
}
