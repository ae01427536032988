#include <random>

#include "finsler/diffops.hpp"
#include "finsler/geometry.hpp"
#include "finsler/jet.hpp"
#include "helpers.hpp"

using namespace finsler;

TEST_CASE("finite-difference oracle on elementary functions") {
  const std::vector<double> one{1.0}, zero{0.0};
  const std::vector<int> o3{3}, o1{1};
  CHECK(std::abs(fd_deriv([](std::span<const double> t) { return t[0] * t[0] * t[0]; }, one, o3) - 6.0) < 1e-4);
  CHECK(std::abs(fd_deriv([](std::span<const double> t) { return std::exp(t[0]); }, zero, o1) - 1.0) < 1e-9);
}

TEST_CASE("jets: Leibniz and chain rule on polynomials") {
  auto sp = JetSpace::uniform(2, 4);
  const Jet x = Jet::variable(sp, 0, 0.7), y = Jet::variable(sp, 1, -0.3);
  const Jet f = x * x * y + 2.0 * y, g = 1.0 + x * y * y;
  const Jet fg = f * g;
  // d/dx (f g) = f_x g + f g_x
  const double fx = 2 * 0.7 * -0.3, gx = 0.09;
  const double fv = 0.49 * -0.3 - 0.6, gv = 1.0 + 0.7 * 0.09;
  CHECK(fg.derivative({1, 0}) == doctest::Approx(fx * gv + fv * gx).epsilon(1e-14));
  // d^2/dx dy (x^2 y + 2y) = 2x
  CHECK(f.derivative({1, 1}) == doctest::Approx(1.4).epsilon(1e-14));
  // exp(log(g)) == g, sqrt(g)^2 == g
  const Jet h = exp(log(g)) - g, r = sqrt(g) * sqrt(g) - g;
  for (double c : h.coefficients()) CHECK(std::abs(c) < 1e-14);
  for (double c : r.coefficients()) CHECK(std::abs(c) < 1e-14);
  // (x^3)''' = 6 through pow
  auto s1 = JetSpace::uniform(1, 3);
  CHECK(pow(Jet::variable(s1, 0, 1.0), 3.0).derivative({3}) == doctest::Approx(6.0).epsilon(1e-13));
  CHECK_THROWS(1.0 / Jet::variable(s1, 0, 0.0));
}

TEST_CASE("y-derivatives of alpha^2 and alpha") {
  const std::vector<double> x{0.2, 0.3}, y{1.0, 0.0};
  JetField a2 = [](std::span<const Jet>, std::span<const Jet> yy) { return yy[0] * yy[0] + yy[1] * yy[1]; };
  JetField al = [&](std::span<const Jet> xx, std::span<const Jet> yy) { return sqrt(a2(xx, yy)); };
  const std::vector<int> d11{2, 0}, d3{2, 1}, d22{0, 2};
  CHECK(deriv_y(a2, x, y, d11).value == doctest::Approx(2.0));
  CHECK(std::abs(deriv_y(a2, x, y, d3).value) < 1e-15);
  CHECK(deriv_y(al, x, y, d22).value == doctest::Approx(1.0).epsilon(1e-14));
  CHECK_FALSE(deriv_y(al, x, y, d22).used_fd);
  PlainField plain = [](std::span<const double>, std::span<const double> yy) {
    return std::sqrt(yy[0] * yy[0] + yy[1] * yy[1]);
  };
  const auto r = deriv_y(plain, x, y, d22);
  CHECK(r.used_fd);
  CHECK(std::abs(r.value - 1.0) < 1e-5);
}

TEST_CASE("x-derivatives: independent field and conformal metric") {
  const std::vector<double> x{0.2, 0.3}, y{0.5, -1.0};
  JetField flat = [](std::span<const Jet>, std::span<const Jet> yy) { return yy[0] * yy[1]; };
  CHECK(deriv_x(flat, x, y, 0).value == 0.0);

  const auto alpha = make_alpha("conformal", {{"linear", {0.3, -0.2}}, {"quadratic", {0.1, 0.05}}}, 2);
  JetField quad = [&](std::span<const Jet> xx, std::span<const Jet> yy) { return quadratic_form(alpha.at(xx), yy); };
  const auto da = alpha.derivative(Point{0.2, 0.3});
  for (int k = 0; k < 2; ++k) {
    double expect = 0.0;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) expect += da[k](i, j) * y[i] * y[j];
    CHECK(th::rel(deriv_x(quad, x, y, k).value, expect) < 1e-12);
    PlainField plain = [&](std::span<const double> xx, std::span<const double> yy) {
      std::vector<Jet> xj(xx.begin(), xx.end()), yj(yy.begin(), yy.end());
      return quad(xj, yj).value();
    };
    CHECK(std::abs(deriv_x(plain, x, y, k).value - expect) / (1 + std::abs(expect)) < 1e-6);
  }
}

TEST_CASE("phi jets against finite differences up to order 3") {
  const auto inst = th::builtin("thm-randers");
  for (const PhiFunction& phi : {inst.phi, make_phi("randers", th::json::object()), navigation_randers_phi()}) {
    CAPTURE(phi.family());
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> ub(0.2, 0.5), us(-0.6, 0.6);
    for (int k = 0; k < 50; ++k) {
      const double b = ub(rng), s = us(rng) * b;
      const PhiJet jet(phi, b * b, s, 3);
      auto f = [&](std::span<const double> p) { return phi(p[0], p[1]); };
      const std::vector<double> pt{b * b, s};
      for (int i = 0; i <= 3; ++i)
        for (int j = 0; i + j <= 3; ++j) {
          if (i + j == 0) continue;
          const std::vector<int> ord{i, j};
          FDConfig cfg;
          cfg.step = 1e-4;
          cfg.step_high_order = 2e-3;
          const double fd = fd_deriv(f, pt, ord, cfg);
          const double ad = jet.partial(i, j);
          CHECK(std::abs(fd - ad) / (1 + std::abs(ad)) < (i + j >= 3 ? 1e-4 : 1e-5));
        }
    }
  }
  const PhiJet rj(make_phi("randers", th::json::object()), 0.04, 0.1, 2);
  CHECK(rj.d2() == doctest::Approx(1.0));
  CHECK(std::abs(rj.d22()) < 1e-15);
}
