#include "finsler/classify.hpp"
#include "finsler/regularity.hpp"
#include "helpers.hpp"

using namespace finsler;
using U = UnivariateFunction;

TEST_CASE("phi = 1 + s") {
  const auto phi = make_phi("randers", th::json::object()).with_b0(INFINITY);
  const auto ok = check_regularity(phi, 1.0, 3);
  CHECK(ok.pass);
  CHECK(ok.violations.empty());
  CHECK(ok.b0_estimate == 1.0);

  const auto bad = check_regularity(phi, 1.2, 3);
  CHECK_FALSE(bad.pass);
  CHECK(bad.violation_count > 0);
  CHECK(bad.b0_estimate == doctest::Approx(1.0).epsilon(0.01));
  CHECK(bad.b0_estimate <= bad.b0_estimate_coarse);

  const auto w = check_point(phi, 1.21, -1.1, 3);
  REQUIRE(w.size() == 1);
  CHECK(w[0].inequality == "phi");
  CHECK(w[0].value == doctest::Approx(-0.1).epsilon(1e-12));
}

TEST_CASE("navigation and Riemannian families pass") {
  CHECK(check_regularity(navigation_randers_phi(), 1.0, 3, 32).pass);
  const auto riem = family_riemannian(U::constant(1 / std::sqrt(2.0)), U::constant(0.0), U::constant(2.0));
  const auto r = check_regularity(riem, 0.6, 3);
  CHECK(r.pass);
  CHECK_FALSE(r.singular);
}

TEST_CASE("Kropina is flagged singular") {
  const auto kr = family_kropina(U::constant(1.0));
  const auto r = check_regularity(kr, 0.5, 3);
  CHECK(r.singular);
  CHECK_FALSE(r.pass);
  bool nonpositive_s = false;
  for (const auto& v : r.violations) nonpositive_s = nonpositive_s || v.s <= 0.0;
  CHECK(nonpositive_s);
}

TEST_CASE("dimension modes and argument checks") {
  // phi = 1 + s^2 - s^4 / 2: phi - s phi_2 changes sign only for large s
  const auto phi = make_phi("expr", {{"expr", {{"op", "sub"}, {"args", {{{"op", "add"}, {"args", {1, {{"op", "pow"}, {"args", {"s", 2}}}}}}, {{"op", "mul"}, {"args", {0.5, {{"op", "pow"}, {"args", {"s", 4}}}}}}}}}}});
  const auto n3 = check_regularity(phi, 1.5, 3, 16);
  const auto n2 = check_regularity(phi, 1.5, 2, 16);
  CHECK(n2.dimension_mode == "n=2");
  CHECK(n3.dimension_mode == "n>=3");
  CHECK(n2.violation_count <= n3.violation_count);
  for (const auto& v : n2.violations) CHECK(v.inequality != "phi-s*phi2");
  CHECK_THROWS_AS(check_regularity(phi, 1.0, 3, 4), std::invalid_argument);
  CHECK_THROWS_AS(check_regularity(phi, -1.0, 3), std::invalid_argument);
}

TEST_CASE("evaluation failures become violations") {
  const auto phi = make_phi("expr", {{"expr", {{"op", "sqrt"}, {"args", {{{"op", "sub"}, {"args", {0.25, "b2"}}}}}}}});
  const auto r = check_regularity(phi, 1.0, 3, 16);
  CHECK_FALSE(r.pass);
  bool eval = false;
  for (const auto& v : r.violations) eval = eval || v.inequality == "evaluation";
  CHECK(eval);
}
