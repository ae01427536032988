#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "finsler/berwald.hpp"
#include "finsler/beta_calculus.hpp"
#include "finsler/regularity.hpp"
#include "finsler/registry.hpp"
#include "finsler/sampling.hpp"
#include "finsler/spray.hpp"
#include "finsler/verify.hpp"

namespace py = pybind11;
using namespace finsler;
using nlohmann::json;

namespace {

InstanceSpec load(const std::string& text) { return parse_instance(parse_json_text(text, "<python>")); }

Point point(const std::vector<double>& v) { return Point(v); }
Direction direction(const std::vector<double>& v) { return Direction(v); }

Eigen::VectorXd spray(const InstanceSpec& s, const std::vector<double>& x, const std::vector<double>& y,
                      const std::string& method) {
  if (method == "definitional") return spray_definitional(s.instance, point(x), direction(y)).G;
  if (method == "general") return spray_general(s.instance, point(x), direction(y)).G;
  if (method == "conformal") return spray_conformal(s.instance, point(x), direction(y)).G;
  throw py::value_error("unknown spray method: " + method);
}

// B_j^i_kl as nested lists [j][i][k][l]
py::list berwald(const InstanceSpec& s, const std::vector<double>& x, const std::vector<double>& y,
                 const std::string& method) {
  BerwaldTensor b;
  if (method == "oracle") {
    b = berwald_oracle(s.instance, point(x), direction(y));
  } else if (method == "closed-form") {
    const auto fit = conformal_fit(s.instance, point(x));
    if (!fit.is_conformal_closed) throw py::value_error("beta is not closed conformal at x");
    b = berwald_closed_form(s.instance, fit.c, point(x), direction(y));
  } else {
    throw py::value_error("unknown berwald method: " + method);
  }
  const int n = b.dim();
  py::list out;
  for (int j = 0; j < n; ++j) {
    py::list lj;
    for (int i = 0; i < n; ++i) {
      py::list li;
      for (int k = 0; k < n; ++k) {
        py::list lk;
        for (int l = 0; l < n; ++l) lk.append(b(j, i, k, l));
        li.append(lk);
      }
      lj.append(li);
    }
    out.append(lj);
  }
  return out;
}

std::string verify(const InstanceSpec& s, std::vector<std::string> checks, int samples, std::uint64_t seed,
                   std::map<std::string, double> tol) {
  VerifyOptions o;
  if (!checks.empty()) o.checks = std::move(checks);
  o.samples = samples;
  o.seed = seed;
  o.tol = std::move(tol);
  return verify_instance(s, o).to_json(false).dump();
}

std::string regularity(const InstanceSpec& s, double b0_probe, int grid_density) {
  const auto r = check_regularity(s.instance.phi, b0_probe, s.instance.dim, grid_density);
  json v = json::array();
  for (const auto& x : r.violations)
    v.push_back({{"b2", x.b2}, {"s", x.s}, {"inequality", x.inequality}, {"value", x.value}, {"message", x.message}});
  return json{{"pass", r.pass},
              {"singular", r.singular},
              {"dimension_mode", r.dimension_mode},
              {"b0_probe", r.b0_probe},
              {"b0_estimate", r.b0_estimate},
              {"violation_count", r.violation_count},
              {"violations", v}}
      .dump();
}

std::vector<double> sweep(const InstanceSpec& s, const std::string& quantity, const std::vector<double>& b2,
                          const std::vector<double>& sv) {
  if (b2.size() != sv.size()) throw py::value_error("b2 and s must have equal length");
  const SweepQuantity q(s.instance.phi, quantity);
  std::vector<double> out(b2.size());
  for (std::size_t k = 0; k < b2.size(); ++k) out[k] = q(b2[k], sv[k]);
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "(alpha, beta)-metric toolkit";
  m.attr("tool_version") = kToolVersion;
  m.attr("default_seed") = kDefaultSeed;

  auto base = py::register_exception<Error>(m, "FinslerError", PyExc_RuntimeError);
  py::register_exception<InputError>(m, "InputError", base.ptr());
  py::register_exception<DomainError>(m, "DomainError", base.ptr());

  py::class_<InstanceSpec>(m, "Instance")
      .def_property_readonly("name", [](const InstanceSpec& s) { return s.instance.name; })
      .def_property_readonly("dim", [](const InstanceSpec& s) { return s.instance.dim; })
      .def_property_readonly("b0", [](const InstanceSpec& s) { return s.b0; })
      .def_property_readonly("source", [](const InstanceSpec& s) { return s.source.dump(); })
      .def("F", [](const InstanceSpec& s, const std::vector<double>& x,
                   const std::vector<double>& y) { return eval_F(s.instance, point(x), direction(y)); })
      .def("b2", [](const InstanceSpec& s, const std::vector<double>& x) { return compute_b2(s.instance, point(x)); })
      .def("s", [](const InstanceSpec& s, const std::vector<double>& x,
                   const std::vector<double>& y) { return compute_s(s.instance, point(x), direction(y)); })
      .def("g", [](const InstanceSpec& s, const std::vector<double>& x, const std::vector<double>& y) {
        return Eigen::MatrixXd(fundamental_tensor(s.instance, point(x), direction(y)).g);
      })
      .def("spray", &spray, py::arg("x"), py::arg("y"), py::arg("method") = "general")
      .def("berwald", &berwald, py::arg("x"), py::arg("y"), py::arg("method") = "oracle")
      .def("samples", [](const InstanceSpec& s, int count, std::uint64_t seed) {
        Sampler sampler(s.instance, seed);
        std::vector<std::pair<std::vector<double>, std::vector<double>>> out;
        for (const auto& p : sampler.draw(count))
          out.emplace_back(std::vector<double>(p.x.values().begin(), p.x.values().end()),
                           std::vector<double>(p.y.values().begin(), p.y.values().end()));
        return out;
      }, py::arg("count"), py::arg("seed") = kDefaultSeed);

  m.def("parse_instance", &load, py::arg("text"));
  m.def("builtin_names", &builtin_instance_names);
  m.def("builtin_json", [](const std::string& name) { return builtin_instance(name).dump(); });
  m.def("family_json", [](const std::string& family, const std::string& params, double c, int dim) {
    return family_instance_json(family, parse_json_text(params, "<params>"), c, dim).dump();
  });
  m.def("check_names", &check_names);
  m.def("verify", &verify, py::arg("instance"), py::arg("checks") = std::vector<std::string>{},
        py::arg("samples") = 50, py::arg("seed") = kDefaultSeed, py::arg("tol") = std::map<std::string, double>{});
  m.def("inspect", [](const InstanceSpec& s, int samples, std::uint64_t seed) {
    return inspect_instance(s, seed, samples).to_json(false).dump();
  }, py::arg("instance"), py::arg("samples") = 50, py::arg("seed") = kDefaultSeed);
  m.def("regularity", &regularity, py::arg("instance"), py::arg("b0_probe"), py::arg("grid_density") = 64);
  m.def("sweep", &sweep, py::arg("instance"), py::arg("quantity"), py::arg("b2"), py::arg("s"));
}
