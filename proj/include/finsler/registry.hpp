#pragma once

// Instance definition files and the built-in families.
//
//   {
//     "name": "randers-radial",                       (optional)
//     "dim": 2,
//     "alpha": {"family": "euclidean", "params": {}},
//     "beta":  {"family": "radial", "params": {"c": 0.1}},
//     "phi":   {"family": "randers", "params": {}, "b0_ref": 1.0},
//     "b0": 1.0,                                     (null or absent: infinite)
//     "sample_box": {"lo": [0.5, 0.5], "hi": [1.5, 1.5]}   (optional)
//   }
//
// alpha families: euclidean; conformal {u0, linear[n], quadratic[n]} with
//   a_ij = exp(2u) delta_ij, u = u0 + linear.x + sum quadratic_i x_i^2;
//   brs {eps}.
// beta families: zero; constant {b[n]}; radial {c}; rotational {c}; brs {eps}.
// phi families: riemannian; randers; navigation-randers; kropina {a, rho};
//   expr {expr}; thm-randers {k, t1, sigma, rho}; thm-kropina {a, rho};
//   thm-riemannian {t3, t1, sigma}; thm-berwald {t2, varphi, ref}.
// Scalar functions of b^2 are numbers, {"poly": [...]} or {"num": [...], "den": [...]}.

#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "finsler/errors.hpp"
#include "finsler/geometry.hpp"

namespace finsler {

/// Malformed input; `path` names the offending field ("phi.params.k").
class InputError : public Error {
 public:
  InputError(std::string path, const std::string& message)
      : Error(path.empty() ? message : path + ": " + message), path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

struct SampleBox {
  std::vector<double> lo, hi;
};

struct InstanceSpec {
  nlohmann::json source;
  MetricInstance instance;
  SampleBox box;
  std::optional<double> b0;  // nullopt: infinite
};

MetricField make_alpha(const std::string& family, const nlohmann::json& params, int dim);
OneFormField make_beta(const std::string& family, const nlohmann::json& params, int dim);
PhiFunction make_phi(const std::string& family, const nlohmann::json& params, std::optional<double> b0_ref = {});

/// Throws InputError with the field path.
InstanceSpec parse_instance(const nlohmann::json& j);
/// Throws InputError with line and column for syntax errors.
InstanceSpec load_instance_file(const std::string& path);
nlohmann::json parse_json_text(const std::string& text, const std::string& origin);

/// Instance file pairing a theorem-family phi with Euclidean alpha and the
/// radial closed conformal beta b_i = c x_i.
nlohmann::json family_instance_json(const std::string& family, const nlohmann::json& params, double c, int dim);

/// Named instance files shipped with the library.
std::vector<std::string> builtin_instance_names();
nlohmann::json builtin_instance(const std::string& name);

}  // namespace finsler
