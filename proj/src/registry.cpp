#include "finsler/registry.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "finsler/classify.hpp"

namespace finsler {

namespace {

using nlohmann::json;

double number(const json& p, const char* key, double fallback, const std::string& path) {
  if (!p.contains(key)) return fallback;
  if (!p.at(key).is_number()) throw InputError(path + "." + key, "expected a number");
  return p.at(key).get<double>();
}

std::vector<double> vec(const json& p, const char* key, int dim, const std::string& path, double fill) {
  if (!p.contains(key)) return std::vector<double>(dim, fill);
  const json& v = p.at(key);
  if (!v.is_array() || static_cast<int>(v.size()) != dim)
    throw InputError(path + "." + key, "expected an array of " + std::to_string(dim) + " numbers");
  std::vector<double> out;
  for (const auto& x : v) {
    if (!x.is_number()) throw InputError(path + "." + key, "expected numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

UnivariateFunction function_param(const json& p, const char* key, double fallback, const std::string& path) {
  if (!p.contains(key)) return UnivariateFunction::constant(fallback);
  try {
    return UnivariateFunction::from_json(p.at(key));
  } catch (const std::invalid_argument& e) {
    throw InputError(path + "." + key, e.what());
  }
}

Jet norm2(std::span<const Jet> x) {
  Jet r(0.0);
  for (const auto& v : x) r += v * v;
  return r;
}

// Expression trees: numbers, "b2", "s", or {"op": ..., "args": [...]}.
using Expr = std::function<Jet(const Jet&, const Jet&)>;

Expr compile_expr(const json& e, const std::string& path) {
  if (e.is_number()) {
    const double v = e.get<double>();
    return [v](const Jet&, const Jet&) { return Jet(v); };
  }
  if (e.is_string()) {
    const auto name = e.get<std::string>();
    if (name == "b2") return [](const Jet& b2, const Jet&) { return b2; };
    if (name == "s") return [](const Jet&, const Jet& s) { return s; };
    throw InputError(path, "unknown variable '" + name + "' (use \"b2\" or \"s\")");
  }
  if (!e.is_object() || !e.contains("op") || !e.at("op").is_string())
    throw InputError(path, "expected a number, \"b2\", \"s\" or {\"op\": ..., \"args\": [...]}");
  const auto op = e.at("op").get<std::string>();
  if (!e.contains("args") || !e.at("args").is_array()) throw InputError(path + ".args", "expected an array");
  std::vector<Expr> args;
  for (std::size_t i = 0; i < e.at("args").size(); ++i)
    args.push_back(compile_expr(e.at("args")[i], path + ".args[" + std::to_string(i) + "]"));
  auto arity = [&](std::size_t n) {
    if (args.size() != n) throw InputError(path + ".args", "'" + op + "' takes " + std::to_string(n) + " argument(s)");
  };
  if (op == "add" || op == "mul") {
    if (args.empty()) throw InputError(path + ".args", "'" + op + "' needs arguments");
    const bool add = op == "add";
    return [args, add](const Jet& b2, const Jet& s) {
      Jet r = args[0](b2, s);
      for (std::size_t i = 1; i < args.size(); ++i) r = add ? r + args[i](b2, s) : r * args[i](b2, s);
      return r;
    };
  }
  if (op == "sub" || op == "div") {
    arity(2);
    const bool sub = op == "sub";
    return [args, sub](const Jet& b2, const Jet& s) {
      return sub ? args[0](b2, s) - args[1](b2, s) : args[0](b2, s) / args[1](b2, s);
    };
  }
  if (op == "pow") {
    arity(2);
    if (!e.at("args")[1].is_number()) throw InputError(path + ".args[1]", "exponent must be a number");
    const double p = e.at("args")[1].get<double>();
    return [f = args[0], p](const Jet& b2, const Jet& s) { return pow(f(b2, s), p); };
  }
  using Unary = Jet (*)(const Jet&);
  static const std::map<std::string, Unary> unary = {
      {"sqrt", &finsler::sqrt}, {"exp", &finsler::exp}, {"log", &finsler::log}, {"sin", &finsler::sin},
      {"cos", &finsler::cos}};
  if (auto it = unary.find(op); it != unary.end()) {
    arity(1);
    return [f = args[0], g = it->second](const Jet& b2, const Jet& s) { return g(f(b2, s)); };
  }
  if (op == "neg") {
    arity(1);
    return [f = args[0]](const Jet& b2, const Jet& s) { return -f(b2, s); };
  }
  throw InputError(path + ".op", "unknown operator '" + op + "'");
}

std::string where(const std::string& base) { return base.empty() ? std::string("params") : base; }

}  // namespace

MetricField make_alpha(const std::string& family, const json& params, int dim) {
  const std::string path = "alpha.params";
  if (!params.is_object()) throw InputError(path, "expected an object");
  if (family == "euclidean") {
    return MetricField(family, params, dim, [dim](std::span<const Jet>) {
      JetMatrix a(dim);
      for (int i = 0; i < dim; ++i) a(i, i) = 1.0;
      return a;
    });
  }
  if (family == "conformal") {
    const double u0 = number(params, "u0", 0.0, path);
    const auto lin = vec(params, "linear", dim, path, 0.0);
    const auto quad = vec(params, "quadratic", dim, path, 0.0);
    return MetricField(family, params, dim, [dim, u0, lin, quad](std::span<const Jet> x) {
      Jet u(u0);
      for (int i = 0; i < dim; ++i) u += lin[i] * x[i] + quad[i] * x[i] * x[i];
      const Jet f = exp(2.0 * u);
      JetMatrix a(dim);
      for (int i = 0; i < dim; ++i) a(i, i) = f;
      return a;
    });
  }
  if (family == "brs") {
    const double eps = number(params, "eps", 0.2, path);
    return MetricField(family, params, dim, [dim, eps](std::span<const Jet> x) {
      const Jet d = 1.0 - eps * eps * norm2(x);
      if (!(d.value() > 0.0)) throw DomainError("brs alpha: requires eps^2 |x|^2 < 1");
      const Jet d2 = d * d;
      JetMatrix a(dim);
      for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) a(i, j) = (eps * eps * x[i] * x[j] + (i == j ? d : Jet(0.0))) / d2;
      return a;
    });
  }
  throw InputError("alpha.family", "unknown alpha family '" + family + "' (euclidean, conformal, brs)");
}

OneFormField make_beta(const std::string& family, const json& params, int dim) {
  const std::string path = "beta.params";
  if (!params.is_object()) throw InputError(path, "expected an object");
  if (family == "zero") {
    return OneFormField(family, params, dim, [dim](std::span<const Jet>) { return JetVector(dim, Jet(0.0)); });
  }
  if (family == "constant") {
    const auto b = vec(params, "b", dim, path, 0.0);
    return OneFormField(family, params, dim, [b](std::span<const Jet>) { return JetVector(b.begin(), b.end()); });
  }
  if (family == "radial") {
    const double c = number(params, "c", 0.1, path);
    return OneFormField(family, params, dim, [c](std::span<const Jet> x) {
      JetVector b;
      for (const auto& v : x) b.push_back(c * v);
      return b;
    });
  }
  if (family == "rotational") {
    const double c = number(params, "c", 0.1, path);
    return OneFormField(family, params, dim, [c, dim](std::span<const Jet> x) {
      JetVector b(dim, Jet(0.0));
      b[0] = -c * x[1];
      b[1] = c * x[0];
      return b;
    });
  }
  if (family == "brs") {
    const double eps = number(params, "eps", 0.2, path);
    return OneFormField(family, params, dim, [eps](std::span<const Jet> x) {
      const Jet d = 1.0 - eps * eps * norm2(x);
      if (!(d.value() > 0.0)) throw DomainError("brs beta: requires eps^2 |x|^2 < 1");
      JetVector b;
      for (const auto& v : x) b.push_back(-eps * v / d);
      return b;
    });
  }
  throw InputError("beta.family", "unknown beta family '" + family + "' (zero, constant, radial, rotational, brs)");
}

PhiFunction make_phi(const std::string& family, const json& params, std::optional<double> b0_ref) {
  const std::string path = "phi.params";
  if (!params.is_object()) throw InputError(path, "expected an object");
  try {
    if (family == "riemannian")
      return PhiFunction(family, params, [](const Jet&, const Jet&) { return Jet(1.0); });
    if (family == "randers")
      return PhiFunction(family, params, [](const Jet&, const Jet& s) { return 1.0 + s; }, 1.0);
    if (family == "navigation-randers") return navigation_randers_phi();
    if (family == "expr") {
      if (!params.contains("expr")) throw InputError(path + ".expr", "missing expression");
      Expr e = compile_expr(params.at("expr"), path + ".expr");
      const double b0 = number(params, "b0", std::numeric_limits<double>::infinity(), path);
      return PhiFunction(family, params, [e](const Jet& b2, const Jet& s) { return e(b2, s); }, b0);
    }
    if (family == "thm-randers")
      return family_randers(function_param(params, "k", 1.0, path), function_param(params, "t1", 0.0, path),
                            function_param(params, "sigma", 0.0, path), number(params, "rho", 0.0, path),
                            number(params, "probe_b", 0.6, path));
    if (family == "kropina" || family == "thm-kropina")
      return family_kropina(function_param(params, "a", 1.0, path), number(params, "rho", 0.0, path));
    if (family == "thm-riemannian")
      return family_riemannian(function_param(params, "t3", 1.0 / std::sqrt(2.0), path),
                               function_param(params, "t1", 0.0, path), function_param(params, "sigma", 0.0, path),
                               number(params, "probe_b", 0.6, path));
    if (family == "thm-berwald") {
      UnivariateFunction varphi = params.contains("varphi") ? function_param(params, "varphi", 1.0, path)
                                                           : UnivariateFunction::polynomial({1.0, 1.0});
      return family_berwald(function_param(params, "t2", 0.0, path), varphi,
                            b0_ref.value_or(number(params, "ref", 1.0, path)));
    }
  } catch (const DomainError& e) {
    throw InputError(where(path), e.what());
  }
  throw InputError("phi.family", "unknown phi family '" + family +
                                     "' (riemannian, randers, navigation-randers, kropina, expr, thm-randers, "
                                     "thm-kropina, thm-riemannian, thm-berwald)");
}

namespace {

const json& field(const json& j, const char* key, const std::string& path) {
  if (!j.contains(key)) throw InputError(path.empty() ? key : path + "." + key, "missing field");
  return j.at(key);
}

std::pair<std::string, json> family_block(const json& j, const char* key) {
  const json& b = field(j, key, "");
  if (!b.is_object()) throw InputError(key, "expected an object with 'family' and 'params'");
  const json& f = field(b, "family", key);
  if (!f.is_string()) throw InputError(std::string(key) + ".family", "expected a string");
  json params = b.value("params", json::object());
  return {f.get<std::string>(), params};
}

}  // namespace

InstanceSpec parse_instance(const json& j) {
  if (!j.is_object()) throw InputError("", "instance must be a JSON object");
  const json& d = field(j, "dim", "");
  if (!d.is_number_integer() || d.get<int>() < 2 || d.get<int>() > 4)
    throw InputError("dim", "expected an integer between 2 and 4");
  const int dim = d.get<int>();
  const auto [af, ap] = family_block(j, "alpha");
  const auto [bf, bp] = family_block(j, "beta");
  const auto [pf, pp] = family_block(j, "phi");
  if (bf == "rotational" && dim < 2) throw InputError("beta.family", "rotational needs dim >= 2");

  std::optional<double> b0;
  if (j.contains("b0") && !j.at("b0").is_null()) {
    if (!j.at("b0").is_number() || !(j.at("b0").get<double>() > 0.0))
      throw InputError("b0", "expected a positive number or null");
    b0 = j.at("b0").get<double>();
  }
  std::optional<double> b0_ref;
  const json& phi_block = j.at("phi");
  if (phi_block.contains("b0_ref")) {
    if (!phi_block.at("b0_ref").is_number() || !(phi_block.at("b0_ref").get<double>() > 0.0))
      throw InputError("phi.b0_ref", "expected a positive number");
    b0_ref = phi_block.at("b0_ref").get<double>();
  }

  MetricField alpha = make_alpha(af, ap, dim);
  OneFormField beta = make_beta(bf, bp, dim);
  PhiFunction phi = make_phi(pf, pp, b0_ref);
  if (b0) phi = phi.with_b0(std::min(*b0, phi.b0()));

  SampleBox box{std::vector<double>(dim, 0.5), std::vector<double>(dim, 1.5)};
  if (j.contains("sample_box")) {
    const json& sb = j.at("sample_box");
    if (!sb.is_object()) throw InputError("sample_box", "expected {\"lo\": [...], \"hi\": [...]}");
    box.lo = vec(sb, "lo", dim, "sample_box", 0.5);
    box.hi = vec(sb, "hi", dim, "sample_box", 1.5);
    for (int i = 0; i < dim; ++i)
      if (!(box.lo[i] <= box.hi[i])) throw InputError("sample_box", "lo must not exceed hi");
  }
  const std::string name = j.value("name", pf + "/" + af + "/" + bf);
  return InstanceSpec{j, MetricInstance(name, std::move(alpha), std::move(beta), std::move(phi)), box, b0};
}

json parse_json_text(const std::string& text, const std::string& origin) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    std::ostringstream os;
    os << origin << ":" << line << ":" << col << ": JSON syntax error: " << e.what();
    throw InputError("", os.str());
  }
}

InstanceSpec load_instance_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("", "cannot open instance file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_instance(parse_json_text(ss.str(), path));
}

json family_instance_json(const std::string& family, const json& params, double c, int dim) {
  json j;
  j["name"] = family + "-radial";
  j["dim"] = dim;
  j["alpha"] = {{"family", "euclidean"}, {"params", json::object()}};
  j["beta"] = {{"family", "radial"}, {"params", {{"c", c}}}};
  j["phi"] = {{"family", family}, {"params", params}};
  j["b0"] = nullptr;
  return j;
}

namespace {

json block(const char* family, json params = json::object()) { return {{"family", family}, {"params", params}}; }

const std::map<std::string, json>& builtins() {
  static const std::map<std::string, json> m = [] {
    std::map<std::string, json> r;
    auto add = [&r](const std::string& name, int dim, json alpha, json beta, json phi, json b0) {
      r[name] = {{"name", name}, {"dim", dim}, {"alpha", alpha}, {"beta", beta}, {"phi", phi}, {"b0", b0}};
    };
    add("riemannian", 3, block("conformal", {{"u0", 0.0}, {"linear", {0.1, -0.05, 0.02}}, {"quadratic", {0.03, 0.0, 0.01}}}),
        block("rotational", {{"c", 0.1}}), block("riemannian"), nullptr);
    add("randers-radial", 2, block("euclidean"), block("radial", {{"c", 0.1}}), block("randers"), 1.0);
    add("randers-radial-3d", 3, block("euclidean"), block("radial", {{"c", 0.1}}), block("randers"), 1.0);
    add("randers-rotational", 3, block("euclidean"), block("rotational", {{"c", 0.1}}), block("randers"), 1.0);
    add("navigation-randers", 3, block("conformal", {{"u0", 0.0}, {"linear", {0.1, 0.0, -0.05}}}),
        block("rotational", {{"c", 0.2}}), block("navigation-randers"), 1.0);
    add("bao-robles-shen", 3, block("brs", {{"eps", 0.2}}), block("brs", {{"eps", 0.2}}), block("randers"), 1.0);
    add("randers-constant", 3, block("euclidean"), block("constant", {{"b", {0.1, -0.05, 0.2}}}), block("randers"), 1.0);
    add("thm-randers", 3, block("euclidean"), block("radial", {{"c", 0.1}}),
        block("thm-randers", {{"k", {{"poly", {1.0, -0.72}}}}, {"t1", 0.0}, {"sigma", 0.0}, {"rho", 0.3}}), nullptr);
    add("thm-kropina", 3, block("euclidean"), block("radial", {{"c", 0.1}}), block("thm-kropina", {{"a", 1.0}}),
        nullptr);
    add("thm-riemannian", 3, block("euclidean"), block("radial", {{"c", 0.1}}),
        block("thm-riemannian", {{"t3", 1.0 / std::sqrt(2.0)}, {"t1", 0.0}, {"sigma", 2.0}}), nullptr);
    add("thm-berwald", 3, block("euclidean"), block("radial", {{"c", 0.1}}),
        block("thm-berwald", {{"t2", 0.5}, {"varphi", {{"poly", {1.0, 1.0}}}}}), nullptr);
    return r;
  }();
  return m;
}

}  // namespace

std::vector<std::string> builtin_instance_names() {
  std::vector<std::string> names;
  for (const auto& [k, v] : builtins()) names.push_back(k);
  return names;
}

json builtin_instance(const std::string& name) {
  auto it = builtins().find(name);
  if (it == builtins().end()) throw InputError("", "unknown built-in instance '" + name + "'");
  return it->second;
}

}  // namespace finsler
