#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "finsler/registry.hpp"
#include "finsler/sampling.hpp"
#include "finsler/verify.hpp"

namespace {

using nlohmann::json;
using namespace finsler;

constexpr int kExitOk = 0;
constexpr int kExitCheckFailure = 1;
constexpr int kExitInput = 2;

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep))
    if (!item.empty()) out.push_back(item);
  return out;
}

double parse_number(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == s.size() && std::isfinite(v)) return v;
  } catch (const std::exception&) {
  }
  throw InputError(what, "expected a number, got '" + s + "'");
}

// "b2=0.04,0.09,s=-0.1:0.1:5"
std::pair<std::vector<double>, std::vector<double>> parse_grid(const std::string& spec) {
  std::vector<double> b2, s;
  std::vector<double>* cur = nullptr;
  for (std::string tok : split(spec, ',')) {
    if (auto eq = tok.find('='); eq != std::string::npos) {
      const std::string key = tok.substr(0, eq);
      if (key == "b2")
        cur = &b2;
      else if (key == "s")
        cur = &s;
      else
        throw InputError("--grid", "unknown axis '" + key + "' (b2, s)");
      tok = tok.substr(eq + 1);
    }
    if (!cur) throw InputError("--grid", "values must follow 'b2=' or 's='");
    const auto parts = split(tok, ':');
    if (parts.size() == 1) {
      cur->push_back(parse_number(parts[0], "--grid"));
    } else if (parts.size() == 3) {
      const double lo = parse_number(parts[0], "--grid"), hi = parse_number(parts[1], "--grid");
      const double n = parse_number(parts[2], "--grid");
      if (n < 1 || n != std::floor(n)) throw InputError("--grid", "point count must be a positive integer");
      const int k = static_cast<int>(n);
      for (int i = 0; i < k; ++i) cur->push_back(k == 1 ? lo : lo + (hi - lo) * i / (k - 1));
    } else {
      throw InputError("--grid", "expected a number or lo:hi:n, got '" + tok + "'");
    }
  }
  if (b2.empty() || s.empty()) throw InputError("--grid", "both b2 and s need values");
  return {b2, s};
}

std::map<std::string, double> parse_tolerances(const std::vector<std::string>& items) {
  std::map<std::string, double> out;
  for (const auto& item : items) {
    for (const auto& kv : split(item, ',')) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw InputError("--tol", "expected name=value, got '" + kv + "'");
      out[kv.substr(0, eq)] = parse_number(kv.substr(eq + 1), "--tol");
    }
  }
  return out;
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw InputError("--out", "cannot write '" + path + "'");
  out << text;
}

InstanceSpec load(const std::string& file) {
  if (file.rfind("builtin:", 0) == 0) return parse_instance(builtin_instance(file.substr(8)));
  return load_instance_file(file);
}

void print_summary(const RunReport& rep) {
  for (const auto& c : rep.checks) {
    std::fprintf(stderr, "%-10s %s  residual=%.3e tol=%.1e%s%s\n", c.name.c_str(), c.pass ? "PASS" : "FAIL",
                 c.residual, c.tol, c.note.empty() ? "" : "  ", c.note.c_str());
  }
}

std::string fmt17(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical laboratory for (alpha, beta)-metrics with isotropic Berwald curvature", "finsler_lab"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));

  std::string file, out;
  bool no_timestamp = false;
  std::uint64_t seed = default_seed();
  int samples = 50;

  auto* inspect = app.add_subcommand("inspect", "Summarize an instance: ranges, conformal fit, regularity");
  inspect->add_option("instance", file, "Instance file (or builtin:<name>)")->required();
  inspect->add_option("--samples", samples, "Number of seeded samples");
  inspect->add_option("--seed", seed, "Sampling seed (default FINSLER_LAB_SEED or 12345)");
  inspect->add_option("--out", out, "Write the JSON report here");
  inspect->add_flag("--no-timestamp", no_timestamp, "Omit timing from the report");

  std::string checks;
  std::vector<std::string> tols;
  int grid_density = 64;
  auto* verify = app.add_subcommand("verify", "Run check suites; exit 0 iff all pass");
  verify->add_option("instance", file, "Instance file (or builtin:<name>)")->required();
  verify->add_option("--checks", checks, "Comma list of spray,berwald,isotropic,lemma41,pde,regularity");
  verify->add_option("--samples", samples, "Random (x, y) samples");
  verify->add_option("--seed", seed, "Sampling seed (default FINSLER_LAB_SEED or 12345)");
  verify->add_option("--tol", tols, "Tolerance overrides: check=value or check.entry=value");
  verify->add_option("--grid-density", grid_density, "Regularity grid points per unit b");
  verify->add_option("--out", out, "Write the JSON report here");
  verify->add_flag("--no-timestamp", no_timestamp, "Omit timing from the report");

  std::string quantities = "E", grid = "b2=0.04,s=0:0.2:5";
  auto* sweep = app.add_subcommand("sweep", "Tabulate E, H, phi or residuals over a (b2, s) grid as CSV");
  sweep->add_option("instance", file, "Instance file (or builtin:<name>)")->required();
  sweep->add_option("--quantity", quantities, "Comma list: phi, E, H, residual:<eq>");
  sweep->add_option("--grid", grid, "Grid, e.g. b2=0.04,0.09,s=-0.1:0.1:5");
  sweep->add_option("--out", out, "CSV file (default stdout)");

  std::string family, params_text = "{}";
  double c = 0.1;
  int dim = 3;
  auto* fam = app.add_subcommand("family", "Emit an instance file for a classification family");
  fam->add_option("--family", family, "thm-randers, thm-kropina, thm-riemannian or thm-berwald")->required();
  fam->add_option("--params", params_text, "Family parameters as JSON");
  fam->add_option("--c", c, "Radial one-form coefficient");
  fam->add_option("--dim", dim, "Dimension");
  fam->add_option("--emit", out, "Instance file to write (default stdout)");

  std::string builtin_name;
  auto* builtin = app.add_subcommand("builtin", "List the built-in instances or print one as an instance file");
  builtin->add_option("name", builtin_name, "Instance name");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  }

  try {
    if (*inspect) {
      const auto spec = load(file);
      const RunReport rep = inspect_instance(spec, seed, samples);
      write_output(out, rep.to_json(!no_timestamp).dump(2) + "\n");
      return kExitOk;
    }
    if (*verify) {
      const auto spec = load(file);
      VerifyOptions opts;
      opts.checks = split(checks, ',');
      opts.samples = samples;
      opts.seed = seed;
      opts.tol = parse_tolerances(tols);
      opts.grid_density = grid_density;
      const RunReport rep = verify_instance(spec, opts);
      print_summary(rep);
      write_output(out, rep.to_json(!no_timestamp).dump(2) + "\n");
      return rep.all_pass() ? kExitOk : kExitCheckFailure;
    }
    if (*sweep) {
      const auto spec = load(file);
      std::vector<SweepQuantity> qs;
      for (const auto& q : split(quantities, ',')) qs.emplace_back(spec.instance.phi, q);
      if (qs.empty()) throw InputError("--quantity", "no quantity given");
      const auto [b2s, ss] = parse_grid(grid);
      std::ostringstream csv;
      csv << "b2,s";
      if (qs.size() == 1)
        csv << ",value";
      else
        for (const auto& q : qs) csv << "," << q.name();
      csv << "\n";
      int failed = 0;
      for (double b2 : b2s)
        for (double s : ss) {
          csv << fmt17(b2) << "," << fmt17(s);
          for (const auto& q : qs) {
            const double v = q(b2, s);
            failed += std::isnan(v);
            csv << "," << fmt17(v);
          }
          csv << "\n";
        }
      if (failed) std::fprintf(stderr, "warning: %d value(s) could not be evaluated (written as nan)\n", failed);
      write_output(out, csv.str());
      return kExitOk;
    }
    if (*fam) {
      const json params = parse_json_text(params_text, "--params");
      if (!params.is_object()) throw InputError("--params", "expected a JSON object");
      const json inst = family_instance_json(family, params, c, dim);
      const auto spec = parse_instance(inst);
      if (spec.instance.phi.singular())
        std::fprintf(stderr, "note: %s is singular; checks use grids with s > 0\n", family.c_str());
      write_output(out, inst.dump(2) + "\n");
      return kExitOk;
    }
    if (*builtin) {
      if (builtin_name.empty()) {
        for (const auto& n : builtin_instance_names()) std::cout << n << "\n";
      } else {
        std::cout << builtin_instance(builtin_name).dump(2) << "\n";
      }
      return kExitOk;
    }
  } catch (const InputError& e) {
    std::fprintf(stderr, "input error: %s\n", e.what());
    return kExitInput;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "input error: %s\n", e.what());
    return kExitInput;
  } catch (const finsler::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitInput;
  }
  return kExitInput;
}
