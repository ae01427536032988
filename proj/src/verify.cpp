#include "finsler/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <future>
#include <set>
#include <stdexcept>

#include "finsler/berwald.hpp"
#include "finsler/beta_calculus.hpp"
#include "finsler/regularity.hpp"
#include "finsler/sampling.hpp"
#include "finsler/spray.hpp"

namespace finsler {

using nlohmann::json;

const std::vector<std::string>& check_names() {
  static const std::vector<std::string> names = {"spray", "berwald", "isotropic", "lemma41", "pde", "regularity"};
  return names;
}

namespace {

class Acc {
 public:
  Acc(std::string name, double tol) : name_(std::move(name)), tol_(tol) {}
  void add(double v) {
    if (!std::isfinite(v)) v = std::numeric_limits<double>::infinity();
    max_ = std::max(max_, v);
    sumsq_ += v * v;
    ++n_;
  }
  void skip(const std::exception& e) {
    if (skipped_++ == 0) note_ = e.what();
  }
  ResidualEntry done() const {
    ResidualEntry r;
    r.name = name_;
    r.max_abs = max_;
    r.rms = n_ ? std::sqrt(sumsq_ / n_) : 0.0;
    r.tol = tol_;
    r.points = n_;
    r.skipped = skipped_;
    r.note = note_;
    r.pass = n_ > 0 && skipped_ == 0 && max_ < tol_;
    return r;
  }

 private:
  std::string name_;
  double tol_, max_ = 0.0, sumsq_ = 0.0;
  int n_ = 0, skipped_ = 0;
  std::string note_;
};

double inf_norm(const Eigen::VectorXd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

double y_scale(const Direction& y) {
  double m = 0.0;
  for (double v : y.values()) m = std::max(m, std::abs(v));
  return m * m;
}

struct Context {
  const InstanceSpec& spec;
  const std::vector<Sample>& samples;
  const std::vector<std::vector<Direction>>& fans;  // direction fans at the first few sample points
  const VerifyOptions& opts;
};

CheckResult named(std::string name) {
  CheckResult r;
  r.name = std::move(name);
  return r;
}

void summarize(CheckResult& r) {
  if (r.entries.empty()) return;
  r.pass = true;
  double worst = -1.0;
  for (const auto& e : r.entries) {
    r.pass = r.pass && e.pass;
    const double ratio = e.skipped ? std::numeric_limits<double>::infinity() : e.max_abs / e.tol;
    if (ratio > worst) {
      worst = ratio;
      r.residual = e.max_abs;
      r.tol = e.tol;
    }
    if (r.note.empty() && !e.note.empty()) r.note = e.name + ": " + e.note;
  }
}

CheckResult check_spray(const Context& ctx) {
  const MetricInstance& inst = ctx.spec.instance;
  Acc general("general-vs-definitional", 1e-8), conformal("conformal-vs-definitional", 1e-8),
      homog("G-homogeneity", 1e-8);
  int conformal_points = 0;
  for (const auto& smp : ctx.samples) {
    try {
      const auto gd = spray_definitional(inst, smp.x, smp.y).G;
      const double denom = std::max(inf_norm(gd), 1e-8 * y_scale(smp.y));
      const auto gg = spray_general(inst, smp.x, smp.y).G;
      general.add(inf_norm(gg - gd) / denom);
      const auto g2 = spray_general(inst, smp.x, smp.y.scaled(1.7)).G;
      homog.add(inf_norm(g2 - 1.7 * 1.7 * gg) / (1.7 * 1.7 * denom));
      const ConformalFit fit = conformal_fit(inst, smp.x);
      if (fit.is_conformal_closed) {
        ++conformal_points;
        conformal.add(inf_norm(spray_conformal(inst, fit.c, smp.x, smp.y).G - gd) / denom);
      }
    } catch (const Error& e) {
      general.skip(e);
    }
  }
  CheckResult r = named("spray");
  r.entries = {general.done(), homog.done()};
  if (conformal_points) r.entries.push_back(conformal.done());
  r.details["conformal_points"] = conformal_points;
  return r;
}

CheckResult check_berwald(const Context& ctx) {
  const MetricInstance& inst = ctx.spec.instance;
  Acc closed("closed-form-vs-oracle", 1e-7), sym("symmetry", 1e-9), contr("y-contraction", 1e-8);
  int conformal_points = 0;
  double bmax = 0.0;
  for (const auto& smp : ctx.samples) {
    try {
      const BerwaldTensor b = berwald_oracle(inst, smp.x, smp.y, SprayPath::Definitional);
      const double scale = 1.0 + b.max_abs();
      bmax = std::max(bmax, b.max_abs());
      sym.add(b.symmetry_defect() / scale);
      contr.add(b.y_contraction(smp.y.values()) / scale);
      const ConformalFit fit = conformal_fit(inst, smp.x);
      if (fit.is_conformal_closed) {
        ++conformal_points;
        closed.add(max_abs_diff(berwald_closed_form(inst, fit.c, smp.x, smp.y), b));
      }
    } catch (const Error& e) {
      sym.skip(e);
    }
  }
  CheckResult r = named("berwald");
  r.entries = {sym.done(), contr.done()};
  if (conformal_points) r.entries.push_back(closed.done());
  r.details["conformal_points"] = conformal_points;
  r.details["max_abs_B"] = bmax;
  r.details["is_berwald"] = bmax < kIsotropicTolerance;
  return r;
}

CheckResult check_isotropic(const Context& ctx) {
  const MetricInstance& inst = ctx.spec.instance;
  Acc pattern("pattern-fit", kIsotropicTolerance), quad("quadratic-spray", 1e-8);
  json taus = json::array();
  for (std::size_t k = 0; k < ctx.fans.size(); ++k) {
    const Point& x = ctx.samples[k].x;
    try {
      const IsotropicFit fit = isotropic_fit(inst, x, ctx.fans[k]);
      pattern.add(fit.residual_max);
      json t = {{"x", std::vector<double>(x.values().begin(), x.values().end())}, {"tau", fit.tau}};
      const ConformalFit cf = conformal_fit(inst, x);
      if (cf.is_conformal_closed && !cf.trivial) t["tau_over_c"] = fit.tau / cf.c;
      taus.push_back(t);
      quad.add(quadratic_spray_check(inst, fit.tau, x, ctx.fans[k]).residual);
    } catch (const Error& e) {
      pattern.skip(e);
    }
  }
  CheckResult r = named("isotropic");
  r.entries = {pattern.done(), quad.done()};
  r.details["tau"] = taus;
  return r;
}

GridSpec grid_spec() { return GridSpec{}; }

CheckResult check_lemma41(const Context& ctx) {
  const PhiFunction& phi = ctx.spec.instance.phi;
  const double rho = family_rho(phi);
  const auto grid = make_grid(phi, grid_spec());
  ResidualReport rep = lemma41_residuals(phi, rho, grid);
  rep.append(recovery_residuals(phi, rho, grid));
  CheckResult r = named("lemma41");
  r.entries = rep.entries;
  r.details["rho"] = rho;
  r.details["grid_points"] = grid.size();
  return r;
}

ResidualReport pde_suite(const PhiFunction& phi, const ClassificationParams& p, std::span<const GridPoint> grid,
                         bool with_order1) {
  ResidualReport rep = pde_residuals(phi, p, grid);
  rep.append(ds3_residuals(phi, p, grid));
  if (with_order1) rep.append(order1_residuals(phi, p.t2, grid));
  return rep;
}

CheckResult check_pde(const Context& ctx) {
  const PhiFunction& phi = ctx.spec.instance.phi;
  const auto grid = make_grid(phi, grid_spec());
  const bool order1 = phi.family() == "thm-berwald";
  const auto declared = declared_params(phi);
  std::string source;
  ResidualReport rep;
  if (declared) {
    rep = pde_suite(phi, *declared, grid, order1);
    source = "declared";
  }
  if (!declared || !rep.all_pass()) {
    ResidualReport rec = pde_suite(phi, recovered_params(phi, family_rho(phi)), grid, false);
    if (!declared || rec.all_pass()) {
      rep = rec;
      source = "recovered";
    }
  }
  CheckResult r = named("pde");
  r.entries = rep.entries;
  r.details["params"] = source;
  r.details["grid_points"] = grid.size();
  return r;
}

double regularity_probe(const Context& ctx) {
  if (ctx.spec.b0) return *ctx.spec.b0;
  double bmax = 0.0;
  for (const auto& smp : ctx.samples) bmax = std::max(bmax, std::sqrt(smp.b2));
  return std::max(0.05, 1.05 * bmax);
}

json regularity_json(const RegularityReport& rep) {
  json v = json::array();
  for (std::size_t i = 0; i < std::min<std::size_t>(10, rep.violations.size()); ++i) {
    const auto& x = rep.violations[i];
    json e = {{"b2", x.b2}, {"s", x.s}, {"inequality", x.inequality}};
    if (std::isfinite(x.value)) e["value"] = x.value;
    if (!x.message.empty()) e["message"] = x.message;
    v.push_back(e);
  }
  return {{"pass", rep.pass},
          {"singular", rep.singular},
          {"dimension_mode", rep.dimension_mode},
          {"b0_probe", rep.b0_probe},
          {"b0_estimate", rep.b0_estimate},
          {"grid", {rep.grid_rows, rep.grid_cols}},
          {"violation_count", rep.violation_count},
          {"violations", v}};
}

CheckResult check_regularity_suite(const Context& ctx) {
  const RegularityReport rep =
      check_regularity(ctx.spec.instance.phi, regularity_probe(ctx), ctx.spec.instance.dim, ctx.opts.grid_density);
  CheckResult r = named("regularity");
  r.pass = rep.pass;
  r.residual = static_cast<double>(rep.violation_count);
  r.tol = 0.0;
  r.details = regularity_json(rep);
  if (rep.singular) r.note = "singular family: phi is only defined for s > 0";
  return r;
}

using CheckFn = CheckResult (*)(const Context&);

CheckFn check_fn(const std::string& name) {
  if (name == "spray") return &check_spray;
  if (name == "berwald") return &check_berwald;
  if (name == "isotropic") return &check_isotropic;
  if (name == "lemma41") return &check_lemma41;
  if (name == "pde") return &check_pde;
  if (name == "regularity") return &check_regularity_suite;
  throw std::invalid_argument("unknown check '" + name + "' (spray, berwald, isotropic, lemma41, pde, regularity)");
}

void apply_overrides(CheckResult& r, const std::map<std::string, double>& tol) {
  for (auto& e : r.entries) {
    if (auto it = tol.find(r.name); it != tol.end()) e.tol = it->second;
    if (auto it = tol.find(r.name + "." + e.name); it != tol.end()) e.tol = it->second;
    e.pass = e.points > 0 && e.skipped == 0 && e.max_abs < e.tol;
  }
  summarize(r);
}

json instance_summary(const InstanceSpec& spec) {
  const MetricInstance& inst = spec.instance;
  json j = {{"name", inst.name},
            {"dim", inst.dim},
            {"alpha", {{"family", inst.alpha.family()}, {"params", inst.alpha.params()}}},
            {"beta", {{"family", inst.beta.family()}, {"params", inst.beta.params()}}},
            {"phi", {{"family", inst.phi.family()}, {"params", inst.phi.params()}}},
            {"singular", inst.phi.singular()}};
  j["b0"] = spec.b0 ? json(*spec.b0) : json(nullptr);
  return j;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<Sample> draw_samples(const InstanceSpec& spec, std::uint64_t seed, int count) {
  Sampler sampler(spec.instance, seed, SamplingOptions{spec.box.lo, spec.box.hi});
  return sampler.draw(count);
}

}  // namespace

bool RunReport::all_pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass; });
}

json RunReport::to_json(bool with_timing) const {
  json cs = json::array();
  for (const auto& c : checks) {
    json entries = json::array();
    for (const auto& e : c.entries) {
      json je = {{"name", e.name}, {"max_abs", e.max_abs}, {"rms", e.rms}, {"tol", e.tol},
                 {"points", e.points}, {"skipped", e.skipped}, {"pass", e.pass}};
      if (!e.note.empty()) je["note"] = e.note;
      entries.push_back(je);
    }
    json jc = {{"name", c.name}, {"pass", c.pass}, {"residual", c.residual}, {"tol", c.tol},
               {"entries", entries}, {"details", c.details}};
    if (!c.note.empty()) jc["note"] = c.note;
    if (with_timing) jc["seconds"] = c.seconds;
    cs.push_back(jc);
  }
  json j = {{"report_version", kReportVersion}, {"tool_version", kToolVersion}, {"instance", instance},
            {"seed", seed}, {"samples", samples}, {"checks", cs}, {"all_pass", all_pass()}};
  if (with_timing) j["timing"] = {{"total_seconds", seconds}};
  return j;
}

RunReport verify_instance(const InstanceSpec& spec, const VerifyOptions& opts) {
  if (opts.samples < 1) throw std::invalid_argument("--samples must be at least 1");
  std::vector<std::string> names = opts.checks.empty() ? check_names() : opts.checks;
  std::set<std::string> seen;
  for (const auto& n : names) {
    check_fn(n);
    if (!seen.insert(n).second) throw std::invalid_argument("check '" + n + "' listed twice");
  }
  for (const auto& [key, v] : opts.tol) {
    const std::string head = key.substr(0, key.find('.'));
    if (std::find(check_names().begin(), check_names().end(), head) == check_names().end())
      throw std::invalid_argument("tolerance override '" + key + "' does not name a check");
    if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument("tolerance override '" + key + "' must be positive");
  }

  const auto t0 = std::chrono::steady_clock::now();
  RunReport rep;
  rep.instance = instance_summary(spec);
  rep.seed = opts.seed;
  rep.samples = opts.samples;

  Sampler sampler(spec.instance, opts.seed, SamplingOptions{spec.box.lo, spec.box.hi});
  const std::vector<Sample> samples = sampler.draw(opts.samples);
  std::vector<std::vector<Direction>> fans;
  const int fan_points = std::min(opts.samples, 5);
  const int n = spec.instance.dim;
  for (int k = 0; k < fan_points; ++k) fans.push_back(sampler.directions(samples[k].x, 2 * n * n + 2));

  const Context ctx{spec, samples, fans, opts};
  std::vector<std::future<CheckResult>> jobs;
  for (const auto& name : names) {
    jobs.push_back(std::async(std::launch::async, [&ctx, fn = check_fn(name), name] {
      const auto start = std::chrono::steady_clock::now();
      CheckResult r;
      try {
        r = fn(ctx);
      } catch (const std::exception& e) {
        r = named(name);
        r.pass = false;
        r.note = std::string("error: ") + e.what();
      }
      r.seconds = seconds_since(start);
      return r;
    }));
  }
  for (auto& j : jobs) {
    CheckResult r = j.get();
    apply_overrides(r, opts.tol);
    rep.checks.push_back(std::move(r));
  }
  rep.seconds = seconds_since(t0);
  return rep;
}

RunReport inspect_instance(const InstanceSpec& spec, std::uint64_t seed, int samples) {
  if (samples < 1) throw std::invalid_argument("samples must be at least 1");
  const auto t0 = std::chrono::steady_clock::now();
  RunReport rep;
  rep.instance = instance_summary(spec);
  rep.seed = seed;
  rep.samples = samples;
  const auto smp = draw_samples(spec, seed, samples);

  double b2lo = INFINITY, b2hi = -INFINITY, slo = INFINITY, shi = -INFINITY;
  for (const auto& s : smp) {
    b2lo = std::min(b2lo, s.b2);
    b2hi = std::max(b2hi, s.b2);
    slo = std::min(slo, s.s);
    shi = std::max(shi, s.s);
  }
  rep.instance["b2_range"] = {b2lo, b2hi};
  rep.instance["s_range"] = {slo, shi};

  std::vector<Point> pts;
  for (const auto& s : smp) pts.push_back(s.x);
  const auto fits = conformal_check(spec.instance, pts);
  bool closed = true, trivial = true;
  double clo = INFINITY, chi = -INFINITY, res = 0.0;
  for (const auto& f : fits) {
    closed = closed && f.is_conformal_closed;
    trivial = trivial && f.trivial;
    clo = std::min(clo, f.c);
    chi = std::max(chi, f.c);
    res = std::max(res, f.residual);
  }
  json conf = {{"conformal_closed", closed}, {"residual", res}};
  if (closed) {
    conf["c_range"] = {clo, chi};
    if (std::abs(chi - clo) <= 1e-12 * std::max(1.0, std::abs(chi))) conf["c"] = chi;
  }
  if (trivial) conf["note"] = "trivial case c=0: every phi gives a Berwald metric";
  rep.instance["conformal"] = conf;

  const std::vector<std::vector<Direction>> no_fans;
  VerifyOptions opts;
  opts.samples = samples;
  const Context ctx{spec, smp, no_fans, opts};
  CheckResult reg = check_regularity_suite(ctx);
  reg.seconds = seconds_since(t0);
  rep.checks.push_back(std::move(reg));
  rep.seconds = seconds_since(t0);
  return rep;
}

SweepQuantity::SweepQuantity(const PhiFunction& phi, std::string name) : phi_(phi), name_(std::move(name)) {
  static const std::set<std::string> eqs = {"lresult1", "lresult2", "TTT1", "HHH1", "Ds",
                                            "Ds1",      "Ds2",      "Ds3",  "1order"};
  if (name_ == "phi" || name_ == "E" || name_ == "H") return;
  const std::string prefix = "residual:";
  if (name_.rfind(prefix, 0) == 0 && eqs.count(name_.substr(prefix.size()))) {
    eq_ = name_.substr(prefix.size());
    rho_ = family_rho(phi);
    const auto declared = declared_params(phi);
    params_ = declared ? *declared : recovered_params(phi, rho_);
    return;
  }
  throw std::invalid_argument("unknown quantity '" + name_ +
                              "' (phi, E, H, residual:<lresult1|lresult2|TTT1|HHH1|Ds|Ds1|Ds2|Ds3|1order>)");
}

double SweepQuantity::operator()(double b2, double s) const {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  try {
    if (name_ == "phi") return phi_(b2, s);
    if (name_ == "E") return eh_scalars(phi_, b2, s).E;
    if (name_ == "H") return eh_scalars(phi_, b2, s).H;
    const GridPoint pt{b2, s};
    const std::span<const GridPoint> grid(&pt, 1);
    ResidualReport rep;
    if (eq_ == "lresult1" || eq_ == "lresult2")
      rep = lemma41_residuals(phi_, rho_, grid);
    else if (eq_ == "Ds3")
      rep = ds3_residuals(phi_, params_, grid);
    else if (eq_ == "1order")
      rep = order1_residuals(phi_, params_.t2, grid);
    else
      rep = pde_residuals(phi_, params_, grid);
    const ResidualEntry* e = rep.find(eq_);
    if (!e || e->points == 0) return nan;
    return e->max_abs;
  } catch (const Error&) {
    return nan;
  }
}

}  // namespace finsler
