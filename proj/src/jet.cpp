#include "finsler/jet.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <tuple>

#include "finsler/errors.hpp"

namespace finsler {

namespace {

constexpr int kMaxOrder = 12;

double factorial(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

void check_same_space(const JetSpacePtr& a, const JetSpacePtr& b) {
  if (a && b && a != b) throw std::logic_error("jet arithmetic across different spaces");
}

}  // namespace

JetSpace::JetSpace(std::vector<VarGroup> groups, int max_total) : groups_(std::move(groups)) {
  int cap_sum = 0;
  for (const auto& g : groups_) {
    if (g.count < 0 || g.max_degree < 0) throw std::invalid_argument("JetSpace: negative group");
    for (int i = 0; i < g.count; ++i) cap_.push_back(g.max_degree);
    cap_sum += g.max_degree;
  }
  nvars_ = static_cast<int>(cap_.size());
  max_total_ = max_total < 0 ? cap_sum : std::min(max_total, cap_sum);
  if (max_total_ > kMaxOrder) throw std::invalid_argument("JetSpace: order too high");

  // Enumerate exponent vectors group by group.
  std::vector<std::vector<int>> monomials;
  std::vector<int> cur(nvars_, 0);
  std::vector<int> group_of(nvars_);
  {
    int v = 0;
    for (std::size_t g = 0; g < groups_.size(); ++g)
      for (int i = 0; i < groups_[g].count; ++i) group_of[v++] = static_cast<int>(g);
  }
  std::vector<int> group_sum(groups_.size(), 0);
  auto rec = [&](auto&& self, int v, int total) -> void {
    if (v == nvars_) {
      monomials.push_back(cur);
      return;
    }
    const int g = group_of[v];
    for (int e = 0; total + e <= max_total_ && group_sum[g] + e <= groups_[g].max_degree; ++e) {
      cur[v] = e;
      group_sum[g] += e;
      self(self, v + 1, total + e);
      group_sum[g] -= e;
    }
    cur[v] = 0;
  };
  rec(rec, 0, 0);
  std::stable_sort(monomials.begin(), monomials.end(), [](const auto& a, const auto& b) {
    return std::accumulate(a.begin(), a.end(), 0) < std::accumulate(b.begin(), b.end(), 0);
  });

  size_ = static_cast<int>(monomials.size());
  exps_.reserve(static_cast<std::size_t>(size_) * nvars_);
  for (const auto& m : monomials) {
    exps_.insert(exps_.end(), m.begin(), m.end());
    degree_.push_back(std::accumulate(m.begin(), m.end(), 0));
  }
  for (int i = 0; i < size_; ++i) lookup_.emplace_back(key(exponents(i)), i);
  std::sort(lookup_.begin(), lookup_.end());

  std::vector<int> sum(nvars_);
  for (int a = 0; a < size_; ++a) {
    for (int b = 0; b < size_; ++b) {
      if (degree_[a] + degree_[b] > max_total_) continue;
      auto ea = exponents(a);
      auto eb = exponents(b);
      for (int v = 0; v < nvars_; ++v) sum[v] = ea[v] + eb[v];
      const int out = index_of(sum);
      if (out >= 0) products_.push_back({a, b, out});
    }
  }

  deriv_.resize(nvars_);
  std::vector<int> lowered(nvars_);
  for (int v = 0; v < nvars_; ++v) {
    for (int i = 0; i < size_; ++i) {
      auto e = exponents(i);
      if (e[v] == 0) continue;
      std::copy(e.begin(), e.end(), lowered.begin());
      --lowered[v];
      deriv_[v].push_back({i, index_of(lowered), static_cast<double>(e[v])});
    }
  }
}

std::uint64_t JetSpace::key(std::span<const int> exps) const {
  std::uint64_t k = 0;
  for (int e : exps) k = k * (kMaxOrder + 1) + static_cast<std::uint64_t>(e);
  return k;
}

int JetSpace::index_of(std::span<const int> exps) const {
  for (std::size_t v = 0; v < exps.size(); ++v)
    if (exps[v] < 0 || exps[v] > cap_[v]) return -1;
  const auto k = key(exps);
  auto it = std::lower_bound(lookup_.begin(), lookup_.end(), std::make_pair(k, -1));
  if (it == lookup_.end() || it->first != k) return -1;
  return it->second;
}

std::shared_ptr<const JetSpace> JetSpace::get(std::vector<VarGroup> groups, int max_total) {
  static std::mutex mutex;
  static std::map<std::pair<std::vector<std::pair<int, int>>, int>, std::shared_ptr<const JetSpace>> cache;
  std::vector<std::pair<int, int>> sig;
  for (const auto& g : groups) sig.emplace_back(g.count, g.max_degree);
  const auto k = std::make_pair(sig, max_total);
  std::lock_guard lock(mutex);
  auto it = cache.find(k);
  if (it != cache.end()) return it->second;
  auto space = std::make_shared<const JetSpace>(std::move(groups), max_total);
  cache.emplace(k, space);
  return space;
}

std::shared_ptr<const JetSpace> JetSpace::uniform(int nvars, int order) {
  return get({VarGroup{nvars, order}}, order);
}

Jet Jet::constant(JetSpacePtr space, double v) {
  Jet j;
  if (space) {
    j.c_.assign(space->size(), 0.0);
    j.space_ = std::move(space);
  }
  j.c_[0] = v;
  return j;
}

Jet Jet::variable(JetSpacePtr space, int var, double value) {
  Jet j = constant(space, value);
  std::vector<int> e(space->num_vars(), 0);
  e[var] = 1;
  const int idx = space->index_of(e);
  if (idx >= 0) j.c_[idx] = 1.0;
  return j;
}

Jet Jet::from_coefficients(JetSpacePtr space, std::vector<double> coeffs) {
  if (static_cast<int>(coeffs.size()) != space->size()) throw std::invalid_argument("Jet: coefficient count");
  Jet j;
  j.space_ = std::move(space);
  j.c_ = std::move(coeffs);
  return j;
}

double Jet::derivative(std::span<const int> orders) const {
  int total = 0;
  for (int o : orders) total += o;
  if (!space_) return total == 0 ? c_[0] : 0.0;
  const int idx = space_->index_of(orders);
  if (idx < 0) throw std::out_of_range("Jet::derivative: order outside the jet space");
  double f = 1.0;
  for (int o : orders) f *= factorial(o);
  return c_[idx] * f;
}

Jet& Jet::operator+=(const Jet& o) {
  check_same_space(space_, o.space_);
  if (!o.space_) {
    c_[0] += o.c_[0];
  } else if (!space_) {
    const double v = c_[0];
    *this = o;
    c_[0] += v;
  } else {
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
  }
  return *this;
}

Jet& Jet::operator-=(const Jet& o) { return *this += -o; }

Jet& Jet::operator*=(const Jet& o) { return *this = *this * o; }

Jet& Jet::operator/=(const Jet& o) { return *this = *this / o; }

Jet& Jet::operator*=(double v) {
  for (auto& c : c_) c *= v;
  return *this;
}

Jet Jet::operator-() const {
  Jet r = *this;
  for (auto& c : r.c_) c = -c;
  return r;
}

Jet operator+(Jet a, const Jet& b) { return a += b; }
Jet operator-(Jet a, const Jet& b) { return a -= b; }

Jet operator*(const Jet& a, const Jet& b) {
  check_same_space(a.space_, b.space_);
  if (!a.space_) return b * a.c_[0];
  if (!b.space_) return a * b.c_[0];
  Jet r = Jet::constant(a.space_, 0.0);
  const double* pa = a.c_.data();
  const double* pb = b.c_.data();
  double* out = r.c_.data();
  for (const auto& t : a.space_->products()) out[t.out] += pa[t.a] * pb[t.b];
  return r;
}

Jet operator/(const Jet& a, const Jet& b) {
  if (b.is_scalar()) return a * (1.0 / b.value());
  return a * reciprocal(b);
}

Jet operator/(double a, const Jet& b) { return a * reciprocal(b); }

Jet compose(const Jet& a, std::span<const double> taylor) {
  if (!a.space_ || taylor.size() == 1) return Jet::constant(a.space_, taylor[0]);
  const int degree = std::min<int>(static_cast<int>(taylor.size()) - 1, a.space_->max_total_degree());
  Jet h = a;
  h.c_[0] = 0.0;
  Jet r = Jet::constant(a.space_, taylor[degree]);
  for (int k = degree - 1; k >= 0; --k) {
    r = r * h;
    r.c_[0] += taylor[k];
  }
  return r;
}

namespace {

int jet_degree(const Jet& a) { return a.is_scalar() ? 0 : a.space()->max_total_degree(); }

}  // namespace

Jet sqrt(const Jet& a) {
  const double a0 = a.value();
  if (a0 < 0.0 || (a0 == 0.0 && !a.is_scalar()))
    throw DomainError("sqrt of non-positive argument " + std::to_string(a0));
  return pow(a, 0.5);
}

Jet pow(const Jet& a, double p) {
  const double a0 = a.value();
  const int d = jet_degree(a);
  std::vector<double> t(d + 1);
  t[0] = std::pow(a0, p);
  double binom = 1.0;
  for (int k = 1; k <= d; ++k) {
    binom *= (p - (k - 1)) / k;
    t[k] = binom * std::pow(a0, p - k);
  }
  return compose(a, t);
}

Jet exp(const Jet& a) {
  const int d = jet_degree(a);
  std::vector<double> t(d + 1);
  const double e = std::exp(a.value());
  for (int k = 0; k <= d; ++k) t[k] = e / factorial(k);
  return compose(a, t);
}

Jet log(const Jet& a) {
  const double a0 = a.value();
  if (a0 <= 0.0) throw DomainError("log of non-positive argument " + std::to_string(a0));
  const int d = jet_degree(a);
  std::vector<double> t(d + 1);
  t[0] = std::log(a0);
  for (int k = 1; k <= d; ++k) t[k] = ((k % 2) ? 1.0 : -1.0) / (k * std::pow(a0, k));
  return compose(a, t);
}

Jet sin(const Jet& a) {
  const int d = jet_degree(a);
  std::vector<double> t(d + 1);
  const double s = std::sin(a.value());
  const double c = std::cos(a.value());
  const double cyc[4] = {s, c, -s, -c};
  for (int k = 0; k <= d; ++k) t[k] = cyc[k % 4] / factorial(k);
  return compose(a, t);
}

Jet cos(const Jet& a) {
  const int d = jet_degree(a);
  std::vector<double> t(d + 1);
  const double s = std::sin(a.value());
  const double c = std::cos(a.value());
  const double cyc[4] = {c, -s, -c, s};
  for (int k = 0; k <= d; ++k) t[k] = cyc[k % 4] / factorial(k);
  return compose(a, t);
}

Jet reciprocal(const Jet& a) {
  const double a0 = a.value();
  if (a0 == 0.0) throw DomainError("division by a jet with zero constant term");
  const int d = jet_degree(a);
  std::vector<double> t(d + 1);
  double p = 1.0 / a0;
  for (int k = 0; k <= d; ++k) {
    t[k] = (k % 2 ? -p : p);
    p /= a0;
  }
  return compose(a, t);
}

Jet square(const Jet& a) { return a * a; }

Jet differentiate(const Jet& f, int var) {
  if (!f.space_) return Jet(0.0);
  Jet r = Jet::constant(f.space_, 0.0);
  for (const auto& d : f.space_->derivative_table(var)) r.c_[d.dst] = d.factor * f.c_[d.src];
  return r;
}

Jet project(const Jet& f, const JetSpacePtr& target, std::span<const int> var_map) {
  if (!f.space_) return Jet::constant(target, f.value());
  Jet r = Jet::constant(target, 0.0);
  const int ns = f.space_->num_vars();
  std::vector<int> e(target ? target->num_vars() : 0);
  for (int i = 0; i < f.space_->size(); ++i) {
    auto src = f.space_->exponents(i);
    std::fill(e.begin(), e.end(), 0);
    bool keep = true;
    for (int v = 0; v < ns && keep; ++v) {
      if (src[v] == 0) continue;
      if (var_map[v] < 0) keep = false;
      else e[var_map[v]] += src[v];
    }
    if (!keep) continue;
    if (!target) {
      if (i == 0) r.c_[0] = f.c_[0];
      continue;
    }
    const int idx = target->index_of(e);
    if (idx >= 0) r.c_[idx] += f.c_[i];
  }
  return r;
}

}  // namespace finsler
