#include "finsler/diffops.hpp"

#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "finsler/errors.hpp"

namespace finsler {

namespace {

// Central stencils: (offset in units of h, weight), scaled by 1/h^order.
struct Stencil {
  std::vector<std::pair<int, double>> taps;
  double denom;  // multiplier of h^order
};

Stencil stencil_for(int order) {
  switch (order) {
    case 0: return {{{0, 1.0}}, 1.0};
    case 1: return {{{1, 1.0}, {-1, -1.0}}, 2.0};
    case 2: return {{{1, 1.0}, {0, -2.0}, {-1, 1.0}}, 1.0};
    case 3: return {{{2, 1.0}, {1, -2.0}, {-1, 2.0}, {-2, -1.0}}, 2.0};
    default: throw std::invalid_argument("fd_deriv: per-variable order must be <= 3");
  }
}

std::vector<Jet> constants(std::span<const double> v) { return {v.begin(), v.end()}; }

}  // namespace

double fd_deriv(const std::function<double(std::span<const double>)>& f, std::span<const double> point,
                std::span<const int> orders, const FDConfig& cfg) {
  if (orders.size() != point.size()) throw std::invalid_argument("fd_deriv: orders/point size mismatch");
  const int total = std::accumulate(orders.begin(), orders.end(), 0);
  const double h = cfg.step_for(total);
  if (!(h > 0.0)) throw std::invalid_argument("fd_deriv: step must be positive");

  std::vector<Stencil> st;
  for (int o : orders) st.push_back(stencil_for(o));

  std::vector<double> p(point.begin(), point.end());
  std::vector<std::size_t> pos(st.size(), 0);
  double acc = 0.0;
  for (;;) {
    double w = 1.0;
    for (std::size_t v = 0; v < st.size(); ++v) {
      const auto& [off, wt] = st[v].taps[pos[v]];
      p[v] = point[v] + off * h;
      w *= wt;
    }
    try {
      acc += w * f(p);
    } catch (const DomainError& e) {
      std::ostringstream os;
      os << e.what() << " (finite-difference stencil point [";
      for (std::size_t v = 0; v < p.size(); ++v) os << (v ? ", " : "") << p[v];
      os << "])";
      throw DomainError(os.str());
    }
    std::size_t v = 0;
    while (v < st.size() && ++pos[v] == st[v].taps.size()) pos[v++] = 0;
    if (v == st.size()) break;
  }
  double denom = 1.0;
  for (std::size_t v = 0; v < st.size(); ++v) denom *= st[v].denom * std::pow(h, orders[v]);
  return acc / denom;
}

DerivResult deriv_y(const JetField& f, std::span<const double> x, std::span<const double> y,
                    std::span<const int> orders) {
  const int n = static_cast<int>(y.size());
  if (static_cast<int>(orders.size()) != n) throw std::invalid_argument("deriv_y: orders size");
  const int total = std::accumulate(orders.begin(), orders.end(), 0);
  auto space = JetSpace::uniform(n, total);
  std::vector<Jet> yj;
  for (int i = 0; i < n; ++i) yj.push_back(Jet::variable(space, i, y[i]));
  const auto xj = constants(x);
  return {f(xj, yj).derivative(orders), false};
}

DerivResult deriv_y(const PlainField& f, std::span<const double> x, std::span<const double> y,
                    std::span<const int> orders, const FDConfig& cfg) {
  std::vector<double> xv(x.begin(), x.end());
  auto g = [&](std::span<const double> yy) { return f(xv, yy); };
  return {fd_deriv(g, y, orders, cfg), true};
}

DerivResult deriv_x(const JetField& f, std::span<const double> x, std::span<const double> y, int index) {
  const int n = static_cast<int>(x.size());
  auto space = JetSpace::uniform(n, 1);
  std::vector<Jet> xj;
  for (int i = 0; i < n; ++i) xj.push_back(Jet::variable(space, i, x[i]));
  const auto yj = constants(y);
  std::vector<int> orders(n, 0);
  orders[index] = 1;
  return {f(xj, yj).derivative(orders), false};
}

DerivResult deriv_x(const PlainField& f, std::span<const double> x, std::span<const double> y, int index,
                    const FDConfig& cfg) {
  std::vector<double> yv(y.begin(), y.end());
  auto g = [&](std::span<const double> xx) { return f(xx, yv); };
  std::vector<int> orders(x.size(), 0);
  orders[index] = 1;
  return {fd_deriv(g, x, orders, cfg), true};
}

}  // namespace finsler
