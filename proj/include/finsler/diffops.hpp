#pragma once

// Differentiation engines built on Jet, and the central finite-difference
// oracle used to cross-check them.

#include <functional>
#include <span>
#include <vector>

#include "finsler/jet.hpp"

namespace finsler {

/// f(x, y) written against Jet so it can be differentiated exactly.
using JetField = std::function<Jet(std::span<const Jet> x, std::span<const Jet> y)>;
/// f(x, y) on plain doubles; only finite differences can differentiate it.
using PlainField = std::function<double(std::span<const double> x, std::span<const double> y)>;

struct FDConfig {
  double step = 1e-5;
  /// Step used when the requested total order is 3 or more.
  double step_high_order = 1e-3;

  double step_for(int order) const { return order >= 3 ? step_high_order : step; }
};

struct DerivResult {
  double value = 0.0;
  /// True when the value came from finite differences instead of jets.
  bool used_fd = false;
};

/// Mixed y-partial of order |orders| (<= 3 for the library's use, any order
/// supported by JetSpace).  orders[i] is the order in y^i.
DerivResult deriv_y(const JetField& f, std::span<const double> x, std::span<const double> y,
                    std::span<const int> orders);
/// Finite-difference fallback for callables that cannot take jets.
DerivResult deriv_y(const PlainField& f, std::span<const double> x, std::span<const double> y,
                    std::span<const int> orders, const FDConfig& cfg = {});

/// First x-partial d f / d x^index.
DerivResult deriv_x(const JetField& f, std::span<const double> x, std::span<const double> y, int index);
DerivResult deriv_x(const PlainField& f, std::span<const double> x, std::span<const double> y, int index,
                    const FDConfig& cfg = {});

/// Central finite-difference estimate of a mixed partial, as a tensor product
/// of one-dimensional central stencils (order 1, 2 or 3 per variable).
/// A DomainError thrown by f is re-thrown naming the offending stencil point.
double fd_deriv(const std::function<double(std::span<const double>)>& f, std::span<const double> point,
                std::span<const int> orders, const FDConfig& cfg = {});

}  // namespace finsler
