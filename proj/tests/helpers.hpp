#pragma once

#include <doctest.h>

#include <cmath>
#include <nlohmann/json.hpp>
#include <string>

#include "finsler/registry.hpp"

namespace th {

using nlohmann::json;

inline json block(const std::string& family, json params = json::object()) {
  return {{"family", family}, {"params", params}};
}

inline finsler::MetricInstance make(int dim, json alpha, json beta, json phi, json b0 = nullptr) {
  json j = {{"dim", dim}, {"alpha", alpha}, {"beta", beta}, {"phi", phi}, {"b0", b0}};
  return finsler::parse_instance(j).instance;
}

inline finsler::MetricInstance radial(int dim, const std::string& phi, json params = json::object(), double c = 0.1) {
  return make(dim, block("euclidean"), block("radial", {{"c", c}}), block(phi, params.is_null() ? json::object() : params));
}

inline finsler::MetricInstance builtin(const std::string& name) {
  return finsler::parse_instance(finsler::builtin_instance(name)).instance;
}

inline double rel(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

}  // namespace th
