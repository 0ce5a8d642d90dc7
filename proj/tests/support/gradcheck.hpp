// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <string>

#include "compute/adam.hpp"
#include "compute/graph.hpp"
#include "compute/rng.hpp"

namespace mssde::testing {

using VarMap = std::map<std::string, Var>;
using LossBuilder = std::function<Var(Graph&, const VarMap&)>;

inline double eval_loss(const ParamMap& params, const LossBuilder& build) {
  Graph g(false);
  VarMap vars;
  for (const auto& [k, v] : params) vars[k] = g.leaf(k, v);
  return build(g, vars).value().item();
}

inline ParamMap analytic_grad(const ParamMap& params, const LossBuilder& build) {
  Graph g;
  VarMap vars;
  for (const auto& [k, v] : params) vars[k] = g.leaf(k, v);
  return g.backward(build(g, vars));
}

/// Central-difference gradient of every parameter entry.
inline ParamMap numeric_grad(ParamMap params, const LossBuilder& build, double h = 1e-5) {
  ParamMap out;
  for (auto& [k, t] : params) {
    Tensor gt(t.shape());
    for (std::size_t i = 0; i < t.size(); ++i) {
      const double x0 = t[i];
      t[i] = x0 + h;
      const double fp = eval_loss(params, build);
      t[i] = x0 - h;
      const double fm = eval_loss(params, build);
      t[i] = x0;
      gt[i] = (fp - fm) / (2.0 * h);
    }
    out[k] = gt;
  }
  return out;
}

/// Norm-wise relative error ||a - n|| / max(||n||, floor).
inline double rel_err(const Tensor& a, const Tensor& n, double floor = 1e-10) {
  double d = 0.0, s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    d += (a[i] - n[i]) * (a[i] - n[i]);
    s += n[i] * n[i];
  }
  return std::sqrt(d) / std::max(std::sqrt(s), floor);
}

inline std::map<std::string, double> grad_errors(const ParamMap& params, const LossBuilder& build, double h = 1e-5) {
  const ParamMap a = analytic_grad(params, build);
  const ParamMap n = numeric_grad(params, build, h);
  std::map<std::string, double> err;
  for (const auto& [k, t] : n) err[k] = rel_err(a.at(k), t);
  return err;
}

inline Tensor uniform_tensor(Rng& rng, const Shape& shape, double lo = -1.0, double hi = 1.0) {
  Tensor t(shape);
  for (auto& v : t.values()) v = lo + (hi - lo) * rng.uniform();
  return t;
}

inline double dot(const Tensor& a, const Tensor& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace mssde::testing
