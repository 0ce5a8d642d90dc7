// SPDX-License-Identifier: Apache-2.0
#include "likelihood/poe.hpp"

#include <cmath>
#include <numbers>

#include "core/error.hpp"
#include "scales/scale_ops.hpp"

namespace mssde::likelihood {

using namespace mssde::ops;

namespace {

void check_inputs(Var y, Var macro, Var micro, Var s_zeta, Var s_eta) {
  const Shape& s = y.shape();
  if (s.size() != 2) throw ShapeError("poe: y must be [B, n_y], got " + shape_str(s));
  if (macro.shape() != s || micro.shape() != s) throw ShapeError("poe: macro/micro shapes must match y");
  const Shape prec{s[1]};
  if (s_zeta.shape() != prec || s_eta.shape() != prec) throw ShapeError("poe: precisions must be [n_y]");
  for (Var v : {s_zeta, s_eta}) {
    for (double x : v.value().values()) {
      if (!(x > 0.0)) throw NumericalError("poe: precision entries must be positive");
    }
  }
}

// Constant plus 1/2 log|S^z + S^e| as a rank-0 var.
Var normaliser(Var s_sum, std::size_t n) {
  return add_scalar(scale(sum(log(s_sum)), 0.5), -0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi));
}

}  // namespace

Var poe_lambda(Var s_zeta, Var s_eta) { return div(mul(s_eta, s_zeta), add(s_zeta, s_eta)); }

Var poe_lambda_prime(Var s_zeta, Var s_eta) { return div(square(s_eta), add(s_zeta, s_eta)); }

Var poe_loglik(Var y, Var macro, Var micro, Var s_zeta, Var s_eta) {
  check_inputs(y, macro, micro, s_zeta, s_eta);
  Var s_sum = add(s_zeta, s_eta);
  Var lambda = poe_lambda(s_zeta, s_eta);
  Var r = sub(y, macro);
  Var q = add(mul(square(r), s_zeta), mul(square(sub(r, micro)), s_eta));
  q = sub(q, mul(square(micro), lambda));
  return add(scale(sum_trailing(q), -0.5), normaliser(s_sum, y.shape()[1]));
}

Var poe_loglik_expanded(Var y, Var macro, Var micro, Var s_zeta, Var s_eta) {
  check_inputs(y, macro, micro, s_zeta, s_eta);
  Var s_sum = add(s_zeta, s_eta);
  Var lambda_p = poe_lambda_prime(s_zeta, s_eta);
  Var r = sub(y, macro);
  Var q = scale(mul(square(r), s_sum), -0.5);
  q = add(q, mul(mul(r, micro), s_eta));
  q = sub(q, scale(mul(square(micro), lambda_p), 0.5));
  return add(sum_trailing(q), normaliser(s_sum, y.shape()[1]));
}

Precisions precisions(const ParamVars& p) {
  return {exp(param(p, "poe.log_s_zeta")), exp(param(p, "poe.log_s_eta"))};
}

Var model_loglik(const ModelConfig& cfg, const ParamVars& p, Var y, Var zeta, Var eta) {
  const Precisions s = precisions(p);
  Var macro = scales::prolong(cfg, p, zeta);
  Var micro = scales::decode_micro(cfg, p, eta);
  return poe_loglik(y, macro, micro, s.s_zeta, s.s_eta);
}

Reconstruction reconstruct(const ModelConfig& cfg, const ParamVars& p, Var z) {
  if (z.shape().size() != 2 || z.shape()[1] != cfg.n_z()) {
    throw ShapeError("reconstruct: expected [B, " + std::to_string(cfg.n_z()) + "], got " + shape_str(z.shape()));
  }
  const Precisions s = precisions(p);
  Var var = div(z.graph->constant(Tensor(Shape{cfg.n_y()}, 1.0)), add(s.s_zeta, s.s_eta));
  Var mean = scales::prolong(cfg, p, slice(z, 1, 0, cfg.n_zeta()));
  if (cfg.n_eta > 0) {
    Var micro = scales::decode_micro(cfg, p, slice(z, 1, cfg.n_zeta(), cfg.n_z()));
    mean = add(mean, mul(micro, mul(var, s.s_eta)));
  }
  return {mean, var};
}

}  // namespace mssde::likelihood
