// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "datagen/grid.hpp"
#include "model/config.hpp"
#include "model/params.hpp"

namespace mssde::testing {

inline ModelConfig tiny_config(std::size_t dim, std::size_t n, std::size_t coarse, std::size_t n_eta,
                               Boundary b = Boundary::kPeriodic) {
  ModelConfig c;
  c.grid = dim == 1 ? make_grid_1d(n, 0.0, 1.0, b) : make_grid_2d(n, 0.0, 1.0, b);
  c.coarse = coarse;
  c.n_eta = n_eta;
  c.enc_filters = {2, 3};
  c.enc_kernel = dim == 1 ? 5 : 3;
  c.stencil_q = 1;
  c.macro_hidden = 5;
  c.macro_layers = 1;
  c.micro_hidden = 4;
  c.micro_layers = 1;
  return c;
}

/// Evaluates `f(graph, params)` without recording and returns the value.
template <class F>
Tensor eval(const ParamMap& params, F f) {
  Graph g(false);
  const ParamVars p = bind_params(g, params, false);
  return f(g, p).value();
}

}  // namespace mssde::testing
