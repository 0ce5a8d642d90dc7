// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <span>
#include <vector>

#include "compute/rng.hpp"
#include "model/params.hpp"

namespace mssde::inference {

/// Observations of one segment of one trajectory.
struct SegmentData {
  std::size_t id = 0;          // reported in errors
  std::vector<double> times;   // [M]
  Tensor obs;                  // [M, n_y]
  std::vector<bool> owned;     // [M]
};

struct ElboTerms {
  double loglik = 0.0;    // sum over owned observations
  double integral = 0.0;  // quadrature of E |r|^2_C
  double elbo = 0.0;      // loglik - integral / 2
};

struct ElboOptions {
  std::size_t n_quad = 64;
};

/// Records the ELBO of a set of segments on `g` and returns the per-segment
/// values [K]. Noise for the observation draws and quadrature draws comes
/// from `rng` in a fixed order.
Var elbo_graph(const ModelConfig& cfg, const ParamVars& p, std::span<const SegmentData* const> segs, Rng& rng,
               const ElboOptions& opt, ElboTerms* terms = nullptr);

struct ElboGrad {
  ElboTerms terms;  // summed over segments
  ParamMap grad;    // gradient of the loss -sum(elbo) * loss_scale
};

/// Value and gradient over segments split into fixed chunks of `chunk`
/// segments; chunk c draws its noise from rng_for(c). Results do not depend on
/// `threads`.
ElboGrad elbo_value_and_grad(const ModelConfig& cfg, const ParamMap& params, std::span<const SegmentData* const> segs,
                             const std::function<Rng(std::size_t)>& rng_for, const ElboOptions& opt,
                             double loss_scale, std::size_t chunk = 8, std::size_t threads = 1);

}  // namespace mssde::inference
