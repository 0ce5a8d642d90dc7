// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <vector>

#include "compute/rng.hpp"
#include "model/params.hpp"

namespace mssde::dynamics {

/// gamma(z, t) for a batch z [B, n_z] at common time t. Must be safe to call
/// concurrently.
using DriftFn = std::function<Tensor(const Tensor& z, double t)>;

struct EmOptions {
  std::size_t record_every = 1;  // keep every k-th step (n_steps % k == 0)
  std::size_t threads = 1;
  std::size_t chunk = 16;  // paths per work item
};

/// z_{k+1} = z_k + gamma(z_k, t_k) dt + ell * sqrt(dt) * xi_k, one RNG per path
/// (rngs.size() == rows of z0). Returns [n_paths, n_steps / record_every + 1, n_z].
Tensor euler_maruyama(const DriftFn& drift, const std::vector<double>& ell, const Tensor& z0, double t0, double t1,
                      std::size_t n_steps, std::vector<Rng>& rngs, const EmOptions& opt = {});

/// Drift of a trained model, evaluated without recording a tape.
DriftFn model_drift(const ModelConfig& cfg, const ParamMap& params);
std::vector<double> model_dispersion(const ParamMap& params);

}  // namespace mssde::dynamics
