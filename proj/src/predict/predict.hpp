// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <utility>
#include <vector>

#include "compute/rng.hpp"
#include "model/params.hpp"

namespace mssde::predict {

/// Equal-weight Gaussian mixture with a shared diagonal covariance.
struct PredictiveMixture {
  Tensor means;     // [N, n_y]
  Tensor variance;  // [n_y]
};

struct PredictOptions {
  std::size_t n_paths = 64;
  double dt = 0.0;  // integrator step; 0 uses the spacing of `times`
  std::size_t threads = 1;
};

/// Encodes y0, samples N initial latents, integrates the learned SDE to each
/// of `times` (times[0] is the time of y0, uniformly spaced, each spacing a
/// whole number of integrator steps) and reconstructs. Path i draws from
/// rng.substream(rng.stream() + i).
std::vector<PredictiveMixture> posterior_predict(const ModelConfig& cfg, const ParamMap& params,
                                                 std::span<const double> y0, const std::vector<double>& times,
                                                 const Rng& rng, const PredictOptions& opt = {});

struct Moments {
  Tensor mean, variance;  // [n_y]
  bool single_component = false;  // N == 1: variance is Sigma_y only
};

/// Mean of component means; Sigma_y plus the sample covariance diagonal of the
/// component means (divisor N - 1).
Moments predictive_moments(const PredictiveMixture& mix);

/// |y - yhat| / |y| in the Euclidean norm.
double error_metric(std::span<const double> y_true, std::span<const double> y_hat);

/// One-sided DFT amplitude |u_hat_k| for k = 0..n/2 of a periodic 1D field.
std::vector<std::pair<std::size_t, double>> export_spectrum(std::span<const double> field);

}  // namespace mssde::predict
