// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <string>

#include "compute/adam.hpp"
#include "compute/graph.hpp"
#include "compute/rng.hpp"
#include "model/config.hpp"

namespace mssde {

enum class ParamKind { kWeight, kBias, kSmoothKernel, kSoftplus, kLogPrecision };

struct ParamInfo {
  Shape shape;
  ParamKind kind = ParamKind::kWeight;
  std::size_t fan_in = 0, fan_out = 0;
};

/// Names and shapes of every parameter of a model with this configuration.
std::map<std::string, ParamInfo> param_layout(const ModelConfig& cfg);

/// Initial values of the positive quantities stored behind transforms.
inline constexpr double kInitVariance = 1e-2;
inline constexpr double kInitPrecisionUnknown = 1e2;

double softplus_inverse(double v);

/// Fresh parameters: Xavier-normal weights, zero biases, Gaussian smoothing
/// kernel of width s, softplus-stored variances at kInitVariance, precisions at
/// 1/sigma_obs^2.
ParamMap init_params(const ModelConfig& cfg, Rng& rng);

/// Parameters for `next` warm-started from `prev`: entries present in both
/// are copied into their positions, everything new is freshly initialised.
ParamMap grow_params(const ParamMap& prev, const ModelConfig& prev_cfg, const ModelConfig& next, Rng& rng);

/// Throws DataError if `params` does not match the layout of `cfg`.
void check_params(const ModelConfig& cfg, const ParamMap& params);

using ParamVars = std::map<std::string, Var>;

/// Parameters as graph leaves (named, gradient-tracked) or constants.
ParamVars bind_params(Graph& g, const ParamMap& params, bool trainable = true);

Var param(const ParamVars& p, const std::string& name);

}  // namespace mssde
