// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "model/params.hpp"

namespace mssde::scales {

// All operators act on batches: fine fields [B, n_y], coarse fields
// [B, n_zeta], micro states [B, n_eta]. Multi-field states are field-major.

/// Depthwise convolution with the smoothing kernel, stride 1.
Var smooth(const ModelConfig& cfg, const ParamVars& p, Var y);
/// y - smooth(y).
Var residual(const ModelConfig& cfg, const ParamVars& p, Var y);
/// Same kernel as smooth, stride s, onto the coarse grid.
Var restrict_coarse(const ModelConfig& cfg, const ParamVars& p, Var ybar);
/// Transposed convolution with the tied kernel; adjoint of restrict_coarse.
Var prolong(const ModelConfig& cfg, const ParamVars& p, Var zeta);

/// Strided conv stack + linear map to R^{n_eta}. Returns [B, 0] when n_eta = 0.
Var encode_micro(const ModelConfig& cfg, const ParamVars& p, Var ytilde);
/// Linear map + transposed-conv stack back to the fine grid.
Var decode_micro(const ModelConfig& cfg, const ParamVars& p, Var eta);

struct Encoded {
  Var mean;      // [B, n_z]
  Var variance;  // [n_z], shared across the batch
};

Encoded encode(const ModelConfig& cfg, const ParamVars& p, Var y);

/// softplus of the stored encoder covariance.
Var encoder_variance(const ParamVars& p);

}  // namespace mssde::scales
