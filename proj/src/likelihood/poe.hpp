// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "model/params.hpp"

namespace mssde::likelihood {

// Product-of-experts Gaussian likelihood with diagonal precisions.
//   y [B, n_y]      observation
//   macro [B, n_y]  macroscale prediction D^zeta(zeta)
//   micro [B, n_y]  microscale output D^eta(eta)
//   s_zeta, s_eta [n_y] precisions
// Both forms return per-row log-densities [B] including all constants.

/// -1/2 (|r|^2_{S^z} + |r - d|^2_{S^e} - |d|^2_Lambda) - n/2 log 2pi + 1/2 log|S^z + S^e|,
/// r = y - macro, d = micro, Lambda = S^e (S^e + S^z)^{-1} S^z.
Var poe_loglik(Var y, Var macro, Var micro, Var s_zeta, Var s_eta);

/// -1/2 |r|^2_{S^z+S^e} + <r, d>_{S^e} - 1/2 |d|^2_{Lambda'} + constants,
/// Lambda' = S^e (S^e + S^z)^{-1} S^e.
Var poe_loglik_expanded(Var y, Var macro, Var micro, Var s_zeta, Var s_eta);

/// Lambda = S^e (S^e + S^z)^{-1} S^z, diagonal.
Var poe_lambda(Var s_zeta, Var s_eta);
/// Lambda' = S^e (S^e + S^z)^{-1} S^e, diagonal.
Var poe_lambda_prime(Var s_zeta, Var s_eta);

struct Precisions {
  Var s_zeta, s_eta;  // [n_y]
};

Precisions precisions(const ParamVars& p);

/// Model log-likelihood log p(y | zeta, eta), [B].
Var model_loglik(const ModelConfig& cfg, const ParamVars& p, Var y, Var zeta, Var eta);

struct Reconstruction {
  Var mean;      // [B, n_y]
  Var variance;  // [n_y] = (S^z + S^e)^{-1}
};

/// mu_y = D^zeta(zeta) + Sigma_y S^eta D^eta(eta).
Reconstruction reconstruct(const ModelConfig& cfg, const ParamVars& p, Var z);

}  // namespace mssde::likelihood
