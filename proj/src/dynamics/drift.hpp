// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "model/params.hpp"

namespace mssde::dynamics {

/// Flat indices of the (2q+1)^d stencil around every coarse point, laid out
/// [P, d_u * (2q+1)^d] against a field-major coarse state of length n_zeta.
/// Periodic grids wrap; Dirichlet grids clamp to the edge.
std::vector<long> stencil_index(const ModelConfig& cfg);

/// f_theta: shared MLP applied at every coarse point. zeta [B, n_zeta], eta [B, n_eta].
Var macro_drift(const ModelConfig& cfg, const ParamVars& p, Var zeta, Var eta);

/// g_theta(eta, psi(zeta), chi(t)). `t` has one entry per batch row (or one
/// shared entry). Returns [B, 0] when n_eta = 0.
Var micro_drift(const ModelConfig& cfg, const ParamVars& p, Var eta, Var zeta, const std::vector<double>& t);

/// [f; g] for z [B, n_z].
Var drift(const ModelConfig& cfg, const ParamVars& p, Var z, const std::vector<double>& t);

/// Diagonal of the dispersion L, [n_z].
Var dispersion(const ParamVars& p);

}  // namespace mssde::dynamics
