// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include <Eigen/Dense>

#include "model/params.hpp"

namespace mssde::inference {

/// Cubic Hermite interpolation through anchors at `anchors` with
/// finite-difference slopes (central inside, one-sided at the ends).
/// value(q, j), deriv(q, j) are the weights of anchor j in f(t_q), f'(t_q).
struct HermiteBasis {
  Tensor value, deriv;  // [Q, M]
};

HermiteBasis hermite_basis(const std::vector<double>& anchors, const std::vector<double>& t);

/// Variational marginals at query times: means interpolated directly,
/// variances through their logarithms.
struct PathValues {
  Tensor mean, mean_dot, var, var_dot;  // [Q, n_z]
};

PathValues evaluate_path(const std::vector<double>& anchors, const Tensor& anchor_mean, const Tensor& anchor_var,
                         const std::vector<double>& t);

/// Diagonal B: (ell^2 - var_dot) / (2 var), elementwise; var [..., n_z], ell [n_z].
Tensor b_matrix(const Tensor& var, const Tensor& var_dot, const Tensor& ell);

/// Dense B from (Sigma (+) Sigma) vec(B) = vec(L L^T - Sigma_dot).
Eigen::MatrixXd b_matrix_dense(const Eigen::MatrixXd& sigma, const Eigen::MatrixXd& sigma_dot,
                               const Eigen::MatrixXd& L);

/// r = mean_dot - B (z - mean) - gamma(z, t); all [Q, n_z] except b, which may
/// be [Q, n_z] or [n_z].
Var drift_residual(const ModelConfig& cfg, const ParamVars& p, Var z, const std::vector<double>& t, Var mean,
                   Var mean_dot, Var b);

}  // namespace mssde::inference
