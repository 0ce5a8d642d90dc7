// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <span>
#include <string>
#include <vector>

#include "compute/tensor.hpp"
#include "datagen/pde.hpp"

namespace mssde::baselines {

struct DmdModel {
  std::size_t rank = 0;
  double lambda = 0.0;
  Eigen::MatrixXd basis;     // [n_y, rank], orthonormal columns
  Eigen::MatrixXd op;        // reduced operator [rank, rank]
  Eigen::VectorXcd eigenvalues;
  Eigen::MatrixXcd modes;    // basis * eigenvectors
  std::vector<std::string> warnings;
};

/// Snapshot pairs as columns of X1 -> X2. Truncated SVD of X1 at rank r,
/// reduced operator U^T X2 V diag(s / (s^2 + lambda)). Numerically rank
/// deficient data shrinks r and records a warning.
DmdModel dmd_fit(const Eigen::MatrixXd& X1, const Eigen::MatrixXd& X2, std::size_t r, double lambda = 0.01);

/// Consecutive-state pairs of every trajectory.
DmdModel dmd_fit(const std::vector<const Trajectory*>& trajectories, std::size_t r, double lambda = 0.01);

/// Projects y0, iterates the reduced operator and lifts: [n_steps + 1, n_y].
Tensor dmd_predict(const DmdModel& model, std::span<const double> y0, std::size_t n_steps);

}  // namespace mssde::baselines
