// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "compute/tensor.hpp"
#include "datagen/pde.hpp"

namespace mssde::baselines {

/// Leading left singular vectors of the snapshot columns (no centring).
Eigen::MatrixXd pod_basis(const Eigen::MatrixXd& snapshots, std::size_t r);

/// Monomials up to `order` (1 or 2): 1, a_i, a_i a_j (i <= j).
std::size_t library_size(std::size_t r, std::size_t order);
Eigen::VectorXd library(const Eigen::VectorXd& a, std::size_t order);

/// Time derivative of rows of `a` [n_t, r]: central inside, second-order
/// one-sided at the ends (first-order when n_t == 2).
Eigen::MatrixXd latent_derivative(const Eigen::MatrixXd& a, double dt);

struct StlsqResult {
  Eigen::MatrixXd coef;  // [library, r]
  bool converged = false;
  std::size_t sweeps = 0;
};

/// Sequentially thresholded least squares for theta * coef = target.
StlsqResult stlsq(const Eigen::MatrixXd& theta, const Eigen::MatrixXd& target, double threshold,
                  std::size_t max_sweeps = 20);

struct SindyModel {
  Eigen::MatrixXd basis;  // [n_y, r]
  std::size_t order = 1;
  double threshold = 0.0;
  Eigen::MatrixXd coef;   // [library, r]
  bool converged = false;

  Eigen::VectorXd rhs(const Eigen::VectorXd& a) const;
};

/// POD to rank r, latent derivatives from uniformly spaced times, STLSQ.
SindyModel sindy_fit(const std::vector<const Trajectory*>& trajectories, std::size_t r, std::size_t order,
                     double threshold);

struct SindyRollout {
  Tensor states;          // [valid, n_y]
  bool blew_up = false;   // rollout stopped early
};

/// RK4 on the latent ODE with `substeps` steps per output interval, lifted
/// through the basis. Stops at the first non-finite or exploding state.
SindyRollout sindy_predict(const SindyModel& model, std::span<const double> y0, const std::vector<double>& times,
                           std::size_t substeps = 1);

}  // namespace mssde::baselines
