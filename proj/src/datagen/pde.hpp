// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <span>
#include <vector>

#include "compute/rng.hpp"
#include "compute/tensor.hpp"

namespace mssde {

/// du/dt = rhs(u), written into `out` (same length as u).
using Rhs = std::function<void(std::span<const double> u, std::span<double> out)>;

/// Centered first difference, periodic: -c (u[j+1] - u[j-1]) / (2 dx).
void advect_rhs(std::span<const double> u, double c, double dx, std::span<double> out);
/// -u_j (u[j+1] - u[j-1])/(2dx) - nu (u[j+2] - 3u[j+1] + 3u[j] - u[j-1]) / dx^3, periodic.
void kdv_rhs(std::span<const double> u, double nu, double dx, std::span<double> out);
/// Square n x n grid, row-major, zero Dirichlet boundary rows/columns.
void burgers2d_rhs(std::span<const double> u, std::size_t n, double nu, double dx, std::span<double> out);

Tensor advect_rhs(const Tensor& u, double c, double dx);
Tensor kdv_rhs(const Tensor& u, double nu, double dx);
Tensor burgers2d_rhs(const Tensor& u, double nu, double dx);

struct Trajectory {
  std::vector<double> times;
  Tensor states;  // [n_t, n_y]

  std::size_t n_t() const { return times.size(); }
  std::size_t n_y() const { return states.rank() == 2 ? states.dim(1) : 0; }
  std::span<const double> state(std::size_t i) const {
    return std::span<const double>(states.data() + i * n_y(), n_y());
  }
  friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

/// Classical RK4 with `substeps` equal steps between consecutive output times.
/// Output times must be uniformly spaced. Throws NumericalError naming the
/// first step that produced a non-finite state.
Trajectory integrate_rk4(const Rhs& rhs, std::span<const double> u0, const std::vector<double>& times,
                         std::size_t substeps = 1);

/// Adds i.i.d. N(0, sigma^2) noise to every entry.
Trajectory corrupt(const Trajectory& traj, double sigma, Rng& rng);

std::vector<double> uniform_times(double t0, double t1, std::size_t n_t);

}  // namespace mssde
