// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <string>
#include <vector>

#include "datagen/grid.hpp"
#include "datagen/pde.hpp"

namespace mssde::baselines {

/// Same domain and boundary with `points` nodes per axis.
GridSpec coarse_grid(const GridSpec& fine, std::size_t points);

/// Piecewise-cubic Lagrange interpolation between two grids over the same
/// domain, per field and axis. Periodic axes wrap; Dirichlet axes use
/// one-sided windows near the ends. Nodes shared by both grids are copied.
std::vector<double> interpolate_cubic(const GridSpec& from, std::span<const double> values, const GridSpec& to);

/// Largest per-axis node count whose state fits in `n_latent` values.
/// Periodic grids keep counts dividing the fine count.
std::size_t matched_coarse_points(const GridSpec& fine, std::size_t n_latent);

/// Runs the generator on the coarse grid from the interpolated y0 with the
/// same RK4 stepping and interpolates every state back to the fine grid.
Trajectory coarse_dns(const std::string& problem, double coeff, const GridSpec& fine, std::size_t points,
                      std::span<const double> y0, const std::vector<double>& times, std::size_t substeps);

}  // namespace mssde::baselines
