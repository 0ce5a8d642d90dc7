// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "datagen/dataset.hpp"

namespace mssde {

/// Generator settings for one benchmark problem. Sampler parameters are
/// (mean, variance) pairs for normal draws and (lo, hi) for uniform draws.
struct ProblemSpec {
  std::string problem = "advection";  // advection | kdv | burgers2d
  std::size_t points = 200;           // per axis
  double x_lo = 0.0, x_hi = 1.0;
  double coeff = 1.0;  // advection speed c, or viscosity / dispersion nu
  double t_end = 1.0;
  double dt = 1e-3;  // integrator step
  std::size_t obs_every = 1;
  double sigma = 1e-3;
  std::size_t n_train = 20, n_val = 5, n_test = 5;
  double ic_w_lo = 0.01, ic_w_hi = 0.02;
  double ic_a_mean = 1.0, ic_a_var = 0.01;
  double ic_s_mean = 0.2, ic_s_var = 1e-4;
  std::uint64_t seed = 0;

  std::size_t n_t() const;
  std::size_t n_traj() const { return n_train + n_val + n_test; }
};

/// Named generator configurations: advection, advection_desk, kdv, kdv_desk,
/// burgers2d, burgers2d_desk. Throws UsageError for unknown names.
ProblemSpec problem_preset(const std::string& name);
std::vector<std::string> problem_preset_names();

Boundary problem_boundary(const std::string& problem);
GridSpec problem_grid(const ProblemSpec& spec);
GridSpec problem_grid(const std::string& problem, std::size_t points, double lo, double hi);
Rhs problem_rhs(const std::string& problem, const GridSpec& grid, double coeff);

/// Draws the sampler parameters and evaluates the initial field. Parameters
/// drawn are recorded in `params`.
std::vector<double> sample_initial_condition(const ProblemSpec& spec, const GridSpec& grid, Rng& rng,
                                             nlohmann::json& params);

/// Clean trajectory for one initial condition.
Trajectory simulate(const ProblemSpec& spec, const GridSpec& grid, std::span<const double> u0);

/// Trajectories ordered train, val, test. Trajectory k draws its initial
/// condition from substream 2k and its noise from substream 2k+1.
Dataset generate_dataset(const ProblemSpec& spec, std::size_t threads = 1);

}  // namespace mssde
