// SPDX-License-Identifier: Apache-2.0
#include "datagen/problems.hpp"

#include <cmath>
#include <numbers>

#include "core/error.hpp"
#include "core/parallel.hpp"

namespace mssde {

std::size_t ProblemSpec::n_t() const {
  const double span = dt * static_cast<double>(obs_every);
  if (!(span > 0.0) || !(t_end > 0.0)) throw UsageError("problem: dt, obs_every and t_end must be positive");
  return static_cast<std::size_t>(std::llround(t_end / span)) + 1;
}

ProblemSpec problem_preset(const std::string& name) {
  ProblemSpec p;
  if (name == "advection" || name == "advection_desk") {
    p.problem = "advection";
    p.x_lo = 0.0, p.x_hi = 1.0, p.coeff = 1.0, p.t_end = 1.0, p.dt = 1e-3;
    p.sigma = 1e-3;
    p.n_train = 20, p.n_val = 5, p.n_test = 5;
    p.ic_w_lo = 0.01, p.ic_w_hi = 0.02;
    p.points = 1000, p.obs_every = 1;
    if (name == "advection_desk") p.points = 200, p.obs_every = 5, p.ic_w_lo = 0.02, p.ic_w_hi = 0.04;
  } else if (name == "kdv" || name == "kdv_desk") {
    p.problem = "kdv";
    p.x_lo = 0.0, p.x_hi = 10.0, p.coeff = 0.02, p.t_end = 1.0;
    p.sigma = 1e-2;
    p.n_train = 10, p.n_val = 5, p.n_test = 5;
    p.ic_a_mean = 2.0, p.ic_a_var = 0.01, p.ic_s_mean = 1.0, p.ic_s_var = 0.01;
    p.points = 1000, p.dt = 1e-5, p.obs_every = 100;
    if (name == "kdv_desk") p.points = 250, p.dt = 2.5e-4, p.obs_every = 20;
  } else if (name == "burgers2d" || name == "burgers2d_desk") {
    p.problem = "burgers2d";
    p.x_lo = 0.0, p.x_hi = 1.0, p.coeff = 0.005, p.t_end = 1.0, p.dt = 1e-3;
    p.sigma = 1e-3;
    p.n_train = 20, p.n_val = 5, p.n_test = 5;
    p.ic_a_mean = 1.0, p.ic_a_var = 0.01, p.ic_s_mean = 0.2, p.ic_s_var = 1e-4;
    p.points = 128, p.obs_every = 1;
    if (name == "burgers2d_desk") p.points = 64, p.obs_every = 10;
  } else {
    throw UsageError("unknown problem preset '" + name + "'");
  }
  return p;
}

std::vector<std::string> problem_preset_names() {
  return {"advection", "advection_desk", "kdv", "kdv_desk", "burgers2d", "burgers2d_desk"};
}

Boundary problem_boundary(const std::string& problem) {
  if (problem == "advection" || problem == "kdv") return Boundary::kPeriodic;
  if (problem == "burgers2d") return Boundary::kDirichlet;
  throw UsageError("unknown problem '" + problem + "' (expected advection, kdv or burgers2d)");
}

GridSpec problem_grid(const std::string& problem, std::size_t points, double lo, double hi) {
  const Boundary b = problem_boundary(problem);
  return problem == "burgers2d" ? make_grid_2d(points, lo, hi, b) : make_grid_1d(points, lo, hi, b);
}

GridSpec problem_grid(const ProblemSpec& spec) { return problem_grid(spec.problem, spec.points, spec.x_lo, spec.x_hi); }

Rhs problem_rhs(const std::string& problem, const GridSpec& grid, double coeff) {
  const double dx = grid.spacing(0);
  if (problem == "advection") {
    return [coeff, dx](std::span<const double> u, std::span<double> out) { advect_rhs(u, coeff, dx, out); };
  }
  if (problem == "kdv") {
    return [coeff, dx](std::span<const double> u, std::span<double> out) { kdv_rhs(u, coeff, dx, out); };
  }
  if (problem == "burgers2d") {
    const std::size_t n = grid.points.at(0);
    return [n, coeff, dx](std::span<const double> u, std::span<double> out) { burgers2d_rhs(u, n, coeff, dx, out); };
  }
  throw UsageError("unknown problem '" + problem + "'");
}

std::vector<double> sample_initial_condition(const ProblemSpec& spec, const GridSpec& grid, Rng& rng,
                                             nlohmann::json& params) {
  std::vector<double> u(grid.n_y());
  if (spec.problem == "advection") {
    const double w = spec.ic_w_lo + (spec.ic_w_hi - spec.ic_w_lo) * rng.uniform();
    params["w"] = w;
    const double L = grid.hi[0] - grid.lo[0];
    for (std::size_t j = 0; j < u.size(); ++j) {
      // pulse centred on the periodic seam, distance measured around the circle
      double d = std::fmod(grid.coord(0, j) - grid.lo[0], L);
      d = std::min(d, L - d);
      u[j] = std::exp(-(d / w) * (d / w));
    }
  } else if (spec.problem == "kdv") {
    const double a = spec.ic_a_mean + std::sqrt(spec.ic_a_var) * rng.normal();
    const double s = spec.ic_s_mean + std::sqrt(spec.ic_s_var) * rng.normal();
    params["a"] = a;
    params["s"] = s;
    for (std::size_t j = 0; j < u.size(); ++j) {
      const double x = grid.coord(0, j);
      u[j] = a * std::cos(std::numbers::pi * x) * std::exp(-(x - 7.5) * (x - 7.5) / (s * s));
    }
  } else if (spec.problem == "burgers2d") {
    const double a = spec.ic_a_mean + std::sqrt(spec.ic_a_var) * rng.normal();
    const double s = spec.ic_s_mean + std::sqrt(spec.ic_s_var) * rng.normal();
    params["a"] = a;
    params["s"] = s;
    const std::size_t n = grid.points[0];
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        const bool edge = i == 0 || j == 0 || i + 1 == n || j + 1 == n;
        const double x1 = grid.coord(0, i) - 0.3, x2 = grid.coord(1, j) - 0.3;
        u[i * n + j] = edge ? 0.0 : a * std::exp(-(x1 * x1 + x2 * x2) / (s * s));
      }
    }
  } else {
    throw UsageError("unknown problem '" + spec.problem + "'");
  }
  return u;
}

Trajectory simulate(const ProblemSpec& spec, const GridSpec& grid, std::span<const double> u0) {
  const auto times = uniform_times(0.0, spec.dt * static_cast<double>(spec.obs_every * (spec.n_t() - 1)), spec.n_t());
  return integrate_rk4(problem_rhs(spec.problem, grid, spec.coeff), u0, times, spec.obs_every);
}

Dataset generate_dataset(const ProblemSpec& spec, std::size_t threads) {
  if (spec.sigma < 0.0) throw UsageError("generate: sigma must be non-negative");
  const GridSpec grid = problem_grid(spec);
  const std::size_t n = spec.n_traj();
  if (n == 0) throw UsageError("generate: no trajectories requested");
  Dataset ds;
  ds.grid = grid;
  ds.sigma = spec.sigma;
  ds.trajectories.resize(n);
  std::vector<nlohmann::json> params(n, nlohmann::json::object());
  parallel_for(n, threads, [&](std::size_t k) {
    Rng ic_rng(spec.seed, 2 * k);
    Rng noise_rng(spec.seed, 2 * k + 1);
    const auto u0 = sample_initial_condition(spec, grid, ic_rng, params[k]);
    ds.trajectories[k] = corrupt(simulate(spec, grid, u0), spec.sigma, noise_rng);
  });
  for (std::size_t k = 0; k < n; ++k) {
    ds.split.push_back(k < spec.n_train ? "train" : k < spec.n_train + spec.n_val ? "val" : "test");
  }
  ds.meta = {{"problem", spec.problem}, {"coeff", spec.coeff},        {"dt", spec.dt},
             {"obs_every", spec.obs_every}, {"t_end", spec.t_end},   {"seed", spec.seed},
             {"initial_conditions", params}};
  return ds;
}

}  // namespace mssde
