// SPDX-License-Identifier: Apache-2.0
#include "datagen/pde.hpp"

#include <cmath>

#include "core/error.hpp"

namespace mssde {

void advect_rhs(std::span<const double> u, double c, double dx, std::span<double> out) {
  const std::size_t n = u.size();
  if (n < 3) throw ShapeError("advect_rhs: need at least 3 grid points, got " + std::to_string(n));
  const double k = -c / (2.0 * dx);
  out[0] = k * (u[1] - u[n - 1]);
  for (std::size_t j = 1; j + 1 < n; ++j) out[j] = k * (u[j + 1] - u[j - 1]);
  out[n - 1] = k * (u[0] - u[n - 2]);
}

void kdv_rhs(std::span<const double> u, double nu, double dx, std::span<double> out) {
  const std::size_t n = u.size();
  if (n < 5) throw ShapeError("kdv_rhs: need at least 5 grid points, got " + std::to_string(n));
  const double a = 1.0 / (2.0 * dx);
  const double b = nu / (dx * dx * dx);
  for (std::size_t j = 0; j < n; ++j) {
    const double um1 = u[(j + n - 1) % n];
    const double up1 = u[(j + 1) % n];
    const double up2 = u[(j + 2) % n];
    out[j] = -u[j] * (up1 - um1) * a - b * (up2 - 3.0 * up1 + 3.0 * u[j] - um1);
  }
}

void burgers2d_rhs(std::span<const double> u, std::size_t n, double nu, double dx, std::span<double> out) {
  if (u.size() != n * n) {
    throw ShapeError("burgers2d_rhs: state of size " + std::to_string(u.size()) + " is not a square " +
                     std::to_string(n) + "x" + std::to_string(n) + " grid");
  }
  const double a = 1.0 / (2.0 * dx);
  const double b = nu / (dx * dx);
  for (std::size_t k = 0; k < n * n; ++k) out[k] = 0.0;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    for (std::size_t j = 1; j + 1 < n; ++j) {
      const double c = u[i * n + j];
      const double n_ = u[(i - 1) * n + j], s = u[(i + 1) * n + j];
      const double w = u[i * n + j - 1], e = u[i * n + j + 1];
      out[i * n + j] = -c * ((s - n_) * a + (e - w) * a) + b * (s - 2.0 * c + n_ + e - 2.0 * c + w);
    }
  }
}

Tensor advect_rhs(const Tensor& u, double c, double dx) {
  Tensor out(u.shape());
  advect_rhs(u.values(), c, dx, out.values());
  return out;
}

Tensor kdv_rhs(const Tensor& u, double nu, double dx) {
  Tensor out(u.shape());
  kdv_rhs(u.values(), nu, dx, out.values());
  return out;
}

Tensor burgers2d_rhs(const Tensor& u, double nu, double dx) {
  if (u.rank() != 2 || u.dim(0) != u.dim(1)) {
    throw ShapeError("burgers2d_rhs: expected a square grid, got " + shape_str(u.shape()));
  }
  Tensor out(u.shape());
  burgers2d_rhs(u.values(), u.dim(0), nu, dx, out.values());
  return out;
}

std::vector<double> uniform_times(double t0, double t1, std::size_t n_t) {
  if (n_t < 1) throw UsageError("uniform_times: need at least one time");
  std::vector<double> t(n_t);
  for (std::size_t i = 0; i < n_t; ++i) {
    t[i] = n_t == 1 ? t0 : t0 + (t1 - t0) * static_cast<double>(i) / static_cast<double>(n_t - 1);
  }
  return t;
}

Trajectory integrate_rk4(const Rhs& rhs, std::span<const double> u0, const std::vector<double>& times,
                         std::size_t substeps) {
  if (times.empty()) throw UsageError("integrate_rk4: no output times");
  if (substeps == 0) throw UsageError("integrate_rk4: substeps must be positive");
  const std::size_t n = u0.size();
  const std::size_t n_t = times.size();
  if (n_t > 1) {
    const double dt0 = times[1] - times[0];
    if (!(dt0 > 0.0)) throw UsageError("integrate_rk4: times must be strictly increasing");
    for (std::size_t i = 1; i < n_t; ++i) {
      if (std::abs((times[i] - times[i - 1]) - dt0) > 1e-9 * std::max(1.0, std::abs(dt0)) + 1e-12) {
        throw UsageError("integrate_rk4: output times must be uniformly spaced");
      }
    }
  }
  Trajectory traj{times, Tensor(Shape{n_t, n})};
  std::vector<double> u(u0.begin(), u0.end()), k1(n), k2(n), k3(n), k4(n), tmp(n);
  std::copy(u.begin(), u.end(), traj.states.data());
  std::size_t step = 0;
  for (std::size_t i = 1; i < n_t; ++i) {
    const double h = (times[i] - times[i - 1]) / static_cast<double>(substeps);
    for (std::size_t s = 0; s < substeps; ++s, ++step) {
      rhs(u, k1);
      for (std::size_t j = 0; j < n; ++j) tmp[j] = u[j] + 0.5 * h * k1[j];
      rhs(tmp, k2);
      for (std::size_t j = 0; j < n; ++j) tmp[j] = u[j] + 0.5 * h * k2[j];
      rhs(tmp, k3);
      for (std::size_t j = 0; j < n; ++j) tmp[j] = u[j] + h * k3[j];
      rhs(tmp, k4);
      bool finite = true;
      for (std::size_t j = 0; j < n; ++j) {
        u[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        finite = finite && std::isfinite(u[j]);
      }
      if (!finite) throw NumericalError("integrate_rk4: non-finite state at step " + std::to_string(step + 1));
    }
    std::copy(u.begin(), u.end(), traj.states.data() + i * n);
  }
  return traj;
}

Trajectory corrupt(const Trajectory& traj, double sigma, Rng& rng) {
  if (sigma < 0.0) throw UsageError("corrupt: noise standard deviation must be non-negative");
  Trajectory out = traj;
  if (sigma == 0.0) return out;
  for (auto& v : out.states.values()) v += sigma * rng.normal();
  return out;
}

}  // namespace mssde
