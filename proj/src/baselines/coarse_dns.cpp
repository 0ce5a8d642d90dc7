// SPDX-License-Identifier: Apache-2.0
#include "baselines/coarse_dns.hpp"

#include <algorithm>
#include <array>

#include "core/error.hpp"
#include "datagen/problems.hpp"

namespace mssde::baselines {

namespace {

struct Stencil {
  std::array<std::size_t, 4> idx{};
  std::array<double, 4> w{};
  std::size_t count = 0;
};

// Weights of source nodes for destination node j along one axis.
Stencil stencil(std::size_t n_src, std::size_t n_dst, std::size_t j, bool periodic) {
  const std::size_t Ns = periodic ? n_src : n_src - 1, Nd = periodic ? n_dst : n_dst - 1;
  const std::size_t num = j * Ns;
  const std::size_t i = num / Nd, rem = num % Nd;
  Stencil s;
  if (rem == 0) {
    s.idx[0] = i % n_src;
    s.w[0] = 1.0;
    s.count = 1;
    return s;
  }
  const double u = static_cast<double>(rem) / static_cast<double>(Nd);
  if (!periodic && n_src < 4) {
    s.idx = {i, i + 1, 0, 0};
    s.w = {1.0 - u, u, 0.0, 0.0};
    s.count = 2;
    return s;
  }
  long start = static_cast<long>(i) - 1;
  if (!periodic) start = std::clamp(start, 0L, static_cast<long>(n_src) - 4);
  const double x = static_cast<double>(static_cast<long>(i) - start) + u;
  s.w = {-(x - 1.0) * (x - 2.0) * (x - 3.0) / 6.0, x * (x - 2.0) * (x - 3.0) / 2.0,
         -x * (x - 1.0) * (x - 3.0) / 2.0, x * (x - 1.0) * (x - 2.0) / 6.0};
  for (std::size_t k = 0; k < 4; ++k) {
    const long n = static_cast<long>(n_src);
    s.idx[k] = static_cast<std::size_t>(((start + static_cast<long>(k)) % n + n) % n);
  }
  s.count = 4;
  return s;
}

// Data laid out [outer, n_src, inner] to [outer, n_dst, inner].
std::vector<double> along_axis(std::span<const double> in, std::size_t n_src, std::size_t n_dst, std::size_t outer,
                               std::size_t inner, bool periodic) {
  std::vector<double> out(outer * n_dst * inner);
  for (std::size_t j = 0; j < n_dst; ++j) {
    const Stencil s = stencil(n_src, n_dst, j, periodic);
    for (std::size_t o = 0; o < outer; ++o) {
      for (std::size_t q = 0; q < inner; ++q) {
        double v = 0.0;
        for (std::size_t k = 0; k < s.count; ++k) v += s.w[k] * in[(o * n_src + s.idx[k]) * inner + q];
        out[(o * n_dst + j) * inner + q] = v;
      }
    }
  }
  return out;
}

void check_same_domain(const GridSpec& a, const GridSpec& b) {
  if (a.dim != b.dim || a.fields != b.fields || a.lo != b.lo || a.hi != b.hi || a.boundary != b.boundary) {
    throw ShapeError("interpolate_cubic: grids must share dimension, fields, domain and boundary");
  }
}

}  // namespace

GridSpec coarse_grid(const GridSpec& fine, std::size_t points) {
  GridSpec g = fine;
  for (auto& p : g.points) p = points;
  g.validate();
  return g;
}

std::vector<double> interpolate_cubic(const GridSpec& from, std::span<const double> values, const GridSpec& to) {
  check_same_domain(from, to);
  if (values.size() != from.n_y()) throw ShapeError("interpolate_cubic: value count does not match the source grid");
  if (from == to) return {values.begin(), values.end()};
  const bool periodic = from.boundary == Boundary::kPeriodic;
  std::vector<double> cur(values.begin(), values.end());
  // field-major; axis 0 is the slowest within a field
  std::vector<std::size_t> shape = from.points;
  for (std::size_t axis = 0; axis < from.dim; ++axis) {
    std::size_t outer = from.fields, inner = 1;
    for (std::size_t a = 0; a < axis; ++a) outer *= shape[a];
    for (std::size_t a = axis + 1; a < from.dim; ++a) inner *= shape[a];
    cur = along_axis(cur, shape[axis], to.points[axis], outer, inner, periodic);
    shape[axis] = to.points[axis];
  }
  return cur;
}

std::size_t matched_coarse_points(const GridSpec& fine, std::size_t n_latent) {
  const std::size_t n = fine.points.at(0);
  const bool periodic = fine.boundary == Boundary::kPeriodic;
  for (std::size_t c = n; c >= 2; --c) {
    if (periodic && n % c != 0) continue;
    std::size_t size = fine.fields;
    for (std::size_t a = 0; a < fine.dim; ++a) size *= c;
    if (size <= n_latent) return c;
  }
  throw UsageError("coarse DNS: latent size " + std::to_string(n_latent) + " too small for any coarse grid");
}

Trajectory coarse_dns(const std::string& problem, double coeff, const GridSpec& fine, std::size_t points,
                      std::span<const double> y0, const std::vector<double>& times, std::size_t substeps) {
  if (fine.boundary == Boundary::kPeriodic && fine.points.at(0) % points != 0) {
    throw UsageError("coarse DNS: " + std::to_string(points) + " points do not divide the fine grid");
  }
  const GridSpec coarse = coarse_grid(fine, points);
  const std::vector<double> u0 = interpolate_cubic(fine, y0, coarse);
  const Trajectory tc = integrate_rk4(problem_rhs(problem, coarse, coeff), u0, times, substeps);
  if (coarse == fine) return tc;
  Trajectory out;
  out.times = tc.times;
  out.states = Tensor(Shape{tc.n_t(), fine.n_y()});
  for (std::size_t k = 0; k < tc.n_t(); ++k) {
    const auto f = interpolate_cubic(coarse, tc.state(k), fine);
    std::copy(f.begin(), f.end(), out.states.data() + k * fine.n_y());
  }
  return out;
}

}  // namespace mssde::baselines
