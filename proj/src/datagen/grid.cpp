// SPDX-License-Identifier: Apache-2.0
#include "datagen/grid.hpp"

#include "core/error.hpp"

namespace mssde {

std::string boundary_name(Boundary b) { return b == Boundary::kPeriodic ? "periodic" : "dirichlet"; }

Boundary parse_boundary(const std::string& s) {
  if (s == "periodic") return Boundary::kPeriodic;
  if (s == "dirichlet") return Boundary::kDirichlet;
  throw DataError("unknown boundary type '" + s + "'");
}

std::size_t GridSpec::points_total() const {
  std::size_t n = 1;
  for (auto p : points) n *= p;
  return n;
}

double GridSpec::spacing(std::size_t axis) const {
  const double extent = hi.at(axis) - lo.at(axis);
  const std::size_t n = points.at(axis);
  return boundary == Boundary::kPeriodic ? extent / static_cast<double>(n) : extent / static_cast<double>(n - 1);
}

double GridSpec::coord(std::size_t axis, std::size_t i) const {
  return lo.at(axis) + spacing(axis) * static_cast<double>(i);
}

void GridSpec::validate() const {
  if (dim != 1 && dim != 2) throw DataError("grid: dimension must be 1 or 2");
  if (points.size() != dim || lo.size() != dim || hi.size() != dim) throw DataError("grid: per-axis sizes mismatch");
  if (fields == 0) throw DataError("grid: need at least one field");
  for (std::size_t a = 0; a < dim; ++a) {
    if (points[a] < 2) throw DataError("grid: need at least two points per axis");
    if (!(hi[a] > lo[a])) throw DataError("grid: empty domain on axis " + std::to_string(a));
  }
}

GridSpec make_grid_1d(std::size_t n, double lo, double hi, Boundary b) {
  GridSpec g{1, 1, {n}, {lo}, {hi}, b};
  g.validate();
  return g;
}

GridSpec make_grid_2d(std::size_t n, double lo, double hi, Boundary b) {
  GridSpec g{2, 1, {n, n}, {lo, lo}, {hi, hi}, b};
  g.validate();
  return g;
}

}  // namespace mssde
