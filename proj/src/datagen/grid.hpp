// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace mssde {

enum class Boundary { kPeriodic, kDirichlet };

std::string boundary_name(Boundary b);
Boundary parse_boundary(const std::string& s);

/// Tensor-product grid. Periodic axes exclude the right endpoint; Dirichlet
/// axes include both endpoints.
struct GridSpec {
  std::size_t dim = 1;
  std::size_t fields = 1;
  std::vector<std::size_t> points;
  std::vector<double> lo, hi;
  Boundary boundary = Boundary::kPeriodic;

  std::size_t points_total() const;
  std::size_t n_y() const { return fields * points_total(); }
  double spacing(std::size_t axis) const;
  double coord(std::size_t axis, std::size_t i) const;
  void validate() const;

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

GridSpec make_grid_1d(std::size_t n, double lo, double hi, Boundary b);
GridSpec make_grid_2d(std::size_t n, double lo, double hi, Boundary b);

}  // namespace mssde
