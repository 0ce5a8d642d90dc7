// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "datagen/grid.hpp"
#include "datagen/pde.hpp"
#include "json.hpp"

namespace mssde {

struct Dataset {
  GridSpec grid;
  std::vector<Trajectory> trajectories;
  std::vector<std::string> split;  // "train" | "val" | "test", one per trajectory
  double sigma = 0.0;              // < 0 when unknown
  nlohmann::json meta = nlohmann::json::object();

  std::vector<std::size_t> indices(const std::string& which) const;
  std::size_t n_t() const { return trajectories.empty() ? 0 : trajectories.front().n_t(); }
  void validate() const;

  friend bool operator==(const Dataset& a, const Dataset& b) {
    return a.grid == b.grid && a.trajectories == b.trajectories && a.split == b.split && a.sigma == b.sigma &&
           a.meta == b.meta;
  }
};

inline constexpr std::uint32_t kDatasetVersion = 1;

/// Binary MST1 payload at `path`, metadata sidecar at `path + ".json"`.
void write_dataset(const std::string& path, const Dataset& ds);
/// Throws DataError on bad magic, version, truncation or inconsistent sidecar.
Dataset read_dataset(const std::string& path);

}  // namespace mssde
