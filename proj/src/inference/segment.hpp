// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <vector>

namespace mssde::inference {

struct Segment {
  std::size_t index = 0;
  std::vector<std::size_t> obs;  // 0-based observation indices, increasing
  std::vector<bool> owned;       // parallel to obs
};

/// Splits n_t observations into ceil(n_t / m) ownership chunks of m; every
/// segment after the first also starts at the last observation of the
/// previous chunk, which stays owned by the earlier segment.
std::vector<Segment> segment(std::size_t n_t, std::size_t m);

}  // namespace mssde::inference
