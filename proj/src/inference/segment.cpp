// SPDX-License-Identifier: Apache-2.0
#include "inference/segment.hpp"

#include <string>

#include "core/error.hpp"

namespace mssde::inference {

std::vector<Segment> segment(std::size_t n_t, std::size_t m) {
  if (m < 2) throw UsageError("segment: segment length m must be at least 2, got " + std::to_string(m));
  if (n_t < 2) throw UsageError("segment: need at least two observations");
  std::vector<Segment> out;
  for (std::size_t start = 0, k = 0; start < n_t; start += m, ++k) {
    Segment s;
    s.index = k;
    if (k > 0) {
      s.obs.push_back(start - 1);
      s.owned.push_back(false);
    }
    for (std::size_t i = start; i < std::min(n_t, start + m); ++i) {
      s.obs.push_back(i);
      s.owned.push_back(true);
    }
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace mssde::inference
