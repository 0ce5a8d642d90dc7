// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>

#include "compute/tensor.hpp"

namespace mssde {

/// Philox4x32-10 counter-based generator. The seed is the key; `stream` occupies
/// the upper half of the counter so substreams never overlap.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0, std::uint64_t stream = 0);

  Rng substream(std::uint64_t stream) const { return Rng(seed_, stream); }

  std::uint32_t next_u32();
  std::uint64_t next_u64();
  /// Uniform on the open interval (0, 1).
  double uniform();
  double normal();
  Tensor normal(const Shape& shape);

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream() const noexcept { return stream_; }

  /// Position in the stream, enough to restore the generator exactly.
  struct State {
    std::uint64_t seed, stream, counter;
    std::uint32_t lane;
    bool has_spare;
    double spare;
  };
  State state() const;
  static Rng from_state(const State& s);

 private:
  void refill();

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
  std::array<std::uint32_t, 4> block_{};
  std::uint32_t lane_ = 4;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Raw Philox4x32-10 block function, exposed for known-answer tests.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr, std::array<std::uint32_t, 2> key);

}  // namespace mssde
