// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "compute/tensor.hpp"

namespace mssde {

using ParamMap = std::map<std::string, Tensor>;

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double decay = 0.9;
  std::uint64_t decay_interval = 2000;
};

/// Adam with a step-wise exponential learning-rate schedule:
/// lr_k = lr0 * decay^floor(k / interval), k = completed steps.
class Adam {
 public:
  explicit Adam(AdamConfig cfg = {});

  /// Updates every entry of `params` that has a gradient. Throws NumericalError
  /// naming the parameter if a gradient is not finite.
  void step(ParamMap& params, const ParamMap& grads);

  double lr() const noexcept;
  std::uint64_t steps() const noexcept { return steps_; }
  const AdamConfig& config() const noexcept { return cfg_; }

  ParamMap& first_moments() noexcept { return m_; }
  ParamMap& second_moments() noexcept { return v_; }
  const ParamMap& first_moments() const noexcept { return m_; }
  const ParamMap& second_moments() const noexcept { return v_; }
  void set_steps(std::uint64_t s) noexcept { steps_ = s; }

 private:
  AdamConfig cfg_;
  std::uint64_t steps_ = 0;
  ParamMap m_, v_;
};

}  // namespace mssde
