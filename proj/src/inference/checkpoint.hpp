// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>

#include "json.hpp"

#include "compute/adam.hpp"
#include "model/config.hpp"

namespace mssde::inference {

/// Model parameters plus the optimiser state needed to resume a stage.
struct Checkpoint {
  ModelConfig model;
  ParamMap params;
  std::size_t stage = 0;       // n_eta of the stage being trained
  std::uint64_t step = 0;      // completed optimiser steps in the stage
  double val_eps = -1.0;       // validation error of `params`, < 0 if not evaluated
  ParamMap adam_m, adam_v;     // empty in model-only checkpoints
  ParamMap best_params;        // best validation parameters so far in the stage
  double best_val = -1.0;
  std::uint64_t best_step = 0;
  nlohmann::json meta = nlohmann::json::object();  // run config snapshot
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

/// "MSCK" magic, version, JSON header, then named tensor groups.
void write_checkpoint(const std::string& path, const Checkpoint& ck);
Checkpoint read_checkpoint(const std::string& path);

}  // namespace mssde::inference
