// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "datagen/dataset.hpp"
#include "inference/checkpoint.hpp"
#include "inference/elbo.hpp"

namespace mssde::inference {

struct TrainConfig {
  std::size_t n_eta_target = 2;
  std::size_t steps_per_stage = 2000;
  std::size_t batch = 8;  // segments per step
  std::size_t m = 10;     // observations per segment
  std::size_t n_quad = 64;
  double lr_first = 1e-3;  // stage n_eta = 0
  double lr_later = 1e-4;
  double decay = 0.9;
  std::uint64_t decay_interval = 2000;
  std::size_t val_every = 250;
  std::size_t val_paths = 16;
  double val_horizon = 0.0;  // prediction span for validation; 0 = whole trajectory
  std::size_t chunk = 8;     // segments per gradient work item
  std::size_t log_every = 10;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  std::string out_dir;  // checkpoints are written here when non-empty
  nlohmann::json run_config;  // copied into checkpoint metadata when set
};

struct LogRow {
  std::uint64_t step = 0;  // monotone across stages
  std::size_t stage = 0;
  double loglik = 0.0, integral = 0.0, elbo = 0.0;  // batch sums
  double val_eps = -1.0;                            // < 0 when not evaluated at this step
  double lr = 0.0;
};

using LogFn = std::function<void(const LogRow&)>;

/// One SegmentData per segment of each listed trajectory, in order.
std::vector<SegmentData> build_segments(const Dataset& ds, const std::vector<std::size_t>& traj, std::size_t m);

/// Times of `ds` within `horizon` of the first (all when horizon <= 0).
std::vector<double> horizon_times(const Dataset& ds, double horizon);

/// Mean over trajectories and prediction times of the normalised error of
/// the predictive mean started from each trajectory's first observation.
double validation_error(const Dataset& ds, const std::vector<std::size_t>& traj, const ModelConfig& cfg,
                        const ParamMap& params, std::size_t n_paths, double horizon, std::uint64_t seed,
                        std::size_t threads = 1);

/// Hierarchical training: n_eta = 0 at lr_first, then each n_eta up to the
/// target warm-started from the previous stage's best-validation parameters
/// at lr_later. `base.n_eta` is ignored. Returns the best checkpoint of every
/// stage. With `resume`, training continues from that state.
std::vector<Checkpoint> train(const Dataset& ds, const ModelConfig& base, const TrainConfig& tc,
                              const LogFn& log = {}, const Checkpoint* resume = nullptr);

/// Model settings derived from a dataset: grid, observation noise, time scale.
ModelConfig model_for_dataset(const Dataset& ds, ModelConfig base);

nlohmann::json train_config_json(const TrainConfig& tc);

}  // namespace mssde::inference
