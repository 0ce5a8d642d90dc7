// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <string>
#include <vector>

#include "datagen/problems.hpp"
#include "inference/train.hpp"
#include "pipeline/report.hpp"
#include "pipeline/run_config.hpp"

namespace mssde::pipeline {

struct RunOptions {
  std::string out_dir = ".";
  std::size_t threads = 1;
  bool resume = false;  // train only
  std::function<void(const std::string&)> log;
};

ProblemSpec problem_spec(const RunConfig& c);
ModelConfig model_config(const RunConfig& c);
inference::TrainConfig train_config(const RunConfig& c, const RunOptions& o);

std::string dataset_path(const RunConfig& c, const RunOptions& o);
std::string checkpoint_path(const RunConfig& c, const RunOptions& o);

struct PredictSettings {
  std::size_t n_paths = 64;
  double dt = 0.0;
  double horizon = 0.0;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
};

PredictSettings predict_settings(const RunConfig& c, const RunOptions& o);

/// Predictive-mean error of a trained model on one split.
ErrorReport evaluate_model(const Dataset& ds, const std::string& split, const inference::Checkpoint& ck,
                           const PredictSettings& s, const std::string& method = "model");

struct BaselineSettings {
  std::vector<std::string> methods{"coarse_dns", "dmd", "sindy"};
  std::size_t n_latent = 0;
  double dmd_lambda = 0.01;
  std::vector<std::size_t> sindy_orders{1, 2};
  std::vector<double> sindy_thresholds{1e-3, 1e-2, 1e-1, 1.0};
  double horizon = 0.0;
  std::size_t threads = 1;
};

struct BaselineResult {
  std::vector<ErrorReport> reports;  // one per method, in request order
  nlohmann::json details = nlohmann::json::object();
  std::vector<std::string> warnings;
};

BaselineResult run_baselines(const Dataset& ds, const std::string& split, const BaselineSettings& s);

/// Each writes its files under o.out_dir plus manifest_<command>.json and
/// returns the written paths.
std::vector<std::string> cmd_generate(const RunConfig& c, const RunOptions& o);
std::vector<std::string> cmd_train(const RunConfig& c, const RunOptions& o);
std::vector<std::string> cmd_predict(const RunConfig& c, const RunOptions& o);
std::vector<std::string> cmd_evaluate(const RunConfig& c, const RunOptions& o);
std::vector<std::string> cmd_baseline(const RunConfig& c, const RunOptions& o);

}  // namespace mssde::pipeline
