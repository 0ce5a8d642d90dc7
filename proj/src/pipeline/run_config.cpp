// SPDX-License-Identifier: Apache-2.0
#include "pipeline/run_config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "core/error.hpp"

namespace mssde::pipeline {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

[[noreturn]] void bad_value(const std::string& key, const std::string& v, const char* what) {
  throw UsageError("config: '" + key + "' expects " + what + ", got '" + v + "'");
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) bad_value(key, v, "a non-negative integer");
  return out;
}

double parse_real(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) bad_value(key, v, "a number");
  return out;
}

}  // namespace

const std::vector<KeySpec>& RunConfig::keys() {
  static const std::vector<KeySpec> k = {
      {"problem", "advection_desk", "generator preset: advection, advection_desk, kdv, kdv_desk, burgers2d, burgers2d_desk"},
      {"points", "", "grid points per axis (preset when unset)"},
      {"x_lo", "", "domain start"},
      {"x_hi", "", "domain end"},
      {"coeff", "", "advection speed or viscosity/dispersion"},
      {"t_end", "", "final time"},
      {"dt", "", "generator RK4 step"},
      {"obs_every", "", "generator steps between observations"},
      {"sigma", "", "observation noise standard deviation"},
      {"n_train", "", "training trajectories"},
      {"n_val", "", "validation trajectories"},
      {"n_test", "", "test trajectories"},
      {"ic_w_lo", "", "advection pulse width lower bound"},
      {"ic_w_hi", "", "advection pulse width upper bound"},
      {"ic_a_mean", "", "KdV/Burgers amplitude mean"},
      {"ic_a_var", "", "KdV/Burgers amplitude variance"},
      {"ic_s_mean", "", "KdV/Burgers width mean"},
      {"ic_s_var", "", "KdV/Burgers width variance"},
      {"seed", "0", "master seed"},
      {"dataset", "", "dataset path (default <out>/dataset.mst)"},
      {"coarse", "20", "coarse points per axis"},
      {"n_eta", "2", "largest micro state size trained"},
      {"wide_kernel", "true", "smoothing kernel 6s+1 (else 4s+1)"},
      {"enc_filters", "4,16,32", "micro encoder channels"},
      {"enc_kernel", "9", "micro encoder kernel size"},
      {"stencil_q", "2", "macro drift stencil half width"},
      {"macro_hidden", "64", "macro drift hidden units"},
      {"macro_layers", "3", "macro drift hidden layers"},
      {"micro_hidden", "64", "micro drift hidden units"},
      {"micro_layers", "3", "micro drift hidden layers"},
      {"positional", "false", "append coarse-grid position features to the macro drift"},
      {"m", "10", "observations per segment"},
      {"n_quad", "64", "quadrature nodes per segment"},
      {"batch", "8", "segments per optimiser step"},
      {"steps", "2000", "optimiser steps per stage"},
      {"lr_first", "1e-3", "learning rate of stage n_eta = 0"},
      {"lr_later", "1e-4", "learning rate of later stages"},
      {"decay", "0.9", "learning-rate decay factor"},
      {"decay_interval", "2000", "steps between decays"},
      {"val_every", "250", "steps between validations"},
      {"val_paths", "16", "sample paths for validation"},
      {"val_horizon", "0", "validation prediction span (0 = whole trajectory)"},
      {"chunk", "8", "segments per gradient work item"},
      {"log_every", "10", "steps between log rows"},
      {"checkpoint", "", "checkpoint for predict/evaluate (default <out>/best.ckpt)"},
      {"split", "test", "trajectories to predict/evaluate: train, val or test"},
      {"n_paths", "64", "prediction sample paths"},
      {"predict_dt", "0", "prediction integrator step (0 = observation spacing)"},
      {"horizon", "0", "prediction span (0 = whole trajectory)"},
      {"methods", "coarse_dns,dmd,sindy", "baselines to run"},
      {"n_latent", "0", "baseline latent size (0 = from checkpoint, else coarse grid + n_eta)"},
      {"dmd_lambda", "0.01", "DMD Tikhonov parameter"},
      {"sindy_orders", "1,2", "SINDy polynomial orders searched"},
      {"sindy_thresholds", "0.001,0.01,0.1,1", "SINDy thresholds searched"},
  };
  return k;
}

RunConfig::RunConfig() {
  for (const auto& k : keys()) values_[k.name] = k.fallback;
}

RunConfig RunConfig::parse(std::string_view text, const std::string& origin) {
  RunConfig c;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t no = 0;
  while (std::getline(in, line)) {
    ++no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw UsageError(origin + ":" + std::to_string(no) + ": expected key = value");
    }
    const std::string key = trim(std::string_view(t).substr(0, eq));
    if (c.given_.count(key)) throw UsageError(origin + ":" + std::to_string(no) + ": repeated key '" + key + "'");
    try {
      c.set(key, trim(std::string_view(t).substr(eq + 1)));
    } catch (const UsageError& e) {
      throw UsageError(origin + ":" + std::to_string(no) + ": " + e.what());
    }
  }
  return c;
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("config: cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path);
}

void RunConfig::set(const std::string& key, const std::string& value) {
  const auto it = values_.find(key);
  if (it == values_.end()) throw UsageError("config: unknown key '" + key + "'");
  it->second = value;
  given_.insert(key);
}

bool RunConfig::is_set(const std::string& key) const { return !str(key).empty(); }

const std::string& RunConfig::str(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw UsageError("config: unknown key '" + key + "'");
  return it->second;
}

std::size_t RunConfig::size(const std::string& key) const { return static_cast<std::size_t>(u64(key)); }

std::uint64_t RunConfig::u64(const std::string& key) const { return parse_u64(key, str(key)); }

double RunConfig::real(const std::string& key) const { return parse_real(key, str(key)); }

bool RunConfig::flag(const std::string& key) const {
  const std::string& v = str(key);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  bad_value(key, v, "true or false");
}

std::vector<std::size_t> RunConfig::sizes(const std::string& key) const {
  std::vector<std::size_t> out;
  for (const auto& w : split_list(str(key))) out.push_back(static_cast<std::size_t>(parse_u64(key, w)));
  return out;
}

std::vector<double> RunConfig::reals(const std::string& key) const {
  std::vector<double> out;
  for (const auto& w : split_list(str(key))) out.push_back(parse_real(key, w));
  return out;
}

std::vector<std::string> RunConfig::words(const std::string& key) const { return split_list(str(key)); }

std::string RunConfig::resolved() const {
  std::string out;
  for (const auto& [k, v] : values_) out += k + " = " + v + "\n";
  return out;
}

nlohmann::json RunConfig::to_json() const {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [k, v] : values_) j[k] = v;
  return j;
}

}  // namespace mssde::pipeline
