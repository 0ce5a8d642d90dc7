// SPDX-License-Identifier: Apache-2.0
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mssde/mssde.h"

namespace {

void log_line(const char* line, void*) { std::fprintf(stderr, "mssde: %s\n", line); }

int fail(mssde_status s) {
  std::fprintf(stderr, "mssde: error: %s\n", mssde_last_error());
  return static_cast<int>(s);
}

int print_keys() {
  size_t n = 0;
  mssde_config_keys(nullptr, 0, &n);
  std::string buf(n, '\0');
  mssde_config_keys(buf.data(), buf.size(), nullptr);
  buf.resize(n - 1);
  std::cout << buf;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multiscale latent SDE surrogates: data generation, training, prediction and baselines"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path, out_dir = ".";
  std::string seed;
  std::size_t threads = 0;
  std::vector<std::string> sets;
  bool resume = false;

  app.add_option("--config", config_path, "key = value config file")->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "master seed (overrides the config)");
  app.add_option("--threads", threads, "worker threads")->envname("MSSDE_THREADS")->check(CLI::PositiveNumber);
  app.add_option("--out", out_dir, "output directory")->capture_default_str();
  app.add_option("--set", sets, "override one config key, key=value (repeatable)");

  auto* gen = app.add_subcommand("generate", "simulate and write a dataset");
  auto* train = app.add_subcommand("train", "train the staged model");
  train->add_flag("--resume", resume, "continue from <out>/last.ckpt");
  auto* pred = app.add_subcommand("predict", "posterior predictions, errors and spectra");
  auto* eval = app.add_subcommand("evaluate", "error report and summary of a checkpoint");
  auto* base = app.add_subcommand("baseline", "coarse DNS, DMD and POD-SINDy error reports");
  auto* keys = app.add_subcommand("keys", "list config keys with defaults");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : MSSDE_ERR_USAGE;
  }
  if (keys->parsed()) return print_keys();

  mssde_config* cfg = nullptr;
  mssde_status s = mssde_config_create(&cfg);
  if (s != MSSDE_OK) return fail(s);
  struct Guard {
    mssde_config* c;
    ~Guard() { mssde_config_destroy(c); }
  } guard{cfg};

  if (!config_path.empty() && (s = mssde_config_load(cfg, config_path.c_str())) != MSSDE_OK) return fail(s);
  for (const auto& kv : sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      std::fprintf(stderr, "mssde: error: --set expects key=value, got '%s'\n", kv.c_str());
      return MSSDE_ERR_USAGE;
    }
    if ((s = mssde_config_set(cfg, kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str())) != MSSDE_OK) return fail(s);
  }
  if (!seed.empty() && (s = mssde_config_set(cfg, "seed", seed.c_str())) != MSSDE_OK) return fail(s);

  mssde_run_options opt{out_dir.c_str(), threads, resume ? 1 : 0, &log_line, nullptr};
  if (gen->parsed()) s = mssde_generate(cfg, &opt);
  else if (train->parsed()) s = mssde_train(cfg, &opt);
  else if (pred->parsed()) s = mssde_predict(cfg, &opt);
  else if (eval->parsed()) s = mssde_evaluate(cfg, &opt);
  else if (base->parsed()) s = mssde_baseline(cfg, &opt);
  return s == MSSDE_OK ? 0 : fail(s);
}
