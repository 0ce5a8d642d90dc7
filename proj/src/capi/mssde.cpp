// SPDX-License-Identifier: Apache-2.0
#include "mssde/mssde.h"

#include <algorithm>
#include <cstring>
#include <exception>
#include <new>
#include <string>

#include "core/error.hpp"
#include "core/parallel.hpp"
#include "datagen/dataset.hpp"
#include "pipeline/commands.hpp"

struct mssde_config {
  mssde::pipeline::RunConfig cfg;
};

struct mssde_dataset {
  mssde::Dataset ds;
};

namespace {

thread_local std::string g_last_error;

mssde_status status_of(mssde::ErrorCode c) {
  switch (c) {
    case mssde::ErrorCode::kUsage:
      return MSSDE_ERR_USAGE;
    case mssde::ErrorCode::kData:
    case mssde::ErrorCode::kShape:
      return MSSDE_ERR_DATA;
    case mssde::ErrorCode::kNumerical:
      return MSSDE_ERR_NUMERICAL;
    default:
      return MSSDE_ERR_INTERNAL;
  }
}

template <class F>
mssde_status guarded(F&& f) {
  try {
    f();
    g_last_error.clear();
    return MSSDE_OK;
  } catch (const mssde::Error& e) {
    g_last_error = e.what();
    return status_of(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return MSSDE_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return MSSDE_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return MSSDE_ERR_INTERNAL;
  }
}

void need(const void* p, const char* what) {
  if (!p) throw mssde::UsageError(std::string(what) + " is NULL");
}

void copy_out(const std::string& s, char* buf, size_t cap, size_t* needed) {
  if (needed) *needed = s.size() + 1;
  if (buf && cap > 0) {
    const size_t n = std::min(cap - 1, s.size());
    std::memcpy(buf, s.data(), n);
    buf[n] = '\0';
  }
}

mssde::pipeline::RunOptions options(const mssde_run_options* opt) {
  mssde::pipeline::RunOptions o;
  if (opt) {
    if (opt->out_dir) o.out_dir = opt->out_dir;
    o.resume = opt->resume != 0;
    if (opt->log) {
      const auto fn = opt->log;
      void* user = opt->log_user;
      o.log = [fn, user](const std::string& line) { fn(line.c_str(), user); };
    }
  }
  o.threads = mssde::resolve_threads(opt ? opt->threads : 0);
  return o;
}

using Command = std::vector<std::string> (*)(const mssde::pipeline::RunConfig&, const mssde::pipeline::RunOptions&);

mssde_status run(Command cmd, const mssde_config* cfg, const mssde_run_options* opt) {
  return guarded([&] {
    need(cfg, "config");
    cmd(cfg->cfg, options(opt));
  });
}

const mssde::Trajectory& trajectory(const mssde_dataset* ds, size_t traj, size_t t) {
  need(ds, "dataset");
  if (traj >= ds->ds.trajectories.size()) throw mssde::UsageError("trajectory index out of range");
  const auto& tr = ds->ds.trajectories[traj];
  if (t >= tr.n_t()) throw mssde::UsageError("time index out of range");
  return tr;
}

}  // namespace

extern "C" {

const char* mssde_version(void) { return "0.1.0"; }

const char* mssde_last_error(void) { return g_last_error.c_str(); }

mssde_status mssde_config_create(mssde_config** out) {
  return guarded([&] {
    need(out, "out");
    *out = new mssde_config{};
  });
}

void mssde_config_destroy(mssde_config* cfg) { delete cfg; }

mssde_status mssde_config_load(mssde_config* cfg, const char* path) {
  return guarded([&] {
    need(cfg, "config");
    need(path, "path");
    cfg->cfg = mssde::pipeline::RunConfig::load(path);
  });
}

mssde_status mssde_config_parse(mssde_config* cfg, const char* text) {
  return guarded([&] {
    need(cfg, "config");
    need(text, "text");
    cfg->cfg = mssde::pipeline::RunConfig::parse(text);
  });
}

mssde_status mssde_config_set(mssde_config* cfg, const char* key, const char* value) {
  return guarded([&] {
    need(cfg, "config");
    need(key, "key");
    need(value, "value");
    cfg->cfg.set(key, value);
  });
}

mssde_status mssde_config_get(const mssde_config* cfg, const char* key, char* buf, size_t cap, size_t* needed) {
  return guarded([&] {
    need(cfg, "config");
    need(key, "key");
    copy_out(cfg->cfg.str(key), buf, cap, needed);
  });
}

mssde_status mssde_config_resolved(const mssde_config* cfg, char* buf, size_t cap, size_t* needed) {
  return guarded([&] {
    need(cfg, "config");
    copy_out(cfg->cfg.resolved(), buf, cap, needed);
  });
}

mssde_status mssde_config_keys(char* buf, size_t cap, size_t* needed) {
  return guarded([&] {
    std::string s;
    for (const auto& k : mssde::pipeline::RunConfig::keys()) s += k.name + "\t" + k.fallback + "\t" + k.help + "\n";
    copy_out(s, buf, cap, needed);
  });
}

mssde_status mssde_generate(const mssde_config* cfg, const mssde_run_options* opt) {
  return run(&mssde::pipeline::cmd_generate, cfg, opt);
}
mssde_status mssde_train(const mssde_config* cfg, const mssde_run_options* opt) {
  return run(&mssde::pipeline::cmd_train, cfg, opt);
}
mssde_status mssde_predict(const mssde_config* cfg, const mssde_run_options* opt) {
  return run(&mssde::pipeline::cmd_predict, cfg, opt);
}
mssde_status mssde_evaluate(const mssde_config* cfg, const mssde_run_options* opt) {
  return run(&mssde::pipeline::cmd_evaluate, cfg, opt);
}
mssde_status mssde_baseline(const mssde_config* cfg, const mssde_run_options* opt) {
  return run(&mssde::pipeline::cmd_baseline, cfg, opt);
}

mssde_status mssde_dataset_open(const char* path, mssde_dataset** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = new mssde_dataset{mssde::read_dataset(path)};
  });
}

void mssde_dataset_close(mssde_dataset* ds) { delete ds; }

mssde_status mssde_dataset_shape(const mssde_dataset* ds, size_t* n_traj, size_t* n_t, size_t* n_y) {
  return guarded([&] {
    need(ds, "dataset");
    if (n_traj) *n_traj = ds->ds.trajectories.size();
    if (n_t) *n_t = ds->ds.n_t();
    if (n_y) *n_y = ds->ds.grid.n_y();
  });
}

mssde_status mssde_dataset_state(const mssde_dataset* ds, size_t traj, size_t t, double* out, size_t cap) {
  return guarded([&] {
    const auto& tr = trajectory(ds, traj, t);
    need(out, "out");
    if (cap < tr.n_y()) throw mssde::UsageError("output buffer smaller than n_y");
    const auto s = tr.state(t);
    std::copy(s.begin(), s.end(), out);
  });
}

mssde_status mssde_dataset_time(const mssde_dataset* ds, size_t traj, size_t t, double* out) {
  return guarded([&] {
    const auto& tr = trajectory(ds, traj, t);
    need(out, "out");
    *out = tr.times[t];
  });
}

}  // extern "C"
