// SPDX-License-Identifier: Apache-2.0
#include "pipeline/commands.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "baselines/coarse_dns.hpp"
#include "baselines/dmd.hpp"
#include "baselines/sindy.hpp"
#include "core/error.hpp"
#include "core/parallel.hpp"
#include "datagen/dataset.hpp"
#include "pipeline/manifest.hpp"
#include "predict/predict.hpp"

namespace fs = std::filesystem;

namespace mssde::pipeline {

namespace {

constexpr std::uint64_t kPredictTag = 5;

std::uint64_t predict_stream(std::size_t trajectory_id) {
  return (kPredictTag << 56) | (static_cast<std::uint64_t>(trajectory_id) << 20);
}

std::string under(const RunOptions& o, const std::string& name) { return (fs::path(o.out_dir) / name).string(); }

void say(const RunOptions& o, const std::string& msg) {
  if (o.log) o.log(msg);
}

std::vector<std::size_t> split_indices(const Dataset& ds, const std::string& split) {
  if (split != "train" && split != "val" && split != "test") {
    throw UsageError("split must be train, val or test, got '" + split + "'");
  }
  const auto idx = ds.indices(split);
  if (idx.empty()) throw DataError("dataset has no '" + split + "' trajectories");
  return idx;
}

double elapsed(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Manifest start_manifest(const std::string& command, const RunConfig& c) {
  Manifest m;
  m.command = command;
  m.config = c.resolved();
  m.seed = c.u64("seed");
  return m;
}

void finish(Manifest& m, const RunOptions& o, std::chrono::steady_clock::time_point t0,
            std::vector<std::string>& outputs) {
  m.outputs = outputs;
  m.seconds = elapsed(t0);
  const std::string path = under(o, "manifest_" + m.command + ".json");
  write_manifest(path, m);
  outputs.push_back(path);
}

struct TrajectoryPrediction {
  std::size_t id = 0;
  std::vector<predict::Moments> moments;
};

std::vector<TrajectoryPrediction> predict_split(const Dataset& ds, const std::vector<std::size_t>& idx,
                                                const inference::Checkpoint& ck, const PredictSettings& s) {
  if (!(ck.model.grid == ds.grid)) throw DataError("checkpoint/dataset grid mismatch");
  check_params(ck.model, ck.params);
  const auto times = inference::horizon_times(ds, s.horizon);
  predict::PredictOptions opt;
  opt.n_paths = s.n_paths;
  opt.dt = s.dt;
  opt.threads = s.threads;
  std::vector<TrajectoryPrediction> out;
  for (auto id : idx) {
    const Trajectory& tr = ds.trajectories.at(id);
    const auto mix =
        predict::posterior_predict(ck.model, ck.params, tr.state(0), times, Rng(s.seed, predict_stream(id)), opt);
    TrajectoryPrediction p{id, {}};
    for (const auto& m : mix) p.moments.push_back(predict::predictive_moments(m));
    out.push_back(std::move(p));
  }
  return out;
}

ErrorReport errors_of(const Dataset& ds, const std::vector<TrajectoryPrediction>& preds, const std::string& method) {
  ErrorReport r{method, {}};
  for (const auto& p : preds) {
    const Trajectory& tr = ds.trajectories.at(p.id);
    for (std::size_t k = 0; k < p.moments.size(); ++k) {
      r.rows.push_back({p.id, tr.times[k], predict::error_metric(tr.state(k), p.moments[k].mean.values())});
    }
  }
  return r;
}

inference::Checkpoint load_model(const RunConfig& c, const RunOptions& o, Manifest& m) {
  const std::string path = checkpoint_path(c, o);
  auto ck = inference::read_checkpoint(path);
  m.add_input(path);
  return ck;
}

Dataset load_dataset(const RunConfig& c, const RunOptions& o, Manifest& m) {
  const std::string path = dataset_path(c, o);
  Dataset ds = read_dataset(path);
  m.add_input(path);
  m.add_input(path + ".json");
  return ds;
}

// Error rows for states[k] against the reference; rows past a truncated
// rollout carry inf.
void append_rows(ErrorReport& r, std::size_t id, const Trajectory& ref, const std::vector<double>& times,
                 const Tensor& states) {
  const std::size_t valid = states.rank() == 2 ? states.dim(0) : 0;
  const std::size_t n_y = ref.n_y();
  for (std::size_t k = 0; k < times.size(); ++k) {
    double eps = std::numeric_limits<double>::infinity();
    if (k < valid) eps = predict::error_metric(ref.state(k), std::span<const double>(states.data() + k * n_y, n_y));
    r.rows.push_back({id, times[k], eps});
  }
}

double mean_error(const ErrorReport& r) {
  const auto means = r.trajectory_means();
  double s = 0.0;
  for (double v : means) s += v;
  return s / static_cast<double>(means.size());
}

}  // namespace

ProblemSpec problem_spec(const RunConfig& c) {
  ProblemSpec s = problem_preset(c.str("problem"));
  auto sz = [&](const char* k, std::size_t& f) {
    if (c.is_set(k)) f = c.size(k);
  };
  auto re = [&](const char* k, double& f) {
    if (c.is_set(k)) f = c.real(k);
  };
  sz("points", s.points);
  re("x_lo", s.x_lo);
  re("x_hi", s.x_hi);
  re("coeff", s.coeff);
  re("t_end", s.t_end);
  re("dt", s.dt);
  sz("obs_every", s.obs_every);
  re("sigma", s.sigma);
  sz("n_train", s.n_train);
  sz("n_val", s.n_val);
  sz("n_test", s.n_test);
  re("ic_w_lo", s.ic_w_lo);
  re("ic_w_hi", s.ic_w_hi);
  re("ic_a_mean", s.ic_a_mean);
  re("ic_a_var", s.ic_a_var);
  re("ic_s_mean", s.ic_s_mean);
  re("ic_s_var", s.ic_s_var);
  s.seed = c.u64("seed");
  return s;
}

ModelConfig model_config(const RunConfig& c) {
  ModelConfig m;
  m.coarse = c.size("coarse");
  m.wide_kernel = c.flag("wide_kernel");
  m.enc_filters = c.sizes("enc_filters");
  m.enc_kernel = c.size("enc_kernel");
  m.stencil_q = c.size("stencil_q");
  m.macro_hidden = c.size("macro_hidden");
  m.macro_layers = c.size("macro_layers");
  m.micro_hidden = c.size("micro_hidden");
  m.micro_layers = c.size("micro_layers");
  m.positional = c.flag("positional");
  return m;
}

inference::TrainConfig train_config(const RunConfig& c, const RunOptions& o) {
  inference::TrainConfig t;
  t.n_eta_target = c.size("n_eta");
  t.steps_per_stage = c.size("steps");
  t.batch = c.size("batch");
  t.m = c.size("m");
  t.n_quad = c.size("n_quad");
  t.lr_first = c.real("lr_first");
  t.lr_later = c.real("lr_later");
  t.decay = c.real("decay");
  t.decay_interval = c.u64("decay_interval");
  t.val_every = c.size("val_every");
  t.val_paths = c.size("val_paths");
  t.val_horizon = c.real("val_horizon");
  t.chunk = c.size("chunk");
  t.log_every = c.size("log_every");
  t.seed = c.u64("seed");
  t.threads = o.threads;
  t.out_dir = o.out_dir;
  t.run_config = c.to_json();
  if (t.val_every == 0 || t.log_every == 0) throw UsageError("val_every and log_every must be positive");
  return t;
}

std::string dataset_path(const RunConfig& c, const RunOptions& o) {
  return c.is_set("dataset") ? c.str("dataset") : under(o, "dataset.mst");
}

std::string checkpoint_path(const RunConfig& c, const RunOptions& o) {
  return c.is_set("checkpoint") ? c.str("checkpoint") : under(o, "best.ckpt");
}

PredictSettings predict_settings(const RunConfig& c, const RunOptions& o) {
  PredictSettings s;
  s.n_paths = c.size("n_paths");
  s.dt = c.real("predict_dt");
  s.horizon = c.real("horizon");
  s.seed = c.u64("seed");
  s.threads = o.threads;
  return s;
}

ErrorReport evaluate_model(const Dataset& ds, const std::string& split, const inference::Checkpoint& ck,
                           const PredictSettings& s, const std::string& method) {
  return errors_of(ds, predict_split(ds, split_indices(ds, split), ck, s), method);
}

BaselineResult run_baselines(const Dataset& ds, const std::string& split, const BaselineSettings& s) {
  const auto idx = split_indices(ds, split);
  const auto train_idx = ds.indices("train");
  if (train_idx.empty()) throw DataError("baseline: dataset has no training trajectories");
  if (s.n_latent == 0) throw UsageError("baseline: n_latent must be positive");
  const auto times = inference::horizon_times(ds, s.horizon);
  std::vector<const Trajectory*> train;
  for (auto i : train_idx) train.push_back(&ds.trajectories[i]);

  BaselineResult res;
  res.details["n_latent"] = s.n_latent;
  for (const auto& method : s.methods) {
    ErrorReport rep{method, {}};
    std::vector<Tensor> states(idx.size());
    if (method == "coarse_dns") {
      const std::string problem = ds.meta.value("problem", "");
      const double coeff = ds.meta.value("coeff", 0.0);
      const std::size_t substeps = ds.meta.value("obs_every", std::size_t{1});
      if (problem.empty()) throw DataError("baseline: dataset metadata lacks the generating problem");
      const std::size_t points = baselines::matched_coarse_points(ds.grid, s.n_latent);
      parallel_for(idx.size(), s.threads, [&](std::size_t i) {
        states[i] = baselines::coarse_dns(problem, coeff, ds.grid, points, ds.trajectories[idx[i]].state(0), times,
                                          substeps)
                        .states;
      });
      std::size_t dof = ds.grid.fields;
      for (std::size_t a = 0; a < ds.grid.dim; ++a) dof *= points;
      res.details["coarse_dns"] = {{"points", points}, {"degrees_of_freedom", dof}};
    } else if (method == "dmd") {
      const auto model = baselines::dmd_fit(train, s.n_latent, s.dmd_lambda);
      parallel_for(idx.size(), s.threads, [&](std::size_t i) {
        states[i] = baselines::dmd_predict(model, ds.trajectories[idx[i]].state(0), times.size() - 1);
      });
      double radius = 0.0;
      for (Eigen::Index k = 0; k < model.eigenvalues.size(); ++k) radius = std::max(radius, std::abs(model.eigenvalues[k]));
      res.details["dmd"] = {{"rank", model.rank}, {"lambda", model.lambda}, {"spectral_radius", radius},
                            {"warnings", model.warnings}};
      for (const auto& w : model.warnings) res.warnings.push_back("dmd: " + w);
    } else if (method == "sindy") {
      const std::size_t substeps = ds.meta.value("obs_every", std::size_t{1});
      auto sel_idx = ds.indices("val");
      std::string sel_split = "val";
      if (sel_idx.empty()) {
        sel_idx = train_idx;
        sel_split = "train";
        res.warnings.push_back("sindy: no validation trajectories, hyperparameters selected on training data");
      }
      if (s.sindy_orders.empty() || s.sindy_thresholds.empty()) throw UsageError("sindy: empty search grid");
      nlohmann::json search = nlohmann::json::array();
      baselines::SindyModel best;
      double best_eps = std::numeric_limits<double>::infinity();
      bool have = false;
      for (auto order : s.sindy_orders) {
        for (double tau : s.sindy_thresholds) {
          auto model = baselines::sindy_fit(train, s.n_latent, order, tau);
          ErrorReport sel{"sindy", {}};
          std::vector<Tensor> sel_states(sel_idx.size());
          parallel_for(sel_idx.size(), s.threads, [&](std::size_t i) {
            sel_states[i] = baselines::sindy_predict(model, ds.trajectories[sel_idx[i]].state(0), times, substeps).states;
          });
          for (std::size_t i = 0; i < sel_idx.size(); ++i) {
            append_rows(sel, sel_idx[i], ds.trajectories[sel_idx[i]], times, sel_states[i]);
          }
          const double e = mean_error(sel);
          search.push_back({{"order", order}, {"threshold", tau}, {"converged", model.converged},
                            {"selection_epsilon", std::isfinite(e) ? nlohmann::json(e) : nlohmann::json(nullptr)}});
          if (!have || e < best_eps) {
            best = std::move(model);
            best_eps = e;
            have = true;
          }
        }
      }
      std::vector<char> blew(idx.size(), 0);
      parallel_for(idx.size(), s.threads, [&](std::size_t i) {
        auto roll = baselines::sindy_predict(best, ds.trajectories[idx[i]].state(0), times, substeps);
        blew[i] = roll.blew_up;
        states[i] = std::move(roll.states);
      });
      std::size_t n_blew = 0;
      for (char b : blew) n_blew += b;
      std::size_t nonzero = 0;
      for (Eigen::Index k = 0; k < best.coef.size(); ++k) nonzero += best.coef.data()[k] != 0.0;
      res.details["sindy"] = {{"order", best.order},      {"threshold", best.threshold},
                              {"converged", best.converged}, {"nonzero_terms", nonzero},
                              {"selection_split", sel_split}, {"search", search},
                              {"blown_up_rollouts", n_blew}};
      if (!best.converged) res.warnings.push_back("sindy: thresholding did not reach a fixed point");
      if (n_blew > 0) res.warnings.push_back("sindy: " + std::to_string(n_blew) + " rollouts blew up");
    } else {
      throw UsageError("unknown baseline method '" + method + "' (expected coarse_dns, dmd or sindy)");
    }
    for (std::size_t i = 0; i < idx.size(); ++i) append_rows(rep, idx[i], ds.trajectories[idx[i]], times, states[i]);
    res.reports.push_back(std::move(rep));
  }
  return res;
}

std::vector<std::string> cmd_generate(const RunConfig& c, const RunOptions& o) {
  const auto t0 = std::chrono::steady_clock::now();
  Manifest m = start_manifest("generate", c);
  const ProblemSpec spec = problem_spec(c);
  fs::create_directories(o.out_dir);
  say(o, "generating " + std::to_string(spec.n_traj()) + " " + spec.problem + " trajectories");
  Dataset ds = generate_dataset(spec, o.threads);
  ds.meta["run_config"] = c.to_json();
  const std::string path = dataset_path(c, o);
  if (fs::path(path).has_parent_path()) fs::create_directories(fs::path(path).parent_path());
  write_dataset(path, ds);
  std::vector<std::string> outputs{path, path + ".json"};
  m.extra = {{"trajectories", ds.trajectories.size()},
             {"train", spec.n_train},
             {"val", spec.n_val},
             {"test", spec.n_test},
             {"n_t", ds.n_t()},
             {"n_y", ds.grid.n_y()},
             {"dataset_sha1", file_blob_sha1(path)}};
  finish(m, o, t0, outputs);
  return outputs;
}

std::vector<std::string> cmd_train(const RunConfig& c, const RunOptions& o) {
  const auto t0 = std::chrono::steady_clock::now();
  Manifest m = start_manifest("train", c);
  const Dataset ds = load_dataset(c, o, m);
  const auto tc = train_config(c, o);
  const ModelConfig base = model_config(c);
  fs::create_directories(o.out_dir);
  const std::string log_path = under(o, "train_log.csv");
  const std::string header = "step,stage,loglik,integral,elbo,val_eps,lr\n";

  inference::Checkpoint resume;
  std::string kept = header;
  if (o.resume) {
    const std::string last = under(o, "last.ckpt");
    resume = inference::read_checkpoint(last);
    m.add_input(last);
    const std::uint64_t done = resume.stage * tc.steps_per_stage + resume.step;
    say(o, "resuming stage " + std::to_string(resume.stage) + " after step " + std::to_string(resume.step));
    if (fs::exists(log_path)) {
      std::istringstream old(read_text(log_path));
      std::string line;
      std::getline(old, line);
      while (std::getline(old, line)) {
        if (line.empty()) continue;
        if (std::stoull(line.substr(0, line.find(','))) <= done) kept += line + "\n";
      }
    }
  }
  write_text(log_path, kept);
  std::ofstream log(log_path, std::ios::app);
  if (!log) throw DataError("cannot append to '" + log_path + "'");

  auto on_row = [&](const inference::LogRow& r) {
    log << r.step << ',' << r.stage << ',' << fmt(r.loglik) << ',' << fmt(r.integral) << ',' << fmt(r.elbo) << ','
        << (r.val_eps < 0.0 ? std::string() : fmt(r.val_eps)) << ',' << fmt(r.lr) << '\n';
    log.flush();
    if (o.log) {
      std::ostringstream msg;
      msg << "stage " << r.stage << " step " << r.step << " elbo " << r.elbo;
      if (r.val_eps >= 0.0) msg << " val_eps " << r.val_eps;
      o.log(msg.str());
    }
  };
  const auto stages = inference::train(ds, base, tc, on_row, o.resume ? &resume : nullptr);
  log.close();

  std::size_t best = stages.size() - 1;
  nlohmann::json per_stage = nlohmann::json::array();
  for (std::size_t k = 0; k < stages.size(); ++k) {
    const double v = stages[k].val_eps;
    per_stage.push_back({{"n_eta", stages[k].stage},
                         {"val_eps", v >= 0.0 ? nlohmann::json(v) : nlohmann::json(nullptr)},
                         {"best_step", stages[k].best_step}});
    if (v >= 0.0 && (stages[best].val_eps < 0.0 || v < stages[best].val_eps)) best = k;
  }
  const std::string best_path = under(o, "best.ckpt");
  inference::write_checkpoint(best_path, stages[best]);
  say(o, "best stage n_eta=" + std::to_string(stages[best].stage));

  std::vector<std::string> outputs{log_path};
  for (std::size_t k = 0; k < stages.size(); ++k) outputs.push_back(under(o, "stage" + std::to_string(k) + ".ckpt"));
  outputs.push_back(best_path);
  if (fs::exists(under(o, "last.ckpt"))) outputs.push_back(under(o, "last.ckpt"));
  m.extra = {{"stages", per_stage}, {"best_stage", stages[best].stage}, {"resumed", o.resume}};
  finish(m, o, t0, outputs);
  return outputs;
}

std::vector<std::string> cmd_predict(const RunConfig& c, const RunOptions& o) {
  const auto t0 = std::chrono::steady_clock::now();
  Manifest m = start_manifest("predict", c);
  const Dataset ds = load_dataset(c, o, m);
  const auto ck = load_model(c, o, m);
  const auto preds = predict_split(ds, split_indices(ds, c.str("split")), ck, predict_settings(c, o));
  fs::create_directories(o.out_dir);

  std::string text = "trajectory_id,t,index,mean,std\n";
  for (const auto& p : preds) {
    const auto& times = ds.trajectories[p.id].times;
    for (std::size_t k = 0; k < p.moments.size(); ++k) {
      const auto& mo = p.moments[k];
      const std::string prefix = std::to_string(p.id) + "," + fmt(times[k]) + ",";
      for (std::size_t j = 0; j < mo.mean.size(); ++j) {
        text += prefix + std::to_string(j) + "," + fmt(mo.mean[j]) + "," + fmt(std::sqrt(mo.variance[j])) + "\n";
      }
    }
  }
  std::vector<std::string> outputs{under(o, "predictions.csv"), under(o, "errors.csv")};
  write_text(outputs[0], text);
  write_errors_csv(outputs[1], errors_of(ds, preds, "model"));

  if (ds.grid.dim == 1 && ds.grid.fields == 1 && ds.grid.boundary == Boundary::kPeriodic) {
    std::string spec = "trajectory_id,t,wavenumber,amplitude_observed,amplitude_predicted\n";
    for (const auto& p : preds) {
      const std::size_t k = p.moments.size() - 1;
      const auto obs = predict::export_spectrum(ds.trajectories[p.id].state(k));
      const auto pred = predict::export_spectrum(p.moments[k].mean.values());
      const std::string prefix = std::to_string(p.id) + "," + fmt(ds.trajectories[p.id].times[k]) + ",";
      for (std::size_t i = 0; i < obs.size(); ++i) {
        spec += prefix + std::to_string(obs[i].first) + "," + fmt(obs[i].second) + "," + fmt(pred[i].second) + "\n";
      }
    }
    outputs.push_back(under(o, "spectrum.csv"));
    write_text(outputs.back(), spec);
  }
  m.extra = {{"split", c.str("split")}, {"checkpoint_stage", ck.stage}, {"trajectories", preds.size()}};
  finish(m, o, t0, outputs);
  return outputs;
}

std::vector<std::string> cmd_evaluate(const RunConfig& c, const RunOptions& o) {
  const auto t0 = std::chrono::steady_clock::now();
  Manifest m = start_manifest("evaluate", c);
  const Dataset ds = load_dataset(c, o, m);
  const auto ck = load_model(c, o, m);
  const std::string split = c.str("split");
  const ErrorReport rep = evaluate_model(ds, split, ck, predict_settings(c, o), "model_n_eta" + std::to_string(ck.stage));
  const Summary s = summarize(rep);
  say(o, "mean epsilon " + fmt(s.mean) + " +- " + fmt(s.std) + " over " + std::to_string(s.trajectories) +
             " trajectories");
  fs::create_directories(o.out_dir);
  std::vector<std::string> outputs{under(o, "errors.csv"), under(o, "summary.csv"), under(o, "summary.json")};
  write_errors_csv(outputs[0], rep);
  write_summary_csv(outputs[1], {s});
  write_text(outputs[2], nlohmann::json{{"split", split}, {"methods", summary_json({s})}, {"config", c.to_json()}}
                                 .dump(2) +
                             "\n");
  finish(m, o, t0, outputs);
  return outputs;
}

std::vector<std::string> cmd_baseline(const RunConfig& c, const RunOptions& o) {
  const auto t0 = std::chrono::steady_clock::now();
  Manifest m = start_manifest("baseline", c);
  const Dataset ds = load_dataset(c, o, m);
  BaselineSettings s;
  s.methods = c.words("methods");
  s.dmd_lambda = c.real("dmd_lambda");
  s.sindy_orders = c.sizes("sindy_orders");
  s.sindy_thresholds = c.reals("sindy_thresholds");
  s.horizon = c.real("horizon");
  s.threads = o.threads;
  s.n_latent = c.size("n_latent");
  std::string source = "config";
  if (s.n_latent == 0) {
    const std::string ck_path = checkpoint_path(c, o);
    if (fs::exists(ck_path)) {
      const auto ck = inference::read_checkpoint(ck_path);
      m.add_input(ck_path);
      s.n_latent = ck.model.n_z();
      source = "checkpoint";
    } else {
      ModelConfig mc = inference::model_for_dataset(ds, model_config(c));
      mc.n_eta = c.size("n_eta");
      s.n_latent = mc.n_z();
      source = "model config";
    }
  }
  say(o, "baselines at latent size " + std::to_string(s.n_latent) + " (from " + source + ")");
  const std::string split = c.str("split");
  const BaselineResult res = run_baselines(ds, split, s);
  for (const auto& w : res.warnings) say(o, "warning: " + w);

  fs::create_directories(o.out_dir);
  std::vector<std::string> outputs;
  std::vector<Summary> sums;
  for (const auto& rep : res.reports) {
    outputs.push_back(under(o, "errors_" + rep.method + ".csv"));
    write_errors_csv(outputs.back(), rep);
    sums.push_back(summarize(rep));
    say(o, rep.method + ": mean epsilon " + fmt(sums.back().mean));
  }
  outputs.push_back(under(o, "summary_baselines.csv"));
  write_summary_csv(outputs.back(), sums);
  nlohmann::json details = res.details;
  details["n_latent_source"] = source;
  outputs.push_back(under(o, "summary_baselines.json"));
  write_text(outputs.back(), nlohmann::json{{"split", split},
                                            {"methods", summary_json(sums)},
                                            {"details", details},
                                            {"warnings", res.warnings},
                                            {"config", c.to_json()}}
                                     .dump(2) +
                                 "\n");
  finish(m, o, t0, outputs);
  return outputs;
}

}  // namespace mssde::pipeline
