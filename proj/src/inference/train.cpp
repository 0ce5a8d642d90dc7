// SPDX-License-Identifier: Apache-2.0
#include "inference/train.hpp"

#include <cmath>
#include <filesystem>
#include <numeric>

#include "core/error.hpp"
#include "inference/segment.hpp"
#include "predict/predict.hpp"

namespace mssde::inference {

namespace {

enum StreamTag : std::uint64_t { kInit = 1, kShuffle = 2, kNoise = 3, kValidate = 4 };

// Distinct RNG stream per (purpose, stage, index).
std::uint64_t stream_id(StreamTag tag, std::size_t stage, std::uint64_t idx) {
  return (static_cast<std::uint64_t>(tag) << 56) | (static_cast<std::uint64_t>(stage) << 48) | idx;
}

// Segment indices for step `step`: consecutive slices of a concatenation of
// per-epoch permutations.
std::vector<std::size_t> batch_for_step(std::size_t n_segs, std::size_t batch, std::uint64_t step, std::size_t stage,
                                        std::uint64_t seed) {
  std::vector<std::size_t> out;
  std::uint64_t pos = step * batch;
  std::uint64_t epoch = pos / n_segs;
  std::vector<std::size_t> perm;
  auto make_perm = [&](std::uint64_t e) {
    perm.resize(n_segs);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    Rng rng(seed, stream_id(kShuffle, stage, e));
    for (std::size_t i = n_segs; i > 1; --i) std::swap(perm[i - 1], perm[rng.next_u64() % i]);
  };
  make_perm(epoch);
  while (out.size() < batch) {
    const std::uint64_t off = pos % n_segs;
    out.push_back(perm[off]);
    ++pos;
    if (pos / n_segs != epoch) make_perm(epoch = pos / n_segs);
  }
  return out;
}

std::string stage_path(const std::string& dir, std::size_t stage) {
  return (std::filesystem::path(dir) / ("stage" + std::to_string(stage) + ".ckpt")).string();
}

}  // namespace

std::vector<SegmentData> build_segments(const Dataset& ds, const std::vector<std::size_t>& traj, std::size_t m) {
  std::vector<SegmentData> out;
  const std::size_t ny = ds.grid.n_y();
  const auto segs = segment(ds.n_t(), m);
  for (std::size_t k : traj) {
    const Trajectory& tr = ds.trajectories.at(k);
    for (const auto& s : segs) {
      SegmentData d;
      d.id = out.size();
      d.owned = s.owned;
      d.obs = Tensor(Shape{s.obs.size(), ny});
      for (std::size_t j = 0; j < s.obs.size(); ++j) {
        d.times.push_back(tr.times[s.obs[j]]);
        const auto st = tr.state(s.obs[j]);
        std::copy(st.begin(), st.end(), d.obs.data() + j * ny);
      }
      out.push_back(std::move(d));
    }
  }
  return out;
}

std::vector<double> horizon_times(const Dataset& ds, double horizon) {
  const auto& t = ds.trajectories.at(0).times;
  std::vector<double> out;
  for (double v : t) {
    if (horizon > 0.0 && v - t.front() > horizon + 1e-9) break;
    out.push_back(v);
  }
  return out;
}

double validation_error(const Dataset& ds, const std::vector<std::size_t>& traj, const ModelConfig& cfg,
                        const ParamMap& params, std::size_t n_paths, double horizon, std::uint64_t seed,
                        std::size_t threads) {
  if (traj.empty()) throw UsageError("validation: no trajectories");
  const std::vector<double> times = horizon_times(ds, horizon);
  predict::PredictOptions opt;
  opt.n_paths = n_paths;
  opt.threads = threads;
  double total = 0.0;
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const Trajectory& tr = ds.trajectories.at(traj[i]);
    const auto mix = predict::posterior_predict(cfg, params, tr.state(0), times,
                                                Rng(seed, stream_id(kValidate, 0, i << 20)), opt);
    double s = 0.0;
    for (std::size_t k = 0; k < times.size(); ++k) {
      s += predict::error_metric(tr.state(k), predict::predictive_moments(mix[k]).mean.values());
    }
    total += s / static_cast<double>(times.size());
  }
  return total / static_cast<double>(traj.size());
}

ModelConfig model_for_dataset(const Dataset& ds, ModelConfig base) {
  base.grid = ds.grid;
  base.sigma_obs = ds.sigma > 0.0 ? ds.sigma : -1.0;
  const auto& t = ds.trajectories.at(0).times;
  base.time_scale = t.back() - t.front() > 0.0 ? t.back() : 1.0;
  base.validate();
  return base;
}

nlohmann::json train_config_json(const TrainConfig& tc) {
  return {{"n_eta_target", tc.n_eta_target}, {"steps_per_stage", tc.steps_per_stage}, {"batch", tc.batch},
          {"m", tc.m},                       {"n_quad", tc.n_quad},                   {"lr_first", tc.lr_first},
          {"lr_later", tc.lr_later},         {"decay", tc.decay},                     {"decay_interval", tc.decay_interval},
          {"val_every", tc.val_every},       {"val_paths", tc.val_paths},             {"val_horizon", tc.val_horizon},
          {"chunk", tc.chunk},               {"seed", tc.seed}};
}

std::vector<Checkpoint> train(const Dataset& ds, const ModelConfig& base, const TrainConfig& tc, const LogFn& log,
                              const Checkpoint* resume) {
  if (tc.batch == 0 || tc.steps_per_stage == 0) throw UsageError("train: batch and steps_per_stage must be positive");
  const auto train_idx = ds.indices("train");
  const auto val_idx = ds.indices("val");
  if (train_idx.empty()) throw DataError("train: dataset has no training trajectories");
  const std::vector<SegmentData> data = build_segments(ds, train_idx, tc.m);
  const ElboOptions eopt{tc.n_quad};
  const bool save = !tc.out_dir.empty();
  if (save) std::filesystem::create_directories(tc.out_dir);
  const std::string last_path = save ? (std::filesystem::path(tc.out_dir) / "last.ckpt").string() : "";
  nlohmann::json snapshot = train_config_json(tc);
  if (!tc.run_config.is_null()) snapshot["run_config"] = tc.run_config;

  std::vector<Checkpoint> stages;
  std::size_t first_stage = 0;
  if (resume) {
    first_stage = resume->stage;
    if (first_stage > tc.n_eta_target) throw UsageError("train: resume stage beyond target");
    for (std::size_t s = 0; s < first_stage; ++s) {
      if (!save) throw UsageError("train: resuming a later stage needs the output directory of earlier stages");
      stages.push_back(read_checkpoint(stage_path(tc.out_dir, s)));
    }
  }

  for (std::size_t stage = first_stage; stage <= tc.n_eta_target; ++stage) {
    ModelConfig cfg = model_for_dataset(ds, base);
    cfg.n_eta = stage;
    AdamConfig acfg{stage == 0 ? tc.lr_first : tc.lr_later, 0.9, 0.999, 1e-8, tc.decay, tc.decay_interval};
    Adam adam(acfg);
    Checkpoint ck;
    ck.model = cfg;
    ck.stage = stage;
    ck.meta = snapshot;
    std::uint64_t start = 0;
    if (resume && stage == first_stage) {
      if (!(resume->model == cfg)) throw UsageError("train: resume checkpoint does not match the model configuration");
      ck = *resume;
      ck.meta = snapshot;
      adam.first_moments() = resume->adam_m;
      adam.second_moments() = resume->adam_v;
      adam.set_steps(resume->step);
      start = resume->step;
    } else {
      Rng init(tc.seed, stream_id(kInit, stage, 0));
      ck.params = stage == 0 ? init_params(cfg, init)
                             : grow_params(stages.back().params, stages.back().model, cfg, init);
      ck.best_params = ck.params;
      ck.best_val = -1.0;
    }

    auto write_last = [&] {
      if (!save) return;
      ck.adam_m = adam.first_moments();
      ck.adam_v = adam.second_moments();
      write_checkpoint(last_path, ck);
    };

    for (std::uint64_t step = start; step < tc.steps_per_stage; ++step) {
      const auto idx = batch_for_step(data.size(), tc.batch, step, stage, tc.seed);
      std::vector<const SegmentData*> batch;
      for (auto i : idx) batch.push_back(&data[i]);
      const double lr = adam.lr();
      ElboGrad eg;
      try {
        eg = elbo_value_and_grad(
            cfg, ck.params, batch,
            [&](std::size_t c) { return Rng(tc.seed, stream_id(kNoise, stage, (step << 12) | c)); }, eopt,
            1.0 / static_cast<double>(batch.size()), tc.chunk, tc.threads);
        adam.step(ck.params, eg.grad);
      } catch (const NumericalError& e) {
        write_last();
        throw NumericalError(std::string(e.what()) + " (stage " + std::to_string(stage) + ", step " +
                             std::to_string(step + 1) + ")");
      }
      ck.step = step + 1;
      LogRow row{stage * tc.steps_per_stage + ck.step, stage, eg.terms.loglik, eg.terms.integral, eg.terms.elbo, -1.0,
                 lr};
      const bool validate = !val_idx.empty() && (ck.step % tc.val_every == 0 || ck.step == tc.steps_per_stage);
      if (validate) {
        const double v = validation_error(ds, val_idx, cfg, ck.params, tc.val_paths, tc.val_horizon, tc.seed,
                                          tc.threads);
        row.val_eps = v;
        ck.val_eps = v;
        if (std::isfinite(v) && (ck.best_val < 0.0 || v < ck.best_val)) {
          ck.best_val = v;
          ck.best_params = ck.params;
          ck.best_step = ck.step;
        }
      }
      if (log && (validate || ck.step % tc.log_every == 0 || ck.step == 1)) log(row);
      if (validate) write_last();
    }

    Checkpoint best = ck;
    if (val_idx.empty()) {
      best.best_params = ck.params;
    } else {
      best.params = ck.best_params;
      best.val_eps = ck.best_val;
    }
    best.adam_m.clear();
    best.adam_v.clear();
    best.best_params.clear();
    if (save) write_checkpoint(stage_path(tc.out_dir, stage), best);
    stages.push_back(std::move(best));
  }
  return stages;
}

}  // namespace mssde::inference
