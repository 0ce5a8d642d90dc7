// SPDX-License-Identifier: Apache-2.0
#include "predict/predict.hpp"

#include <cmath>
#include <numbers>

#include "core/error.hpp"
#include "dynamics/integrator.hpp"
#include "likelihood/poe.hpp"
#include "scales/scale_ops.hpp"

namespace mssde::predict {

std::vector<PredictiveMixture> posterior_predict(const ModelConfig& cfg, const ParamMap& params,
                                                 std::span<const double> y0, const std::vector<double>& times,
                                                 const Rng& rng, const PredictOptions& opt) {
  if (opt.n_paths < 1) throw UsageError("predict: need at least one path");
  if (times.empty()) throw UsageError("predict: no prediction times");
  const std::size_t ny = cfg.n_y(), nz = cfg.n_z(), N = opt.n_paths, nt = times.size();
  if (y0.size() != ny) throw ShapeError("predict: y0 has " + std::to_string(y0.size()) + " entries, model expects " + std::to_string(ny));
  check_params(cfg, params);

  Tensor mean, var;
  {
    Graph g(false);
    const ParamVars p = bind_params(g, params, false);
    const auto enc = scales::encode(cfg, p, g.constant(Tensor(Shape{1, ny}, std::vector<double>(y0.begin(), y0.end()))));
    mean = enc.mean.value();
    var = enc.variance.value();
  }
  std::vector<Rng> rngs;
  Tensor z0(Shape{N, nz});
  for (std::size_t i = 0; i < N; ++i) {
    rngs.push_back(rng.substream(rng.stream() + i));
    for (std::size_t c = 0; c < nz; ++c) z0[i * nz + c] = mean[c] + std::sqrt(var[c]) * rngs[i].normal();
  }

  Tensor paths(Shape{N, 1, nz}, z0.storage());
  std::size_t per = 1;
  if (nt > 1) {
    const double span = times[1] - times[0];
    const double dt = opt.dt > 0.0 ? opt.dt : span;
    per = static_cast<std::size_t>(std::llround(span / dt));
    if (per == 0 || std::abs(per * dt - span) > 1e-9 * std::max(1.0, span)) {
      throw UsageError("predict: output spacing must be a whole number of integrator steps");
    }
    for (std::size_t i = 2; i < nt; ++i) {
      if (std::abs(times[i] - times[i - 1] - span) > 1e-9 * std::max(1.0, span)) {
        throw UsageError("predict: prediction times must be uniformly spaced");
      }
    }
    dynamics::EmOptions em;
    em.record_every = per;
    em.threads = opt.threads;
    paths = dynamics::euler_maruyama(dynamics::model_drift(cfg, params), dynamics::model_dispersion(params), z0,
                                     times.front(), times.back(), per * (nt - 1), rngs, em);
  }

  std::vector<PredictiveMixture> out(nt);
  for (std::size_t k = 0; k < nt; ++k) {
    Graph g(false);
    const ParamVars p = bind_params(g, params, false);
    Tensor zk(Shape{N, nz});
    for (std::size_t i = 0; i < N; ++i) {
      std::copy(paths.data() + (i * nt + k) * nz, paths.data() + (i * nt + k + 1) * nz, zk.data() + i * nz);
    }
    const auto rec = likelihood::reconstruct(cfg, p, g.constant(std::move(zk)));
    out[k] = {rec.mean.value(), rec.variance.value()};
  }
  return out;
}

Moments predictive_moments(const PredictiveMixture& mix) {
  if (mix.means.rank() != 2 || mix.means.dim(0) < 1) throw ShapeError("predictive_moments: means must be [N, n_y]");
  const std::size_t N = mix.means.dim(0), n = mix.means.dim(1);
  if (mix.variance.size() != n) throw ShapeError("predictive_moments: variance length mismatch");
  Moments m{Tensor(Shape{n}), mix.variance, N == 1};
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t j = 0; j < n; ++j) m.mean[j] += mix.means[i * n + j];
  for (std::size_t j = 0; j < n; ++j) m.mean[j] /= static_cast<double>(N);
  if (N == 1) return m;
  for (std::size_t j = 0; j < n; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      const double d = mix.means[i * n + j] - m.mean[j];
      s += d * d;
    }
    m.variance[j] += s / static_cast<double>(N - 1);
  }
  return m;
}

double error_metric(std::span<const double> y_true, std::span<const double> y_hat) {
  if (y_true.size() != y_hat.size()) throw ShapeError("error_metric: size mismatch");
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    num += (y_true[i] - y_hat[i]) * (y_true[i] - y_hat[i]);
    den += y_true[i] * y_true[i];
  }
  if (!(den > 0.0)) throw DataError("error_metric: observation has zero norm");
  return std::sqrt(num / den);
}

std::vector<std::pair<std::size_t, double>> export_spectrum(std::span<const double> field) {
  const std::size_t n = field.size();
  if (n == 0) throw ShapeError("export_spectrum: empty field");
  std::vector<std::pair<std::size_t, double>> out;
  for (std::size_t k = 0; k <= n / 2; ++k) {
    double re = 0.0, im = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double a = -2.0 * std::numbers::pi * static_cast<double>((k * j) % n) / static_cast<double>(n);
      re += field[j] * std::cos(a);
      im += field[j] * std::sin(a);
    }
    out.emplace_back(k, std::hypot(re, im));
  }
  return out;
}

}  // namespace mssde::predict
