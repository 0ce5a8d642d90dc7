// SPDX-License-Identifier: Apache-2.0
#include "dynamics/integrator.hpp"

#include <cmath>

#include "core/error.hpp"
#include "core/parallel.hpp"
#include "dynamics/drift.hpp"

namespace mssde::dynamics {

Tensor euler_maruyama(const DriftFn& drift, const std::vector<double>& ell, const Tensor& z0, double t0, double t1,
                      std::size_t n_steps, std::vector<Rng>& rngs, const EmOptions& opt) {
  if (n_steps < 1) throw UsageError("euler_maruyama: need at least one step");
  if (opt.record_every == 0 || n_steps % opt.record_every != 0) {
    throw UsageError("euler_maruyama: record_every must divide n_steps");
  }
  if (z0.rank() != 2) throw ShapeError("euler_maruyama: z0 must be [n_paths, n_z]");
  const std::size_t P = z0.dim(0), nz = z0.dim(1);
  if (ell.size() != nz) throw ShapeError("euler_maruyama: dispersion length does not match n_z");
  if (rngs.size() != P) throw UsageError("euler_maruyama: need one RNG per path");
  const std::size_t n_rec = n_steps / opt.record_every + 1;
  const double dt = (t1 - t0) / static_cast<double>(n_steps), sq = std::sqrt(std::abs(dt));
  Tensor out(Shape{P, n_rec, nz});
  const std::size_t chunk = std::max<std::size_t>(1, opt.chunk);
  const std::size_t n_chunks = (P + chunk - 1) / chunk;
  parallel_for(n_chunks, opt.threads, [&](std::size_t c) {
    const std::size_t p0 = c * chunk, p1 = std::min(P, p0 + chunk), B = p1 - p0;
    Tensor z(Shape{B, nz});
    std::copy(z0.data() + p0 * nz, z0.data() + p1 * nz, z.data());
    auto record = [&](std::size_t slot) {
      for (std::size_t b = 0; b < B; ++b) std::copy(z.data() + b * nz, z.data() + (b + 1) * nz, out.data() + ((p0 + b) * n_rec + slot) * nz);
    };
    record(0);
    for (std::size_t k = 0; k < n_steps; ++k) {
      const double t = t0 + dt * static_cast<double>(k);
      const Tensor g = drift(z, t);
      if (g.shape() != z.shape()) throw ShapeError("euler_maruyama: drift returned " + shape_str(g.shape()));
      for (std::size_t b = 0; b < B; ++b) {
        Rng& rng = rngs[p0 + b];
        for (std::size_t i = 0; i < nz; ++i) {
          double& v = z[b * nz + i];
          v += g[b * nz + i] * dt + ell[i] * sq * rng.normal();
          if (!std::isfinite(v)) {
            throw NumericalError("euler_maruyama: non-finite state on path " + std::to_string(p0 + b) + " at step " +
                                 std::to_string(k + 1));
          }
        }
      }
      if ((k + 1) % opt.record_every == 0) record((k + 1) / opt.record_every);
    }
  });
  return out;
}

DriftFn model_drift(const ModelConfig& cfg, const ParamMap& params) {
  check_params(cfg, params);
  return [cfg, params](const Tensor& z, double t) {
    Graph g(false);
    const ParamVars p = bind_params(g, params, false);
    return drift(cfg, p, g.constant(z), {t}).value();
  };
}

std::vector<double> model_dispersion(const ParamMap& params) {
  Graph g(false);
  const Tensor ell = dispersion(bind_params(g, params, false)).value();
  return {ell.values().begin(), ell.values().end()};
}

}  // namespace mssde::dynamics
