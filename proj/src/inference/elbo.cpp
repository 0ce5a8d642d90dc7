// SPDX-License-Identifier: Apache-2.0
#include "inference/elbo.hpp"

#include <cmath>

#include "compute/quadrature.hpp"
#include "core/error.hpp"
#include "core/parallel.hpp"
#include "dynamics/drift.hpp"
#include "inference/path.hpp"
#include "likelihood/poe.hpp"
#include "scales/scale_ops.hpp"

namespace mssde::inference {

using namespace mssde::ops;

Var elbo_graph(const ModelConfig& cfg, const ParamVars& p, std::span<const SegmentData* const> segs, Rng& rng,
               const ElboOptions& opt, ElboTerms* terms) {
  if (segs.empty()) throw UsageError("elbo: no segments");
  if (opt.n_quad == 0) throw UsageError("elbo: need at least one quadrature node");
  Graph& g = *p.begin()->second.graph;
  const std::size_t K = segs.size(), Q = opt.n_quad, ny = cfg.n_y(), nz = cfg.n_z();

  std::size_t rows = 0;
  for (const auto* s : segs) {
    if (s->obs.rank() != 2 || s->obs.dim(1) != ny || s->obs.dim(0) != s->times.size() ||
        s->owned.size() != s->times.size()) {
      throw ShapeError("elbo: segment " + std::to_string(s->id) + " has inconsistent shapes");
    }
    rows += s->times.size();
  }

  // Anchors: encoder means for every observation of every segment.
  Tensor Y(Shape{rows, ny});
  std::vector<long> owned_rows;
  std::vector<std::size_t> owner_of;
  for (std::size_t k = 0, r = 0; k < K; ++k) {
    const auto* s = segs[k];
    std::copy(s->obs.values().begin(), s->obs.values().end(), Y.data() + r * ny);
    for (std::size_t j = 0; j < s->times.size(); ++j, ++r) {
      if (s->owned[j]) {
        owned_rows.push_back(static_cast<long>(r));
        owner_of.push_back(k);
      }
    }
  }
  const std::size_t No = owned_rows.size();
  Var y = g.constant(std::move(Y));
  const scales::Encoded enc = scales::encode(cfg, p, y);
  Var sd = sqrt(enc.variance);

  // Expected log-likelihood with one reparametrised draw per owned observation.
  std::vector<long> gidx(No * nz), yidx(No * ny);
  for (std::size_t i = 0; i < No; ++i) {
    for (std::size_t c = 0; c < nz; ++c) gidx[i * nz + c] = owned_rows[i] * static_cast<long>(nz) + static_cast<long>(c);
    for (std::size_t c = 0; c < ny; ++c) yidx[i * ny + c] = owned_rows[i] * static_cast<long>(ny) + static_cast<long>(c);
  }
  Var z_obs = add(gather(enc.mean, std::move(gidx), Shape{No, nz}), mul(g.constant(rng.normal(Shape{No, nz})), sd));
  Var y_obs = gather(y, std::move(yidx), Shape{No, ny});
  Var ll_rows = likelihood::model_loglik(cfg, p, y_obs, slice(z_obs, 1, 0, cfg.n_zeta()),
                                         slice(z_obs, 1, cfg.n_zeta(), nz));
  Tensor own_mat(Shape{K, No});
  for (std::size_t i = 0; i < No; ++i) own_mat[owner_of[i] * No + i] = 1.0;
  Var ll_seg = reshape(matmul(g.constant(std::move(own_mat)), reshape(ll_rows, Shape{No, 1})), Shape{K});

  // Path at Gauss-Legendre nodes. Anchor variances are the shared encoder
  // variance, so Sigma(t) is constant and dSigma/dt = 0 inside a segment.
  Tensor W(Shape{K * Q, rows}), Wd(Shape{K * Q, rows}), wq(Shape{K * Q});
  std::vector<double> tq(K * Q);
  for (std::size_t k = 0, r0 = 0; k < K; ++k) {
    const auto* s = segs[k];
    const std::size_t M = s->times.size();
    const QuadratureRule rule = gauss_legendre(Q, s->times.front(), s->times.back());
    const HermiteBasis H = hermite_basis(s->times, rule.nodes);
    for (std::size_t q = 0; q < Q; ++q) {
      tq[k * Q + q] = rule.nodes[q];
      wq[k * Q + q] = rule.weights[q];
      for (std::size_t j = 0; j < M; ++j) {
        W[(k * Q + q) * rows + r0 + j] = H.value[q * M + j];
        Wd[(k * Q + q) * rows + r0 + j] = H.deriv[q * M + j];
      }
    }
    r0 += M;
  }
  Var mean = matmul(g.constant(std::move(W)), enc.mean);
  Var mean_dot = matmul(g.constant(std::move(Wd)), enc.mean);
  Var ell = dynamics::dispersion(p);
  Var ell2 = square(ell);
  Var b = div(ell2, scale(enc.variance, 2.0));
  Var z_q = add(mean, mul(g.constant(rng.normal(Shape{K * Q, nz})), sd));
  Var r = drift_residual(cfg, p, z_q, tq, mean, mean_dot, b);
  Var r_rows = sum_trailing(div(square(r), ell2));
  Var int_seg = sum_trailing(reshape(mul(r_rows, g.constant(std::move(wq))), Shape{K, Q}));
  Var elbo = sub(ll_seg, scale(int_seg, 0.5));

  const Tensor& ev = elbo.value();
  for (std::size_t k = 0; k < K; ++k) {
    if (!std::isfinite(ev[k])) throw NumericalError("elbo: non-finite value on segment " + std::to_string(segs[k]->id));
  }
  if (terms) {
    for (std::size_t k = 0; k < K; ++k) {
      terms->loglik += ll_seg.value()[k];
      terms->integral += int_seg.value()[k];
      terms->elbo += ev[k];
    }
  }
  return elbo;
}

ElboGrad elbo_value_and_grad(const ModelConfig& cfg, const ParamMap& params, std::span<const SegmentData* const> segs,
                             const std::function<Rng(std::size_t)>& rng_for, const ElboOptions& opt,
                             double loss_scale, std::size_t chunk, std::size_t threads) {
  if (chunk == 0) throw UsageError("elbo: chunk size must be positive");
  const std::size_t n_chunks = (segs.size() + chunk - 1) / chunk;
  std::vector<ElboGrad> parts(n_chunks);
  parallel_for(n_chunks, threads, [&](std::size_t c) {
    const std::size_t a = c * chunk, b = std::min(segs.size(), a + chunk);
    Graph g;
    const ParamVars p = bind_params(g, params);
    Rng rng = rng_for(c);
    Var e = elbo_graph(cfg, p, segs.subspan(a, b - a), rng, opt, &parts[c].terms);
    parts[c].grad = g.backward(scale(sum(e), -loss_scale));
  });
  ElboGrad out = std::move(parts[0]);
  for (std::size_t c = 1; c < n_chunks; ++c) {
    out.terms.loglik += parts[c].terms.loglik;
    out.terms.integral += parts[c].terms.integral;
    out.terms.elbo += parts[c].terms.elbo;
    for (auto& [name, t] : out.grad) {
      const Tensor& o = parts[c].grad.at(name);
      for (std::size_t i = 0; i < t.size(); ++i) t[i] += o[i];
    }
  }
  return out;
}

}  // namespace mssde::inference
