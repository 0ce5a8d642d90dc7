// SPDX-License-Identifier: Apache-2.0
#include "dynamics/drift.hpp"

#include <cmath>
#include <numbers>

#include "core/error.hpp"

namespace mssde::dynamics {

using namespace mssde::ops;

namespace {

std::size_t coarse_points(const ModelConfig& cfg) { return cfg.n_zeta() / cfg.grid.fields; }

long neighbour(long i, long off, long n, bool periodic) {
  long j = i + off;
  if (periodic) return ((j % n) + n) % n;
  return std::clamp(j, 0L, n - 1);
}

Var mlp(const ParamVars& p, const std::string& prefix, std::size_t layers, Var h) {
  for (std::size_t i = 0; i <= layers; ++i) {
    const std::string n = prefix + std::to_string(i);
    h = linear(h, param(p, n + ".w"), param(p, n + ".b"));
    if (i < layers) h = leaky_relu(h);
  }
  return h;
}

// Row-broadcast of x [B, k] to [B, P, k].
Var repeat_rows(Var x, std::size_t P) {
  const std::size_t B = x.shape()[0], k = x.shape()[1];
  std::vector<long> idx(B * P * k);
  for (std::size_t b = 0; b < B; ++b)
    for (std::size_t q = 0; q < P; ++q)
      for (std::size_t e = 0; e < k; ++e) idx[(b * P + q) * k + e] = static_cast<long>(b * k + e);
  return gather(x, std::move(idx), Shape{B, P, k});
}

void check_batch(Var v, std::size_t width, const char* what) {
  if (v.shape().size() != 2 || v.shape()[1] != width) {
    throw ShapeError(std::string(what) + ": expected [B, " + std::to_string(width) + "], got " + shape_str(v.shape()));
  }
}

}  // namespace

std::vector<long> stencil_index(const ModelConfig& cfg) {
  const long n = static_cast<long>(cfg.coarse), q = static_cast<long>(cfg.stencil_q);
  const long w = 2 * q + 1;
  const std::size_t P = coarse_points(cfg), du = cfg.grid.fields;
  const bool periodic = cfg.grid.boundary == Boundary::kPeriodic;
  const std::size_t F = cfg.grid.dim == 1 ? du * w : du * w * w;
  std::vector<long> idx(P * F);
  for (std::size_t pt = 0; pt < P; ++pt) {
    std::size_t col = 0;
    for (std::size_t f = 0; f < du; ++f) {
      const long base = static_cast<long>(f * P);
      if (cfg.grid.dim == 1) {
        for (long o = -q; o <= q; ++o) idx[pt * F + col++] = base + neighbour(static_cast<long>(pt), o, n, periodic);
      } else {
        const long i = static_cast<long>(pt) / n, j = static_cast<long>(pt) % n;
        for (long oi = -q; oi <= q; ++oi)
          for (long oj = -q; oj <= q; ++oj)
            idx[pt * F + col++] = base + neighbour(i, oi, n, periodic) * n + neighbour(j, oj, n, periodic);
      }
    }
  }
  return idx;
}

Var macro_drift(const ModelConfig& cfg, const ParamVars& p, Var zeta, Var eta) {
  check_batch(zeta, cfg.n_zeta(), "macro_drift");
  check_batch(eta, cfg.n_eta, "macro_drift");
  Graph& g = *zeta.graph;
  const std::size_t B = zeta.shape()[0], P = coarse_points(cfg), du = cfg.grid.fields, nz = cfg.n_zeta();
  const std::vector<long> st = stencil_index(cfg);
  const std::size_t F = st.size() / P;
  std::vector<long> idx(B * st.size());
  for (std::size_t b = 0; b < B; ++b)
    for (std::size_t i = 0; i < st.size(); ++i) idx[b * st.size() + i] = static_cast<long>(b * nz) + st[i];
  std::vector<Var> parts{gather(zeta, std::move(idx), Shape{B, P, F})};
  if (cfg.positional) {
    const std::size_t d = cfg.grid.dim, n = cfg.coarse;
    Tensor pos(Shape{B, P, 2 * d});
    for (std::size_t pt = 0; pt < P; ++pt) {
      for (std::size_t a = 0; a < d; ++a) {
        const std::size_t i = d == 1 ? pt : (a == 0 ? pt / n : pt % n);
        const double phase = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n);
        for (std::size_t b = 0; b < B; ++b) {
          pos[(b * P + pt) * 2 * d + 2 * a] = std::cos(phase);
          pos[(b * P + pt) * 2 * d + 2 * a + 1] = std::sin(phase);
        }
      }
    }
    parts.push_back(g.constant(std::move(pos)));
  }
  if (cfg.n_eta > 0) parts.push_back(repeat_rows(eta, P));
  Var in = parts.size() == 1 ? parts[0] : concat(parts, 2);
  Var out = mlp(p, "macro.l", cfg.macro_layers, reshape(in, Shape{B * P, cfg.macro_in()}));
  if (du == 1) return reshape(out, Shape{B, P});
  std::vector<long> perm(B * nz);
  for (std::size_t b = 0; b < B; ++b)
    for (std::size_t f = 0; f < du; ++f)
      for (std::size_t pt = 0; pt < P; ++pt) perm[b * nz + f * P + pt] = static_cast<long>((b * P + pt) * du + f);
  return gather(out, std::move(perm), Shape{B, nz});
}

Var micro_drift(const ModelConfig& cfg, const ParamVars& p, Var eta, Var zeta, const std::vector<double>& t) {
  check_batch(zeta, cfg.n_zeta(), "micro_drift");
  check_batch(eta, cfg.n_eta, "micro_drift");
  Graph& g = *eta.graph;
  const std::size_t B = eta.shape()[0];
  if (cfg.n_eta == 0) return g.constant(Tensor(Shape{B, 0}));
  if (t.size() != B && t.size() != 1) throw ShapeError("micro_drift: need one time per batch row");
  Tensor chi(Shape{B, 1});
  for (std::size_t b = 0; b < B; ++b) chi[b] = t[t.size() == 1 ? 0 : b] / cfg.time_scale;
  Var psi = cfg.grid.dim == 1 ? zeta : linear(zeta, param(p, "micro.psi.w"), Var{});
  Var in = concat({eta, psi, g.constant(std::move(chi))}, 1);
  return mlp(p, "micro.l", cfg.micro_layers, in);
}

Var drift(const ModelConfig& cfg, const ParamVars& p, Var z, const std::vector<double>& t) {
  check_batch(z, cfg.n_z(), "drift");
  const std::size_t nz = cfg.n_zeta();
  Var zeta = slice(z, 1, 0, nz);
  Var eta = slice(z, 1, nz, cfg.n_z());
  Var f = macro_drift(cfg, p, zeta, eta);
  if (cfg.n_eta == 0) return f;
  return concat({f, micro_drift(cfg, p, eta, zeta, t)}, 1);
}

Var dispersion(const ParamVars& p) { return softplus(param(p, "disp.ell_raw")); }

}  // namespace mssde::dynamics
