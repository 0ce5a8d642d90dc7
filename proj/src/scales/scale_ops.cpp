// SPDX-License-Identifier: Apache-2.0
#include "scales/scale_ops.hpp"

#include "core/error.hpp"

namespace mssde::scales {

namespace {

using namespace mssde::ops;

std::size_t batch_of(Var v, std::size_t width, const char* what) {
  const Shape& s = v.shape();
  if (s.size() != 2 || s[1] != width) {
    throw ShapeError(std::string(what) + ": expected [B, " + std::to_string(width) + "], got " + shape_str(s));
  }
  return s[0];
}

Shape spatial(std::size_t batch, std::size_t channels, std::size_t len, std::size_t dim) {
  return dim == 1 ? Shape{batch, channels, len} : Shape{batch, channels, len, len};
}

Var kernel_of(const ModelConfig& cfg, const ParamVars& p, std::size_t field) {
  Var k = param(p, "scale.kernel");
  const std::size_t K = cfg.kernel_len();
  if (cfg.grid.fields > 1) k = slice(k, 0, field, field + 1);
  return reshape(k, cfg.grid.dim == 1 ? Shape{1, 1, K} : Shape{1, 1, K, K});
}

Var conv(const ModelConfig& cfg, Var x, Var w, Var b, const ConvGeometry& g) {
  return cfg.grid.dim == 1 ? conv1d(x, w, b, g) : conv2d(x, w, b, g);
}

Var conv_t(const ModelConfig& cfg, Var x, Var w, Var b, const ConvGeometry& g, std::size_t len) {
  return cfg.grid.dim == 1 ? conv_transpose1d(x, w, b, g, len) : conv_transpose2d(x, w, b, g, len, len);
}

// Applies `op` to each field channel separately.
template <class Op>
Var per_field(const ModelConfig& cfg, Var x, Op op) {
  const std::size_t du = cfg.grid.fields;
  if (du == 1) return op(x, 0);
  std::vector<Var> parts;
  for (std::size_t f = 0; f < du; ++f) parts.push_back(op(slice(x, 1, f, f + 1), f));
  return concat(parts, 1);
}

Var depthwise(const ModelConfig& cfg, const ParamVars& p, Var y, std::size_t stride, const char* what) {
  const std::size_t B = batch_of(y, cfg.n_y(), what);
  const std::size_t n = cfg.grid.points[0];
  const ConvGeometry g{stride, cfg.kernel_pad(), cfg.pad_mode()};
  Var x = reshape(y, spatial(B, cfg.grid.fields, n, cfg.grid.dim));
  Var out = per_field(cfg, x, [&](Var xf, std::size_t f) { return conv(cfg, xf, kernel_of(cfg, p, f), Var{}, g); });
  return reshape(out, Shape{B, out.size() / B});
}

}  // namespace

Var smooth(const ModelConfig& cfg, const ParamVars& p, Var y) { return depthwise(cfg, p, y, 1, "smooth"); }

Var residual(const ModelConfig& cfg, const ParamVars& p, Var y) { return sub(y, smooth(cfg, p, y)); }

Var restrict_coarse(const ModelConfig& cfg, const ParamVars& p, Var ybar) {
  return depthwise(cfg, p, ybar, cfg.s(), "restrict");
}

Var prolong(const ModelConfig& cfg, const ParamVars& p, Var zeta) {
  const std::size_t B = batch_of(zeta, cfg.n_zeta(), "prolong");
  const ConvGeometry g{cfg.s(), cfg.kernel_pad(), cfg.pad_mode()};
  const std::size_t n = cfg.grid.points[0];
  Var x = reshape(zeta, spatial(B, cfg.grid.fields, cfg.coarse, cfg.grid.dim));
  Var out = per_field(cfg, x, [&](Var xf, std::size_t f) { return conv_t(cfg, xf, kernel_of(cfg, p, f), Var{}, g, n); });
  return reshape(out, Shape{B, cfg.n_y()});
}

Var encode_micro(const ModelConfig& cfg, const ParamVars& p, Var ytilde) {
  const std::size_t B = batch_of(ytilde, cfg.n_y(), "encode_micro");
  Graph& gr = *ytilde.graph;
  if (cfg.n_eta == 0) return gr.constant(Tensor(Shape{B, 0}));
  const ConvGeometry g{2, cfg.enc_kernel / 2, cfg.pad_mode()};
  Var h = reshape(ytilde, spatial(B, cfg.grid.fields, cfg.grid.points[0], cfg.grid.dim));
  for (std::size_t i = 0; i < cfg.enc_filters.size(); ++i) {
    const std::string n = "menc.c" + std::to_string(i);
    h = leaky_relu(conv(cfg, h, param(p, n + ".w"), param(p, n + ".b"), g));
  }
  h = reshape(h, Shape{B, cfg.enc_features()});
  return linear(h, param(p, "menc.out.w"), param(p, "menc.out.b"));
}

Var decode_micro(const ModelConfig& cfg, const ParamVars& p, Var eta) {
  const std::size_t B = batch_of(eta, cfg.n_eta, "decode_micro");
  Graph& gr = *eta.graph;
  if (cfg.n_eta == 0) return gr.constant(Tensor(Shape{B, cfg.n_y()}));
  const ConvGeometry g{2, cfg.enc_kernel / 2, cfg.pad_mode()};
  const auto len = cfg.enc_lengths();
  const std::size_t L = cfg.enc_filters.size();
  Var h = leaky_relu(linear(eta, param(p, "mdec.in.w"), param(p, "mdec.in.b")));
  h = reshape(h, spatial(B, cfg.enc_filters.back(), len[L], cfg.grid.dim));
  for (std::size_t i = L; i-- > 0;) {
    const std::string n = "mdec.t" + std::to_string(i);
    h = conv_t(cfg, h, param(p, n + ".w"), param(p, n + ".b"), g, len[i]);
    if (i > 0) h = leaky_relu(h);
  }
  return reshape(h, Shape{B, cfg.n_y()});
}

Var encoder_variance(const ParamVars& p) { return softplus(param(p, "enc.sigma_raw")); }

Encoded encode(const ModelConfig& cfg, const ParamVars& p, Var y) {
  Var ybar = smooth(cfg, p, y);
  Var zeta = restrict_coarse(cfg, p, ybar);
  if (cfg.n_eta == 0) return {zeta, encoder_variance(p)};
  Var eta = encode_micro(cfg, p, sub(y, ybar));
  return {concat({zeta, eta}, 1), encoder_variance(p)};
}

}  // namespace mssde::scales
