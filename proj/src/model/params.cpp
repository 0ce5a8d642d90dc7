// SPDX-License-Identifier: Apache-2.0
#include "model/params.hpp"

#include <cmath>

#include "core/error.hpp"

namespace mssde {

namespace {

std::size_t pow_dim(std::size_t base, std::size_t dim) {
  std::size_t n = 1;
  for (std::size_t a = 0; a < dim; ++a) n *= base;
  return n;
}

void add_linear(std::map<std::string, ParamInfo>& out, const std::string& name, std::size_t in, std::size_t outd) {
  out[name + ".w"] = {Shape{outd, in}, ParamKind::kWeight, in, outd};
  out[name + ".b"] = {Shape{outd}, ParamKind::kBias};
}

Shape conv_shape(std::size_t a, std::size_t b, std::size_t k, std::size_t dim) {
  return dim == 1 ? Shape{a, b, k} : Shape{a, b, k, k};
}

struct Block {
  std::size_t from, to, len;
};

// Column layout of the micro-drift input: [eta | psi(zeta) | chi].
std::vector<Block> micro_input_blocks(const ModelConfig& a, const ModelConfig& b) {
  return {{0, 0, a.n_eta}, {a.n_eta, b.n_eta, a.psi_dim()}, {a.n_eta + a.psi_dim(), b.n_eta + b.psi_dim(), 1}};
}

}  // namespace

std::map<std::string, ParamInfo> param_layout(const ModelConfig& cfg) {
  cfg.validate();
  std::map<std::string, ParamInfo> out;
  const std::size_t d = cfg.grid.dim, du = cfg.grid.fields, K = cfg.kernel_len(), k = cfg.enc_kernel;
  out["scale.kernel"] = {d == 1 ? Shape{du, K} : Shape{du, K, K}, ParamKind::kSmoothKernel};
  out["enc.sigma_raw"] = {Shape{cfg.n_z()}, ParamKind::kSoftplus};
  out["disp.ell_raw"] = {Shape{cfg.n_z()}, ParamKind::kSoftplus};
  out["poe.log_s_zeta"] = {Shape{cfg.n_y()}, ParamKind::kLogPrecision};
  out["poe.log_s_eta"] = {Shape{cfg.n_y()}, ParamKind::kLogPrecision};

  const std::size_t kk = pow_dim(k, d);
  if (cfg.n_eta > 0) {
    std::size_t cin = du;
    for (std::size_t i = 0; i < cfg.enc_filters.size(); ++i) {
      const std::size_t cout = cfg.enc_filters[i];
      const std::string n = "menc.c" + std::to_string(i);
      out[n + ".w"] = {conv_shape(cout, cin, k, d), ParamKind::kWeight, cin * kk, cout * kk};
      out[n + ".b"] = {Shape{cout}, ParamKind::kBias};
      cin = cout;
    }
    add_linear(out, "menc.out", cfg.enc_features(), cfg.n_eta);
    add_linear(out, "mdec.in", cfg.n_eta, cfg.enc_features());
    for (std::size_t i = cfg.enc_filters.size(); i-- > 0;) {
      const std::size_t tin = cfg.enc_filters[i];
      const std::size_t tout = i == 0 ? du : cfg.enc_filters[i - 1];
      const std::string n = "mdec.t" + std::to_string(i);
      out[n + ".w"] = {conv_shape(tin, tout, k, d), ParamKind::kWeight, tin * kk, tout * kk};
      out[n + ".b"] = {Shape{tout}, ParamKind::kBias};
    }
  }

  std::size_t in = cfg.macro_in();
  for (std::size_t i = 0; i <= cfg.macro_layers; ++i) {
    const std::size_t o = i == cfg.macro_layers ? du : cfg.macro_hidden;
    add_linear(out, "macro.l" + std::to_string(i), in, o);
    in = o;
  }
  if (cfg.n_eta > 0) {
    if (d > 1) out["micro.psi.w"] = {Shape{cfg.n_eta, cfg.n_zeta()}, ParamKind::kWeight, cfg.n_zeta(), cfg.n_eta};
    in = cfg.micro_in();
    for (std::size_t i = 0; i <= cfg.micro_layers; ++i) {
      const std::size_t o = i == cfg.micro_layers ? cfg.n_eta : cfg.micro_hidden;
      add_linear(out, "micro.l" + std::to_string(i), in, o);
      in = o;
    }
  }
  return out;
}

double softplus_inverse(double v) {
  if (!(v > 0.0)) throw UsageError("softplus_inverse: argument must be positive");
  return v > 30.0 ? v + std::log1p(-std::exp(-v)) : std::log(std::expm1(v));
}

namespace {

Tensor gaussian_kernel(const ModelConfig& cfg) {
  const std::size_t K = cfg.kernel_len(), du = cfg.grid.fields, d = cfg.grid.dim;
  const double width = static_cast<double>(cfg.s());
  const double c = static_cast<double>(K / 2);
  std::vector<double> g(K);
  double sum = 0.0;
  for (std::size_t i = 0; i < K; ++i) {
    const double x = static_cast<double>(i) - c;
    g[i] = std::exp(-0.5 * x * x / (width * width));
    sum += g[i];
  }
  for (auto& v : g) v /= sum;
  Tensor out(d == 1 ? Shape{du, K} : Shape{du, K, K});
  const std::size_t per = d == 1 ? K : K * K;
  for (std::size_t f = 0; f < du; ++f) {
    for (std::size_t i = 0; i < per; ++i) out[f * per + i] = d == 1 ? g[i] : g[i / K] * g[i % K];
  }
  return out;
}

}  // namespace

ParamMap init_params(const ModelConfig& cfg, Rng& rng) {
  ParamMap out;
  const double log_prec = std::log(cfg.sigma_obs > 0.0 ? 1.0 / (cfg.sigma_obs * cfg.sigma_obs) : kInitPrecisionUnknown);
  for (const auto& [name, info] : param_layout(cfg)) {
    Tensor t(info.shape);
    switch (info.kind) {
      case ParamKind::kWeight: {
        const double sd = std::sqrt(2.0 / static_cast<double>(info.fan_in + info.fan_out));
        for (auto& v : t.values()) v = sd * rng.normal();
        break;
      }
      case ParamKind::kBias:
        break;
      case ParamKind::kSmoothKernel:
        t = gaussian_kernel(cfg);
        break;
      case ParamKind::kSoftplus:
        t.fill(softplus_inverse(kInitVariance));
        break;
      case ParamKind::kLogPrecision:
        t.fill(log_prec);
        break;
    }
    out.emplace(name, std::move(t));
  }
  return out;
}

namespace {

// Copies the leading corner of `src` into `dst`, with optional remapping of
// the last axis.
void embed(const Tensor& src, Tensor& dst, const std::vector<Block>* last_axis) {
  const std::size_t r = src.rank();
  if (r != dst.rank()) throw DataError("grow_params: rank mismatch");
  if (r == 0) {
    dst[0] = src[0];
    return;
  }
  const std::size_t sl = src.dim(r - 1), dl = dst.dim(r - 1);
  std::size_t rows = 1;
  for (std::size_t a = 0; a + 1 < r; ++a) {
    if (src.dim(a) > dst.dim(a)) throw DataError("grow_params: parameter shrinks");
    rows *= src.dim(a);
  }
  std::vector<Block> blocks = last_axis ? *last_axis : std::vector<Block>{{0, 0, std::min(sl, dl)}};
  // Row-major index of a source row in the destination.
  for (std::size_t row = 0; row < rows; ++row) {
    std::size_t rem = row, drow = 0, mul = 1;
    for (std::size_t a = r - 1; a-- > 0;) {
      const std::size_t i = rem % src.dim(a);
      rem /= src.dim(a);
      drow += i * mul;
      mul *= dst.dim(a);
    }
    for (const auto& b : blocks) {
      for (std::size_t j = 0; j < b.len; ++j) dst[drow * dl + b.to + j] = src[row * sl + b.from + j];
    }
  }
}

}  // namespace

ParamMap grow_params(const ParamMap& prev, const ModelConfig& prev_cfg, const ModelConfig& next, Rng& rng) {
  check_params(prev_cfg, prev);
  if (next.n_eta < prev_cfg.n_eta) throw UsageError("grow_params: n_eta cannot decrease");
  ModelConfig same = prev_cfg;
  same.n_eta = next.n_eta;
  if (!(same == next)) throw UsageError("grow_params: only n_eta may change between stages");
  ParamMap out = init_params(next, rng);
  const auto blocks = micro_input_blocks(prev_cfg, next);
  for (auto& [name, t] : out) {
    auto it = prev.find(name);
    if (it == prev.end()) continue;
    embed(it->second, t, name == "micro.l0.w" ? &blocks : nullptr);
  }
  return out;
}

void check_params(const ModelConfig& cfg, const ParamMap& params) {
  const auto layout = param_layout(cfg);
  if (layout.size() != params.size()) {
    throw DataError("parameter set has " + std::to_string(params.size()) + " tensors, model expects " +
                    std::to_string(layout.size()));
  }
  for (const auto& [name, info] : layout) {
    auto it = params.find(name);
    if (it == params.end()) throw DataError("missing parameter '" + name + "'");
    if (it->second.shape() != info.shape) {
      throw DataError("parameter '" + name + "' has shape " + shape_str(it->second.shape()) + ", expected " +
                      shape_str(info.shape));
    }
  }
}

ParamVars bind_params(Graph& g, const ParamMap& params, bool trainable) {
  ParamVars out;
  for (const auto& [name, t] : params) out.emplace(name, trainable ? g.leaf(name, t) : g.constant(t));
  return out;
}

Var param(const ParamVars& p, const std::string& name) {
  auto it = p.find(name);
  if (it == p.end()) throw ShapeError("missing parameter '" + name + "'");
  return it->second;
}

}  // namespace mssde
