// SPDX-License-Identifier: Apache-2.0
#include "compute/graph.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>

#include "core/error.hpp"

namespace mssde {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using CMapMat = Eigen::Map<const RowMat>;

[[noreturn]] void shape_fail(std::string_view op, const std::string& detail) {
  throw ShapeError(std::string(op) + ": " + detail);
}

Graph& graph_of(Var a) {
  if (!a.valid()) throw ShapeError("graph: operation on an unbound variable");
  return *a.graph;
}

Graph& graph_of(Var a, Var b) {
  Graph& g = graph_of(a);
  if (&graph_of(b) != &g) throw ShapeError("graph: operands belong to different graphs");
  return g;
}

// `b` is broadcast over `a` when it is a scalar or a trailing block of a's shape.
std::size_t broadcast_inner(std::string_view op, const Tensor& a, const Tensor& b) {
  if (b.size() == a.size() && b.shape() == a.shape()) return a.size();
  if (b.size() == 1) return 1;
  const auto& sa = a.shape();
  const auto& sb = b.shape();
  if (sb.size() > sa.size() || !std::equal(sb.rbegin(), sb.rend(), sa.rbegin())) {
    shape_fail(op, "cannot broadcast " + shape_str(sb) + " onto " + shape_str(sa));
  }
  return b.size();
}


template <class Fwd, class DA, class DB>
Var binary(std::string_view op, Var a, Var b, Fwd fwd, DA da, DB db) {
  Graph& g = graph_of(a, b);
  const Tensor& ta = a.value();
  const Tensor& tb = b.value();
  const std::size_t inner = broadcast_inner(op, ta, tb);
  Tensor out(ta.shape());
  for (std::size_t i = 0; i < ta.size(); ++i) out[i] = fwd(ta[i], tb[i % inner]);
  return g.record(op, std::move(out), {a, b}, [inner, da, db](const BackwardContext& c) {
    const Tensor& x = *c.in[0];
    const Tensor& y = *c.in[1];
    const std::size_t n = x.size();
    if (c.grad_in[0]) {
      Tensor& gx = *c.grad_in[0];
      for (std::size_t i = 0; i < n; ++i) gx[i] += c.grad_out[i] * da(x[i], y[i % inner], c.out[i]);
    }
    if (c.grad_in[1]) {
      Tensor& gy = *c.grad_in[1];
      for (std::size_t i = 0; i < n; ++i) gy[i % inner] += c.grad_out[i] * db(x[i], y[i % inner], c.out[i]);
    }
  });
}

template <class Fwd, class Deriv>
Var unary(std::string_view op, Var a, Fwd fwd, Deriv deriv) {
  Graph& g = graph_of(a);
  const Tensor& ta = a.value();
  Tensor out(ta.shape());
  for (std::size_t i = 0; i < ta.size(); ++i) out[i] = fwd(ta[i]);
  return g.record(op, std::move(out), {a}, [deriv](const BackwardContext& c) {
    if (!c.grad_in[0]) return;
    Tensor& gx = *c.grad_in[0];
    const Tensor& x = *c.in[0];
    for (std::size_t i = 0; i < x.size(); ++i) gx[i] += c.grad_out[i] * deriv(x[i], c.out[i]);
  });
}

// Generic strided 2-D convolution plan; 1-D convolutions use a unit height axis.
struct ConvAxis {
  std::size_t len = 1, kernel = 1, out = 1;
  std::vector<long> table;  // [out * kernel] -> input index or -1
};

ConvAxis make_axis(std::size_t len, std::size_t kernel, const ConvGeometry& g, std::size_t out) {
  ConvAxis ax{len, kernel, out, {}};
  ax.table.resize(out * kernel);
  const long L = static_cast<long>(len);
  for (std::size_t o = 0; o < out; ++o) {
    for (std::size_t k = 0; k < kernel; ++k) {
      long pos = static_cast<long>(o * g.stride + k) - static_cast<long>(g.padding);
      if (g.mode == PadMode::kCircular) {
        pos = ((pos % L) + L) % L;
      } else if (pos < 0 || pos >= L) {
        pos = -1;
      }
      ax.table[o * kernel + k] = pos;
    }
  }
  return ax;
}

ConvAxis unit_axis() { return ConvAxis{1, 1, 1, {0}}; }

struct ConvPlan {
  std::size_t batch = 0, cin = 0, cout = 0;
  ConvAxis h, w;
};

// y[n, co, oh, ow] += sum w[co, ci, kh, kw] * x[n, ci, ih, iw]
void conv_forward(const ConvPlan& p, const double* x, const double* w, double* y) {
  const std::size_t in_plane = p.h.len * p.w.len;
  const std::size_t out_plane = p.h.out * p.w.out;
  const std::size_t kplane = p.h.kernel * p.w.kernel;
  for (std::size_t n = 0; n < p.batch; ++n) {
    for (std::size_t co = 0; co < p.cout; ++co) {
      double* yp = y + (n * p.cout + co) * out_plane;
      for (std::size_t ci = 0; ci < p.cin; ++ci) {
        const double* xp = x + (n * p.cin + ci) * in_plane;
        const double* wp = w + (co * p.cin + ci) * kplane;
        for (std::size_t oh = 0; oh < p.h.out; ++oh) {
          for (std::size_t kh = 0; kh < p.h.kernel; ++kh) {
            const long ih = p.h.table[oh * p.h.kernel + kh];
            if (ih < 0) continue;
            const double* xrow = xp + static_cast<std::size_t>(ih) * p.w.len;
            double* yrow = yp + oh * p.w.out;
            for (std::size_t kw = 0; kw < p.w.kernel; ++kw) {
              const double wv = wp[kh * p.w.kernel + kw];
              for (std::size_t ow = 0; ow < p.w.out; ++ow) {
                const long iw = p.w.table[ow * p.w.kernel + kw];
                if (iw >= 0) yrow[ow] += wv * xrow[iw];
              }
            }
          }
        }
      }
    }
  }
}

// gx[n, ci, ih, iw] += sum w[co, ci, kh, kw] * gy[n, co, oh, ow]
void conv_backward_input(const ConvPlan& p, const double* gy, const double* w, double* gx) {
  const std::size_t in_plane = p.h.len * p.w.len;
  const std::size_t out_plane = p.h.out * p.w.out;
  const std::size_t kplane = p.h.kernel * p.w.kernel;
  for (std::size_t n = 0; n < p.batch; ++n) {
    for (std::size_t co = 0; co < p.cout; ++co) {
      const double* gyp = gy + (n * p.cout + co) * out_plane;
      for (std::size_t ci = 0; ci < p.cin; ++ci) {
        double* gxp = gx + (n * p.cin + ci) * in_plane;
        const double* wp = w + (co * p.cin + ci) * kplane;
        for (std::size_t oh = 0; oh < p.h.out; ++oh) {
          for (std::size_t kh = 0; kh < p.h.kernel; ++kh) {
            const long ih = p.h.table[oh * p.h.kernel + kh];
            if (ih < 0) continue;
            double* gxrow = gxp + static_cast<std::size_t>(ih) * p.w.len;
            const double* gyrow = gyp + oh * p.w.out;
            for (std::size_t kw = 0; kw < p.w.kernel; ++kw) {
              const double wv = wp[kh * p.w.kernel + kw];
              for (std::size_t ow = 0; ow < p.w.out; ++ow) {
                const long iw = p.w.table[ow * p.w.kernel + kw];
                if (iw >= 0) gxrow[iw] += wv * gyrow[ow];
              }
            }
          }
        }
      }
    }
  }
}

// gw[co, ci, kh, kw] += sum gy[n, co, oh, ow] * x[n, ci, ih, iw]
void conv_backward_weight(const ConvPlan& p, const double* x, const double* gy, double* gw) {
  const std::size_t in_plane = p.h.len * p.w.len;
  const std::size_t out_plane = p.h.out * p.w.out;
  const std::size_t kplane = p.h.kernel * p.w.kernel;
  for (std::size_t n = 0; n < p.batch; ++n) {
    for (std::size_t co = 0; co < p.cout; ++co) {
      const double* gyp = gy + (n * p.cout + co) * out_plane;
      for (std::size_t ci = 0; ci < p.cin; ++ci) {
        const double* xp = x + (n * p.cin + ci) * in_plane;
        double* gwp = gw + (co * p.cin + ci) * kplane;
        for (std::size_t oh = 0; oh < p.h.out; ++oh) {
          for (std::size_t kh = 0; kh < p.h.kernel; ++kh) {
            const long ih = p.h.table[oh * p.h.kernel + kh];
            if (ih < 0) continue;
            const double* xrow = xp + static_cast<std::size_t>(ih) * p.w.len;
            const double* gyrow = gyp + oh * p.w.out;
            for (std::size_t kw = 0; kw < p.w.kernel; ++kw) {
              double acc = 0.0;
              for (std::size_t ow = 0; ow < p.w.out; ++ow) {
                const long iw = p.w.table[ow * p.w.kernel + kw];
                if (iw >= 0) acc += gyrow[ow] * xrow[iw];
              }
              gwp[kh * p.w.kernel + kw] += acc;
            }
          }
        }
      }
    }
  }
}

void add_channel_bias(double* y, const double* b, std::size_t batch, std::size_t channels, std::size_t plane) {
  for (std::size_t n = 0; n < batch; ++n)
    for (std::size_t c = 0; c < channels; ++c) {
      double* yp = y + (n * channels + c) * plane;
      for (std::size_t i = 0; i < plane; ++i) yp[i] += b[c];
    }
}

void channel_bias_grad(const double* gy, double* gb, std::size_t batch, std::size_t channels, std::size_t plane) {
  for (std::size_t n = 0; n < batch; ++n)
    for (std::size_t c = 0; c < channels; ++c) {
      const double* gp = gy + (n * channels + c) * plane;
      double acc = 0.0;
      for (std::size_t i = 0; i < plane; ++i) acc += gp[i];
      gb[c] += acc;
    }
}

void check_bias(std::string_view op, Var bias, std::size_t channels) {
  if (bias.valid() && (bias.value().rank() != 1 || bias.value().dim(0) != channels)) {
    shape_fail(op, "bias shape " + shape_str(bias.value().shape()) + " does not match " +
                       std::to_string(channels) + " channels");
  }
}

// Shared by conv1d/conv2d: x is [N, Cin, H, W] in plan coordinates.
Var conv_impl(std::string_view op, Var x, Var w, Var bias, ConvPlan plan, Shape out_shape) {
  Graph& g = graph_of(x, w);
  const Tensor& tx = x.value();
  const Tensor& tw = w.value();
  Tensor out(std::move(out_shape));
  conv_forward(plan, tx.data(), tw.data(), out.data());
  const std::size_t plane = plan.h.out * plan.w.out;
  std::vector<Var> inputs{x, w};
  if (bias.valid()) {
    add_channel_bias(out.data(), bias.value().data(), plan.batch, plan.cout, plane);
    inputs.push_back(bias);
  }
  return g.record(op, std::move(out), std::move(inputs), [plan, plane](const BackwardContext& c) {
    if (c.grad_in[0]) conv_backward_input(plan, c.grad_out.data(), c.in[1]->data(), c.grad_in[0]->data());
    if (c.grad_in[1]) conv_backward_weight(plan, c.in[0]->data(), c.grad_out.data(), c.grad_in[1]->data());
    if (c.grad_in.size() > 2 && c.grad_in[2])
      channel_bias_grad(c.grad_out.data(), c.grad_in[2]->data(), plan.batch, plan.cout, plane);
  });
}

// Transposed convolution: `plan` describes the forward convolution whose adjoint
// this is (plan.cout = input channels of x, plan.cin = output channels).
Var conv_transpose_impl(std::string_view op, Var x, Var w, Var bias, ConvPlan plan, Shape out_shape) {
  Graph& g = graph_of(x, w);
  const Tensor& tx = x.value();
  const Tensor& tw = w.value();
  Tensor out(std::move(out_shape));
  conv_backward_input(plan, tx.data(), tw.data(), out.data());
  const std::size_t plane = plan.h.len * plan.w.len;
  std::vector<Var> inputs{x, w};
  if (bias.valid()) {
    add_channel_bias(out.data(), bias.value().data(), plan.batch, plan.cin, plane);
    inputs.push_back(bias);
  }
  return g.record(op, std::move(out), std::move(inputs), [plan, plane](const BackwardContext& c) {
    if (c.grad_in[0]) conv_forward(plan, c.grad_out.data(), c.in[1]->data(), c.grad_in[0]->data());
    if (c.grad_in[1]) conv_backward_weight(plan, c.grad_out.data(), c.in[0]->data(), c.grad_in[1]->data());
    if (c.grad_in.size() > 2 && c.grad_in[2])
      channel_bias_grad(c.grad_out.data(), c.grad_in[2]->data(), plan.batch, plan.cin, plane);
  });
}

}  // namespace

std::size_t conv_out_len(std::size_t len, std::size_t kernel, const ConvGeometry& geom) {
  if (geom.stride == 0) throw ShapeError("conv: stride must be positive");
  if (len + 2 * geom.padding < kernel) {
    throw ShapeError("conv: kernel " + std::to_string(kernel) + " exceeds padded length " +
                     std::to_string(len + 2 * geom.padding));
  }
  return (len + 2 * geom.padding - kernel) / geom.stride + 1;
}

// ---------------------------------------------------------------------------
// Graph

Var Graph::constant(Tensor value) {
  Node n;
  n.op = "constant";
  n.value = std::move(value);
  nodes_.push_back(std::move(n));
  return Var{this, static_cast<int>(nodes_.size() - 1)};
}

Var Graph::leaf(std::string name, Tensor value) {
  Node n;
  n.op = "leaf";
  n.value = std::move(value);
  n.requires_grad = record_;
  n.leaf_name = std::move(name);
  nodes_.push_back(std::move(n));
  return Var{this, static_cast<int>(nodes_.size() - 1)};
}

Var Graph::record(std::string_view op, Tensor value, std::vector<Var> inputs, BackwardFn backward) {
  Node n;
  n.op = op;
  n.value = std::move(value);
  if (record_) {
    n.inputs.reserve(inputs.size());
    for (const Var& v : inputs) {
      if (v.graph != this) throw ShapeError(std::string(op) + ": input from a different graph");
      n.inputs.push_back(v.id);
      n.requires_grad = n.requires_grad || nodes_[v.id].requires_grad;
    }
    if (n.requires_grad) n.backward = std::move(backward);
  }
  nodes_.push_back(std::move(n));
  return Var{this, static_cast<int>(nodes_.size() - 1)};
}

const Tensor& Graph::grad(Var v) const {
  const Node& n = nodes_.at(v.id);
  if (!n.requires_grad) throw ShapeError("graph: node '" + std::string(n.op) + "' has no gradient");
  return n.grad;
}

std::map<std::string, Tensor> Graph::backward(Var loss) {
  if (!record_) throw ShapeError("graph: backward() on a graph built without recording");
  Node& root = nodes_.at(loss.id);
  if (root.value.size() != 1) {
    throw ShapeError("backward: loss node '" + std::string(root.op) + "' is not scalar (shape " +
                     shape_str(root.value.shape()) + ")");
  }
  for (auto& n : nodes_) {
    if (n.requires_grad) n.grad = Tensor(n.value.shape(), 0.0);
  }
  if (root.requires_grad) root.grad[0] = 1.0;

  std::vector<const Tensor*> in;
  std::vector<Tensor*> gin;
  for (int id = loss.id; id >= 0; --id) {
    Node& n = nodes_[id];
    if (!n.requires_grad || !n.backward) continue;
    in.clear();
    gin.clear();
    for (int p : n.inputs) {
      in.push_back(&nodes_[p].value);
      gin.push_back(nodes_[p].requires_grad ? &nodes_[p].grad : nullptr);
    }
    n.backward(BackwardContext{in, n.value, n.grad, gin});
  }

  std::map<std::string, Tensor> out;
  for (auto& n : nodes_) {
    if (!n.leaf_name.empty() && n.requires_grad) {
      auto [it, inserted] = out.emplace(n.leaf_name, n.grad);
      if (!inserted) {
        for (std::size_t i = 0; i < n.grad.size(); ++i) it->second[i] += n.grad[i];
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Ops

namespace ops {

Var add(Var a, Var b) {
  return binary(
      "add", a, b, [](double x, double y) { return x + y; }, [](double, double, double) { return 1.0; },
      [](double, double, double) { return 1.0; });
}

Var sub(Var a, Var b) {
  return binary(
      "sub", a, b, [](double x, double y) { return x - y; }, [](double, double, double) { return 1.0; },
      [](double, double, double) { return -1.0; });
}

Var mul(Var a, Var b) {
  return binary(
      "mul", a, b, [](double x, double y) { return x * y; }, [](double, double y, double) { return y; },
      [](double x, double, double) { return x; });
}

Var div(Var a, Var b) {
  return binary(
      "div", a, b, [](double x, double y) { return x / y; }, [](double, double y, double) { return 1.0 / y; },
      [](double, double y, double o) { return -o / y; });
}

Var neg(Var a) {
  return unary("neg", a, [](double x) { return -x; }, [](double, double) { return -1.0; });
}

Var scale(Var a, double c) {
  return unary("scale", a, [c](double x) { return c * x; }, [c](double, double) { return c; });
}

Var add_scalar(Var a, double c) {
  return unary("add_scalar", a, [c](double x) { return x + c; }, [](double, double) { return 1.0; });
}

Var exp(Var a) {
  return unary("exp", a, [](double x) { return std::exp(x); }, [](double, double o) { return o; });
}

Var log(Var a) {
  return unary("log", a, [](double x) { return std::log(x); }, [](double x, double) { return 1.0 / x; });
}

Var sqrt(Var a) {
  return unary("sqrt", a, [](double x) { return std::sqrt(x); }, [](double, double o) { return 0.5 / o; });
}

Var square(Var a) {
  return unary("square", a, [](double x) { return x * x; }, [](double x, double) { return 2.0 * x; });
}

Var softplus(Var a) {
  return unary(
      "softplus", a,
      [](double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); },
      [](double x, double) { return 1.0 / (1.0 + std::exp(-x)); });
}

Var leaky_relu(Var a, double slope) {
  return unary(
      "leaky_relu", a, [slope](double x) { return x >= 0.0 ? x : slope * x; },
      [slope](double x, double) { return x >= 0.0 ? 1.0 : slope; });
}

Var sum(Var a) {
  Graph& g = graph_of(a);
  double acc = 0.0;
  for (double v : a.value().values()) acc += v;
  return g.record("sum", Tensor::scalar(acc), {a}, [](const BackwardContext& c) {
    if (!c.grad_in[0]) return;
    const double gv = c.grad_out[0];
    for (auto& x : c.grad_in[0]->values()) x += gv;
  });
}

Var sum_leading(Var a) {
  Graph& g = graph_of(a);
  const Tensor& t = a.value();
  if (t.rank() < 1) shape_fail("sum_leading", "rank-0 input");
  Shape rest(t.shape().begin() + 1, t.shape().end());
  Tensor out(rest, 0.0);
  const std::size_t inner = out.size();
  const std::size_t outer = t.dim(0);
  for (std::size_t b = 0; b < outer; ++b)
    for (std::size_t j = 0; j < inner; ++j) out[j] += t[b * inner + j];
  return g.record("sum_leading", std::move(out), {a}, [inner, outer](const BackwardContext& c) {
    if (!c.grad_in[0]) return;
    Tensor& gx = *c.grad_in[0];
    for (std::size_t b = 0; b < outer; ++b)
      for (std::size_t j = 0; j < inner; ++j) gx[b * inner + j] += c.grad_out[j];
  });
}

Var sum_trailing(Var a) {
  Graph& g = graph_of(a);
  const Tensor& t = a.value();
  if (t.rank() < 1) shape_fail("sum_trailing", "rank-0 input");
  Shape lead(t.shape().begin(), t.shape().end() - 1);
  Tensor out(lead, 0.0);
  const std::size_t n = t.shape().back();
  for (std::size_t i = 0; i < out.size(); ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) acc += t[i * n + j];
    out[i] = acc;
  }
  return g.record("sum_trailing", std::move(out), {a}, [n](const BackwardContext& c) {
    if (!c.grad_in[0]) return;
    Tensor& gx = *c.grad_in[0];
    for (std::size_t i = 0; i < c.grad_out.size(); ++i)
      for (std::size_t j = 0; j < n; ++j) gx[i * n + j] += c.grad_out[i];
  });
}

Var matmul(Var a, Var b) {
  Graph& g = graph_of(a, b);
  const Tensor& ta = a.value();
  const Tensor& tb = b.value();
  if (ta.rank() != 2 || tb.rank() != 2 || ta.dim(1) != tb.dim(0)) {
    shape_fail("matmul", "incompatible shapes " + shape_str(ta.shape()) + " x " + shape_str(tb.shape()));
  }
  const auto m = ta.dim(0), k = ta.dim(1), n = tb.dim(1);
  Tensor out(Shape{m, n}, 0.0);
  if (m && n && k) {
    MapMat(out.data(), m, n).noalias() = CMapMat(ta.data(), m, k) * CMapMat(tb.data(), k, n);
  }
  return g.record("matmul", std::move(out), {a, b}, [m, k, n](const BackwardContext& c) {
    if (!(m && n && k)) return;
    CMapMat go(c.grad_out.data(), m, n);
    if (c.grad_in[0]) MapMat(c.grad_in[0]->data(), m, k).noalias() += go * CMapMat(c.in[1]->data(), k, n).transpose();
    if (c.grad_in[1]) MapMat(c.grad_in[1]->data(), k, n).noalias() += CMapMat(c.in[0]->data(), m, k).transpose() * go;
  });
}

Var linear(Var x, Var w, Var bias) {
  Graph& g = graph_of(x, w);
  const Tensor& tx = x.value();
  const Tensor& tw = w.value();
  if (tx.rank() != 2 || tw.rank() != 2 || tx.dim(1) != tw.dim(1)) {
    shape_fail("linear", "input " + shape_str(tx.shape()) + " incompatible with weight " + shape_str(tw.shape()));
  }
  const auto rows = tx.dim(0), in = tx.dim(1), outd = tw.dim(0);
  check_bias("linear", bias, outd);
  Tensor out(Shape{rows, outd}, 0.0);
  if (rows && outd && in) {
    MapMat(out.data(), rows, outd).noalias() = CMapMat(tx.data(), rows, in) * CMapMat(tw.data(), outd, in).transpose();
  }
  std::vector<Var> inputs{x, w};
  if (bias.valid()) {
    const Tensor& tb = bias.value();
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t j = 0; j < outd; ++j) out[r * outd + j] += tb[j];
    inputs.push_back(bias);
  }
  return g.record("linear", std::move(out), std::move(inputs), [rows, in, outd](const BackwardContext& c) {
    CMapMat go(c.grad_out.data(), rows, outd);
    if (c.grad_in[0] && in && outd) MapMat(c.grad_in[0]->data(), rows, in).noalias() += go * CMapMat(c.in[1]->data(), outd, in);
    if (c.grad_in[1] && rows) MapMat(c.grad_in[1]->data(), outd, in).noalias() += go.transpose() * CMapMat(c.in[0]->data(), rows, in);
    if (c.grad_in.size() > 2 && c.grad_in[2]) {
      Tensor& gb = *c.grad_in[2];
      for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t j = 0; j < outd; ++j) gb[j] += c.grad_out[r * outd + j];
    }
  });
}

Var transpose(Var a) {
  Graph& g = graph_of(a);
  const Tensor& t = a.value();
  if (t.rank() != 2) shape_fail("transpose", "expects rank 2, got " + shape_str(t.shape()));
  const auto m = t.dim(0), n = t.dim(1);
  Tensor out(Shape{n, m});
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out[j * m + i] = t[i * n + j];
  return g.record("transpose", std::move(out), {a}, [m, n](const BackwardContext& c) {
    if (!c.grad_in[0]) return;
    Tensor& gx = *c.grad_in[0];
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) gx[i * n + j] += c.grad_out[j * m + i];
  });
}

Var reshape(Var a, Shape shape) {
  Graph& g = graph_of(a);
  const Tensor& t = a.value();
  if (shape_numel(shape) != t.size()) {
    shape_fail("reshape", "cannot view " + shape_str(t.shape()) + " as " + shape_str(shape));
  }
  return g.record("reshape", t.reshaped(std::move(shape)), {a}, [](const BackwardContext& c) {
    if (!c.grad_in[0]) return;
    Tensor& gx = *c.grad_in[0];
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += c.grad_out[i];
  });
}

Var slice(Var a, std::size_t axis, std::size_t begin, std::size_t end) {
  Graph& g = graph_of(a);
  const Tensor& t = a.value();
  if (axis >= t.rank() || begin > end || end > t.dim(axis)) {
    shape_fail("slice", "range [" + std::to_string(begin) + "," + std::to_string(end) + ") on axis " +
                            std::to_string(axis) + " of " + shape_str(t.shape()));
  }
  std::size_t outer = 1, inner = 1;
  for (std::size_t i = 0; i < axis; ++i) outer *= t.dim(i);
  for (std::size_t i = axis + 1; i < t.rank(); ++i) inner *= t.dim(i);
  const std::size_t full = t.dim(axis), len = end - begin;
  Shape shape = t.shape();
  shape[axis] = len;
  Tensor out(shape);
  for (std::size_t o = 0; o < outer; ++o)
    std::copy_n(t.data() + (o * full + begin) * inner, len * inner, out.data() + o * len * inner);
  return g.record("slice", std::move(out), {a}, [outer, inner, full, len, begin](const BackwardContext& c) {
    if (!c.grad_in[0]) return;
    Tensor& gx = *c.grad_in[0];
    for (std::size_t o = 0; o < outer; ++o)
      for (std::size_t i = 0; i < len * inner; ++i) gx[(o * full + begin) * inner + i] += c.grad_out[o * len * inner + i];
  });
}

Var concat(std::span<const Var> parts, std::size_t axis) {
  if (parts.empty()) shape_fail("concat", "no inputs");
  Graph& g = graph_of(parts[0]);
  const Shape& s0 = parts[0].value().shape();
  if (axis >= s0.size()) shape_fail("concat", "axis " + std::to_string(axis) + " out of range for " + shape_str(s0));
  std::size_t outer = 1, inner = 1;
  for (std::size_t i = 0; i < axis; ++i) outer *= s0[i];
  for (std::size_t i = axis + 1; i < s0.size(); ++i) inner *= s0[i];
  std::vector<std::size_t> lens;
  std::size_t total = 0;
  for (const Var& p : parts) {
    graph_of(parts[0], p);
    const Shape& s = p.value().shape();
    bool ok = s.size() == s0.size();
    for (std::size_t i = 0; ok && i < s.size(); ++i) ok = (i == axis) || s[i] == s0[i];
    if (!ok) shape_fail("concat", "part " + shape_str(s) + " incompatible with " + shape_str(s0));
    lens.push_back(s[axis]);
    total += s[axis];
  }
  Shape shape = s0;
  shape[axis] = total;
  Tensor out(shape);
  std::size_t off = 0;
  for (std::size_t p = 0; p < parts.size(); ++p) {
    const Tensor& t = parts[p].value();
    for (std::size_t o = 0; o < outer; ++o)
      std::copy_n(t.data() + o * lens[p] * inner, lens[p] * inner, out.data() + (o * total + off) * inner);
    off += lens[p];
  }
  return g.record("concat", std::move(out), std::vector<Var>(parts.begin(), parts.end()),
                  [outer, inner, total, lens](const BackwardContext& c) {
                    std::size_t off = 0;
                    for (std::size_t p = 0; p < lens.size(); ++p) {
                      if (c.grad_in[p]) {
                        Tensor& gx = *c.grad_in[p];
                        for (std::size_t o = 0; o < outer; ++o)
                          for (std::size_t i = 0; i < lens[p] * inner; ++i)
                            gx[o * lens[p] * inner + i] += c.grad_out[(o * total + off) * inner + i];
                      }
                      off += lens[p];
                    }
                  });
}

Var concat(std::initializer_list<Var> parts, std::size_t axis) {
  return concat(std::span<const Var>(parts.begin(), parts.size()), axis);
}

Var gather(Var a, std::vector<long> index, Shape out_shape) {
  Graph& g = graph_of(a);
  const Tensor& t = a.value();
  if (shape_numel(out_shape) != index.size()) {
    shape_fail("gather", std::to_string(index.size()) + " indices for output " + shape_str(out_shape));
  }
  const long n = static_cast<long>(t.size());
  Tensor out(std::move(out_shape), 0.0);
  for (std::size_t i = 0; i < index.size(); ++i) {
    const long j = index[i];
    if (j >= n) shape_fail("gather", "index " + std::to_string(j) + " out of range for " + shape_str(t.shape()));
    if (j >= 0) out[i] = t[static_cast<std::size_t>(j)];
  }
  return g.record("gather", std::move(out), {a}, [index = std::move(index)](const BackwardContext& c) {
    if (!c.grad_in[0]) return;
    Tensor& gx = *c.grad_in[0];
    for (std::size_t i = 0; i < index.size(); ++i)
      if (index[i] >= 0) gx[static_cast<std::size_t>(index[i])] += c.grad_out[i];
  });
}

Var conv1d(Var x, Var w, Var bias, const ConvGeometry& geom) {
  const Tensor& tx = x.value();
  const Tensor& tw = w.value();
  if (tx.rank() != 3 || tw.rank() != 3 || tx.dim(1) != tw.dim(1)) {
    shape_fail("conv1d", "input " + shape_str(tx.shape()) + " incompatible with kernel " + shape_str(tw.shape()));
  }
  check_bias("conv1d", bias, tw.dim(0));
  ConvPlan plan;
  plan.batch = tx.dim(0);
  plan.cin = tx.dim(1);
  plan.cout = tw.dim(0);
  plan.h = unit_axis();
  const std::size_t lout = conv_out_len(tx.dim(2), tw.dim(2), geom);
  plan.w = make_axis(tx.dim(2), tw.dim(2), geom, lout);
  return conv_impl("conv1d", x, w, bias, std::move(plan), Shape{tx.dim(0), tw.dim(0), lout});
}

Var conv_transpose1d(Var x, Var w, Var bias, const ConvGeometry& geom, std::size_t out_len) {
  const Tensor& tx = x.value();
  const Tensor& tw = w.value();
  if (tx.rank() != 3 || tw.rank() != 3 || tx.dim(1) != tw.dim(0)) {
    shape_fail("conv_transpose1d",
               "input " + shape_str(tx.shape()) + " incompatible with kernel " + shape_str(tw.shape()));
  }
  if (conv_out_len(out_len, tw.dim(2), geom) != tx.dim(2)) {
    shape_fail("conv_transpose1d", "output length " + std::to_string(out_len) + " does not map to input length " +
                                       std::to_string(tx.dim(2)));
  }
  check_bias("conv_transpose1d", bias, tw.dim(1));
  ConvPlan plan;
  plan.batch = tx.dim(0);
  plan.cout = tw.dim(0);
  plan.cin = tw.dim(1);
  plan.h = unit_axis();
  plan.w = make_axis(out_len, tw.dim(2), geom, tx.dim(2));
  return conv_transpose_impl("conv_transpose1d", x, w, bias, std::move(plan), Shape{tx.dim(0), tw.dim(1), out_len});
}

Var conv2d(Var x, Var w, Var bias, const ConvGeometry& geom) {
  const Tensor& tx = x.value();
  const Tensor& tw = w.value();
  if (tx.rank() != 4 || tw.rank() != 4 || tx.dim(1) != tw.dim(1)) {
    shape_fail("conv2d", "input " + shape_str(tx.shape()) + " incompatible with kernel " + shape_str(tw.shape()));
  }
  check_bias("conv2d", bias, tw.dim(0));
  ConvPlan plan;
  plan.batch = tx.dim(0);
  plan.cin = tx.dim(1);
  plan.cout = tw.dim(0);
  const std::size_t ho = conv_out_len(tx.dim(2), tw.dim(2), geom);
  const std::size_t wo = conv_out_len(tx.dim(3), tw.dim(3), geom);
  plan.h = make_axis(tx.dim(2), tw.dim(2), geom, ho);
  plan.w = make_axis(tx.dim(3), tw.dim(3), geom, wo);
  return conv_impl("conv2d", x, w, bias, std::move(plan), Shape{tx.dim(0), tw.dim(0), ho, wo});
}

Var conv_transpose2d(Var x, Var w, Var bias, const ConvGeometry& geom, std::size_t out_h, std::size_t out_w) {
  const Tensor& tx = x.value();
  const Tensor& tw = w.value();
  if (tx.rank() != 4 || tw.rank() != 4 || tx.dim(1) != tw.dim(0)) {
    shape_fail("conv_transpose2d",
               "input " + shape_str(tx.shape()) + " incompatible with kernel " + shape_str(tw.shape()));
  }
  if (conv_out_len(out_h, tw.dim(2), geom) != tx.dim(2) || conv_out_len(out_w, tw.dim(3), geom) != tx.dim(3)) {
    shape_fail("conv_transpose2d", "output extent does not map to the input extent");
  }
  check_bias("conv_transpose2d", bias, tw.dim(1));
  ConvPlan plan;
  plan.batch = tx.dim(0);
  plan.cout = tw.dim(0);
  plan.cin = tw.dim(1);
  plan.h = make_axis(out_h, tw.dim(2), geom, tx.dim(2));
  plan.w = make_axis(out_w, tw.dim(3), geom, tx.dim(3));
  return conv_transpose_impl("conv_transpose2d", x, w, bias, std::move(plan),
                             Shape{tx.dim(0), tw.dim(1), out_h, out_w});
}

}  // namespace ops
}  // namespace mssde
