// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <deque>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "compute/tensor.hpp"

namespace mssde {

class Graph;

/// Handle to a node recorded in a Graph.
struct Var {
  Graph* graph = nullptr;
  int id = -1;

  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
  std::size_t size() const { return value().size(); }
  bool valid() const noexcept { return graph != nullptr && id >= 0; }
};

/// Passed to a node's backward closure. Entries of `grad_in` are null for
/// inputs that do not require gradients.
struct BackwardContext {
  std::span<const Tensor* const> in;
  const Tensor& out;
  const Tensor& grad_out;
  std::span<Tensor* const> grad_in;
};

using BackwardFn = std::function<void(const BackwardContext&)>;

/// Define-by-run tape. Primitive ops evaluate eagerly and append a node whose
/// inputs precede it, so node order is a topological order.
///
/// A graph built with `record = false` keeps values only; it is used for
/// inference paths (prediction, Monte Carlo integration) where no gradient
/// is needed.
class Graph {
 public:
  explicit Graph(bool record = true) : record_(record) {}
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Var constant(Tensor value);
  /// Named leaf whose gradient is returned by backward().
  Var leaf(std::string name, Tensor value);

  Var record(std::string_view op, Tensor value, std::vector<Var> inputs, BackwardFn backward);

  const Tensor& value(Var v) const { return nodes_.at(v.id).value; }
  std::string_view op_name(Var v) const { return nodes_.at(v.id).op; }
  bool requires_grad(Var v) const { return nodes_.at(v.id).requires_grad; }
  bool recording() const noexcept { return record_; }
  std::size_t node_count() const noexcept { return nodes_.size(); }

  /// Reverse sweep from a scalar loss node. Returns gradients keyed by leaf name;
  /// leaves that the loss does not depend on receive zero tensors.
  std::map<std::string, Tensor> backward(Var loss);

  /// Gradient of the last backward() sweep for any node that required one.
  const Tensor& grad(Var v) const;

 private:
  struct Node {
    std::string_view op;
    Tensor value;
    Tensor grad;
    std::vector<int> inputs;
    BackwardFn backward;
    bool requires_grad = false;
    std::string leaf_name;
  };

  std::deque<Node> nodes_;
  bool record_;
};

inline const Tensor& Var::value() const { return graph->value(*this); }

/// Padding applied to convolution inputs outside [0, L).
enum class PadMode { kZero, kCircular };

struct ConvGeometry {
  std::size_t stride = 1;
  std::size_t padding = 0;
  PadMode mode = PadMode::kZero;
};

/// Output length of a strided convolution: floor((L + 2p - K)/s) + 1.
std::size_t conv_out_len(std::size_t len, std::size_t kernel, const ConvGeometry& geom);

namespace ops {

// Elementwise binary ops. `b` may be a scalar or match a trailing block of `a`'s
// shape, in which case it is broadcast over the leading dimensions.
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var div(Var a, Var b);

Var neg(Var a);
Var scale(Var a, double c);
Var add_scalar(Var a, double c);
Var exp(Var a);
Var log(Var a);
Var sqrt(Var a);
Var square(Var a);
Var softplus(Var a);
Var leaky_relu(Var a, double slope = 0.01);

/// Sum of all entries; rank-0 result.
Var sum(Var a);
/// [B, ...] -> [...]
Var sum_leading(Var a);
/// [..., n] -> [...]
Var sum_trailing(Var a);

/// [M, K] x [K, N] -> [M, N]
Var matmul(Var a, Var b);
/// x [B, in], w [out, in], bias [out] (optional: pass an invalid Var) -> [B, out]
Var linear(Var x, Var w, Var bias);
/// 2-D transpose.
Var transpose(Var a);

Var reshape(Var a, Shape shape);
/// Half-open range [begin, end) along `axis`.
Var slice(Var a, std::size_t axis, std::size_t begin, std::size_t end);
Var concat(std::span<const Var> parts, std::size_t axis);
Var concat(std::initializer_list<Var> parts, std::size_t axis);
/// out.flat[i] = a.flat[index[i]], or 0 where index[i] < 0.
Var gather(Var a, std::vector<long> index, Shape out_shape);

/// x [N, Cin, L], w [Cout, Cin, K], bias [Cout] optional -> [N, Cout, Lout]
Var conv1d(Var x, Var w, Var bias, const ConvGeometry& geom);
/// Adjoint of conv1d: x [N, Cin, Lin], w [Cin, Cout, K] -> [N, Cout, out_len]
Var conv_transpose1d(Var x, Var w, Var bias, const ConvGeometry& geom, std::size_t out_len);
/// x [N, Cin, H, W], w [Cout, Cin, Kh, Kw] -> [N, Cout, Ho, Wo]
Var conv2d(Var x, Var w, Var bias, const ConvGeometry& geom);
/// Adjoint of conv2d: w [Cin, Cout, Kh, Kw] -> [N, Cout, out_h, out_w]
Var conv_transpose2d(Var x, Var w, Var bias, const ConvGeometry& geom, std::size_t out_h,
                     std::size_t out_w);

}  // namespace ops
}  // namespace mssde
