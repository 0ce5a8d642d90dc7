// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss.hpp>
#include <cmath>

#include "compute/adam.hpp"
#include "compute/graph.hpp"
#include "compute/quadrature.hpp"
#include "compute/rng.hpp"
#include "core/error.hpp"
#include "support/gradcheck.hpp"

using namespace mssde;
using namespace mssde::testing;

TEST(Tensor, RejectsSizeMismatch) {
  EXPECT_THROW(Tensor(Shape{2, 3}, std::vector<double>(5)), ShapeError);
  EXPECT_EQ(Tensor::scalar(3.0).item(), 3.0);
  EXPECT_THROW(Tensor(Shape{2}).item(), ShapeError);
}

TEST(Forward, IdentityMatmul) {
  Graph g;
  Tensor eye(Shape{3, 3}, {1, 0, 0, 0, 1, 0, 0, 0, 1});
  Tensor a(Shape{3, 2}, {1, 2, 3, 4, 5, 6});
  Var out = ops::matmul(g.constant(eye), g.constant(a));
  EXPECT_EQ(out.value(), a);
}

TEST(Forward, LeakyReluSlope) {
  Graph g;
  Var out = ops::leaky_relu(g.constant(Tensor::vector({-1.0, 2.0})));
  EXPECT_DOUBLE_EQ(out.value()[0], -0.01);
  EXPECT_DOUBLE_EQ(out.value()[1], 2.0);
}

TEST(Forward, DeltaKernelConvIsIdentity) {
  Graph g;
  Rng rng(1);
  Tensor x = uniform_tensor(rng, {2, 1, 11});
  Tensor k(Shape{1, 1, 5}, {0, 0, 1, 0, 0});
  for (PadMode mode : {PadMode::kZero, PadMode::kCircular}) {
    Var y = ops::conv1d(g.constant(x), g.constant(k), Var{}, ConvGeometry{1, 2, mode});
    EXPECT_EQ(y.value(), x);
  }
}

TEST(Forward, ShapeErrorNamesOp) {
  Graph g;
  try {
    ops::matmul(g.constant(Tensor(Shape{2, 3})), g.constant(Tensor(Shape{2, 3})));
    FAIL();
  } catch (const ShapeError& e) {
    EXPECT_NE(std::string(e.what()).find("matmul"), std::string::npos);
  }
}

TEST(Backward, NonScalarLossThrows) {
  Graph g;
  Var x = g.leaf("x", Tensor::vector({1, 2}));
  EXPECT_THROW(g.backward(ops::square(x)), ShapeError);
}

TEST(Backward, LinearFormGradient) {
  Graph g;
  Tensor xv = Tensor::vector({0.5, -2.0, 3.0});
  Var w = g.leaf("w", Tensor::vector({1, 1, 1}));
  Var x = g.constant(xv);
  auto grads = g.backward(ops::sum(ops::mul(w, x)));
  EXPECT_EQ(grads.at("w"), xv);
}

TEST(Backward, QuadraticFormMatchesFiniteDifferences) {
  Rng rng(2);
  ParamMap p{{"W", uniform_tensor(rng, {4, 3})}};
  Tensor x = uniform_tensor(rng, {3, 1});
  auto err = grad_errors(p, [&](Graph& g, const VarMap& v) {
    return ops::sum(ops::square(ops::matmul(v.at("W"), g.constant(x))));
  });
  EXPECT_LT(err.at("W"), 1e-6);
}

TEST(Backward, ConvLeakyChainMatchesFiniteDifferences) {
  Rng rng(3);
  ParamMap p{{"x", uniform_tensor(rng, {2, 2, 13})}, {"w", uniform_tensor(rng, {3, 2, 5})}, {"b", uniform_tensor(rng, {3})}};
  auto err = grad_errors(p, [](Graph&, const VarMap& v) {
    Var y = ops::conv1d(v.at("x"), v.at("w"), v.at("b"), ConvGeometry{2, 2, PadMode::kCircular});
    return ops::sum(ops::square(ops::leaky_relu(y)));
  });
  for (auto& [k, e] : err) EXPECT_LT(e, 1e-6) << k;
}

// Every primitive against central differences on inputs in [-1, 1].
TEST(Backward, EveryPrimitiveMatchesFiniteDifferences) {
  Rng rng(4);
  const Tensor c = uniform_tensor(rng, {3, 4});
  auto check = [&](const char* name, ParamMap p, LossBuilder f) {
    for (auto& [k, e] : grad_errors(p, f)) EXPECT_LT(e, 1e-4) << name << ":" << k;
  };
  auto A = [&] { return uniform_tensor(rng, {3, 4}); };
  auto pos = [&] { return uniform_tensor(rng, {3, 4}, 0.5, 1.5); };
  auto weigh = [&](Graph& g, Var y) {
    Tensor w = c;
    if (y.size() != c.size()) w = Tensor(y.shape(), 0.37);
    else w = c.reshaped(y.shape());
    return ops::sum(ops::mul(y, g.constant(w)));
  };
  check("add", {{"a", A()}, {"b", A()}}, [&](Graph& g, const VarMap& v) { return weigh(g, ops::add(v.at("a"), v.at("b"))); });
  check("add_bcast", {{"a", A()}, {"b", uniform_tensor(rng, {4})}},
        [&](Graph& g, const VarMap& v) { return weigh(g, ops::mul(v.at("a"), v.at("b"))); });
  check("sub", {{"a", A()}, {"b", A()}}, [&](Graph& g, const VarMap& v) { return weigh(g, ops::sub(v.at("a"), v.at("b"))); });
  check("mul", {{"a", A()}, {"b", A()}}, [&](Graph& g, const VarMap& v) { return weigh(g, ops::mul(v.at("a"), v.at("b"))); });
  check("div", {{"a", A()}, {"b", pos()}}, [&](Graph& g, const VarMap& v) { return weigh(g, ops::div(v.at("a"), v.at("b"))); });
  check("div_scalar", {{"a", A()}, {"b", Tensor::scalar(1.3)}},
        [&](Graph& g, const VarMap& v) { return weigh(g, ops::div(v.at("a"), v.at("b"))); });
  check("neg", {{"a", A()}}, [&](Graph& g, const VarMap& v) { return weigh(g, ops::neg(v.at("a"))); });
  check("scale", {{"a", A()}}, [&](Graph& g, const VarMap& v) { return weigh(g, ops::scale(v.at("a"), -2.5)); });
  check("exp", {{"a", A()}}, [&](Graph& g, const VarMap& v) { return weigh(g, ops::exp(v.at("a"))); });
  check("log", {{"a", pos()}}, [&](Graph& g, const VarMap& v) { return weigh(g, ops::log(v.at("a"))); });
  check("sqrt", {{"a", pos()}}, [&](Graph& g, const VarMap& v) { return weigh(g, ops::sqrt(v.at("a"))); });
  check("square", {{"a", A()}}, [&](Graph& g, const VarMap& v) { return weigh(g, ops::square(v.at("a"))); });
  check("softplus", {{"a", A()}}, [&](Graph& g, const VarMap& v) { return weigh(g, ops::softplus(v.at("a"))); });
  check("leaky", {{"a", A()}}, [&](Graph& g, const VarMap& v) { return weigh(g, ops::leaky_relu(v.at("a"))); });
  check("sum_leading", {{"a", A()}}, [&](Graph& g, const VarMap& v) { return weigh(g, ops::sum_leading(v.at("a"))); });
  check("sum_trailing", {{"a", A()}}, [&](Graph& g, const VarMap& v) { return weigh(g, ops::sum_trailing(v.at("a"))); });
  check("matmul", {{"a", A()}, {"b", uniform_tensor(rng, {4, 2})}},
        [&](Graph& g, const VarMap& v) { return weigh(g, ops::matmul(v.at("a"), v.at("b"))); });
  check("linear", {{"x", A()}, {"w", uniform_tensor(rng, {5, 4})}, {"b", uniform_tensor(rng, {5})}},
        [&](Graph& g, const VarMap& v) { return weigh(g, ops::linear(v.at("x"), v.at("w"), v.at("b"))); });
  check("transpose", {{"a", A()}}, [&](Graph& g, const VarMap& v) { return weigh(g, ops::transpose(v.at("a"))); });
  check("reshape", {{"a", A()}}, [&](Graph& g, const VarMap& v) { return weigh(g, ops::reshape(v.at("a"), {4, 3})); });
  check("slice", {{"a", A()}}, [&](Graph& g, const VarMap& v) { return weigh(g, ops::slice(v.at("a"), 1, 1, 3)); });
  check("concat", {{"a", A()}, {"b", uniform_tensor(rng, {3, 2})}},
        [&](Graph& g, const VarMap& v) { return weigh(g, ops::concat({v.at("a"), v.at("b")}, 1)); });
  check("gather", {{"a", A()}}, [&](Graph& g, const VarMap& v) {
    return weigh(g, ops::gather(v.at("a"), {0, 5, -1, 5, 11, 2}, {2, 3}));
  });
  check("conv2d", {{"x", uniform_tensor(rng, {1, 2, 7, 6})}, {"w", uniform_tensor(rng, {3, 2, 3, 3})}, {"b", uniform_tensor(rng, {3})}},
        [&](Graph& g, const VarMap& v) {
          return weigh(g, ops::conv2d(v.at("x"), v.at("w"), v.at("b"), ConvGeometry{2, 1, PadMode::kZero}));
        });
  check("convT1d", {{"x", uniform_tensor(rng, {2, 3, 5})}, {"w", uniform_tensor(rng, {3, 2, 5})}, {"b", uniform_tensor(rng, {2})}},
        [&](Graph& g, const VarMap& v) {
          return weigh(g, ops::conv_transpose1d(v.at("x"), v.at("w"), v.at("b"), ConvGeometry{2, 2, PadMode::kZero}, 10));
        });
  check("convT2d", {{"x", uniform_tensor(rng, {1, 2, 4, 3})}, {"w", uniform_tensor(rng, {2, 3, 5, 5})}},
        [&](Graph& g, const VarMap& v) {
          return weigh(g, ops::conv_transpose2d(v.at("x"), v.at("w"), Var{}, ConvGeometry{2, 2, PadMode::kCircular}, 8, 6));
        });
}

struct AdjointCase {
  std::size_t len, kernel, stride, padding;
  PadMode mode;
};

TEST(Conv, TransposeIsAdjoint1d) {
  Rng rng(5);
  for (AdjointCase c : {AdjointCase{200, 61, 10, 30, PadMode::kCircular}, AdjointCase{250, 41, 10, 20, PadMode::kCircular},
                        AdjointCase{200, 9, 2, 4, PadMode::kZero}, AdjointCase{50, 9, 2, 4, PadMode::kZero},
                        AdjointCase{13, 5, 3, 1, PadMode::kZero}, AdjointCase{17, 7, 1, 3, PadMode::kCircular}}) {
    const ConvGeometry geom{c.stride, c.padding, c.mode};
    const std::size_t lout = conv_out_len(c.len, c.kernel, geom);
    Tensor x = uniform_tensor(rng, {2, 3, c.len});
    Tensor y = uniform_tensor(rng, {2, 4, lout});
    Tensor k = uniform_tensor(rng, {4, 3, c.kernel});
    Graph g(false);
    Var cx = ops::conv1d(g.constant(x), g.constant(k), Var{}, geom);
    Var ty = ops::conv_transpose1d(g.constant(y), g.constant(k), Var{}, geom, c.len);
    EXPECT_NEAR(dot(cx.value(), y), dot(x, ty.value()), 1e-10 * std::abs(dot(x, ty.value())) + 1e-10);
  }
}

TEST(Conv, TransposeIsAdjoint2d) {
  Rng rng(6);
  for (AdjointCase c : {AdjointCase{64, 5, 2, 2, PadMode::kZero}, AdjointCase{16, 9, 4, 4, PadMode::kZero},
                        AdjointCase{12, 7, 1, 3, PadMode::kCircular}}) {
    const ConvGeometry geom{c.stride, c.padding, c.mode};
    const std::size_t lout = conv_out_len(c.len, c.kernel, geom);
    Tensor x = uniform_tensor(rng, {1, 2, c.len, c.len});
    Tensor y = uniform_tensor(rng, {1, 3, lout, lout});
    Tensor k = uniform_tensor(rng, {3, 2, c.kernel, c.kernel});
    Graph g(false);
    Var cx = ops::conv2d(g.constant(x), g.constant(k), Var{}, geom);
    Var ty = ops::conv_transpose2d(g.constant(y), g.constant(k), Var{}, geom, c.len, c.len);
    EXPECT_NEAR(dot(cx.value(), y), dot(x, ty.value()), 1e-10 * std::abs(dot(x, ty.value())) + 1e-10);
  }
}

TEST(Graph, ForwardIsBitDeterministic) {
  Rng rng(7);
  Tensor x = uniform_tensor(rng, {3, 1, 40});
  Tensor k = uniform_tensor(rng, {4, 1, 9});
  auto run = [&] {
    Graph g(false);
    return ops::leaky_relu(ops::conv1d(g.constant(x), g.constant(k), Var{}, ConvGeometry{2, 4, PadMode::kZero})).value();
  };
  EXPECT_EQ(run(), run());
}

TEST(Graph, NoRecordKeepsValuesOnly) {
  Graph g(false);
  Var a = g.leaf("a", Tensor::vector({1, 2}));
  Var b = ops::mul(a, a);
  EXPECT_FALSE(g.requires_grad(b));
  EXPECT_THROW(g.backward(ops::sum(b)), ShapeError);
}

TEST(Adam, ZeroGradientLeavesParametersUnchanged) {
  Adam opt(AdamConfig{.lr = 0.1});
  ParamMap p{{"w", Tensor::vector({1.0, -2.0})}};
  const ParamMap before = p;
  opt.step(p, {{"w", Tensor::vector({0.0, 0.0})}});
  EXPECT_EQ(p.at("w"), before.at("w"));
  EXPECT_EQ(opt.steps(), 1u);
}

TEST(Adam, FirstStepMagnitudeIsLearningRate) {
  // m1 = 0.1, v1 = 0.001, bias-corrected ratio 1/(1 + 1e-8)
  const double lr = 1e-3;
  Adam opt(AdamConfig{.lr = lr});
  ParamMap p{{"w", Tensor::vector({0.0})}};
  opt.step(p, {{"w", Tensor::vector({1.0})}});
  EXPECT_NEAR(p.at("w")[0], -lr / (1.0 + 1e-8), 1e-18);
}

TEST(Adam, DecaysEveryInterval) {
  Adam opt(AdamConfig{.lr = 1e-3, .decay_interval = 2000});
  ParamMap p{{"w", Tensor::vector({0.0})}};
  for (int i = 0; i < 1999; ++i) opt.step(p, {{"w", Tensor::vector({0.0})}});
  EXPECT_DOUBLE_EQ(opt.lr(), 1e-3);
  opt.step(p, {{"w", Tensor::vector({0.0})}});
  EXPECT_DOUBLE_EQ(opt.lr(), 0.9 * 1e-3);
}

TEST(Adam, NanGradientNamesParameter) {
  Adam opt;
  ParamMap p{{"drift.w0", Tensor::vector({0.0})}};
  try {
    opt.step(p, {{"drift.w0", Tensor::vector({std::nan("")})}});
    FAIL();
  } catch (const NumericalError& e) {
    EXPECT_NE(std::string(e.what()).find("drift.w0"), std::string::npos);
  }
}

TEST(Rng, PhiloxKnownAnswer) {
  // Random123 known-answer vectors for philox4x32-10.
  auto z = philox4x32({0, 0, 0, 0}, {0, 0});
  EXPECT_EQ(z[0], 0x6627e8d5u);
  EXPECT_EQ(z[1], 0xe169c58du);
  EXPECT_EQ(z[2], 0xbc57ac4cu);
  EXPECT_EQ(z[3], 0x9b00dbd8u);
  auto f = philox4x32({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu});
  EXPECT_EQ(f[0], 0x408f276du);
  EXPECT_EQ(f[1], 0x41c83b0eu);
  EXPECT_EQ(f[2], 0xa20bc7c6u);
  EXPECT_EQ(f[3], 0x6d5451fdu);
}

TEST(Rng, GaussianMoments) {
  Rng rng(8);
  const std::size_t n = 1000000;
  double s = 0.0, s2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = rng.normal();
    s += x;
    s2 += x * x;
  }
  const double mean = s / n;
  const double var = s2 / n - mean * mean;
  EXPECT_LT(std::abs(mean), 0.01);
  EXPECT_LT(std::abs(var - 1.0), 0.01);
}

TEST(Rng, SameSeedSameStream) {
  Rng a(42), b(42), c(42, 1);
  Tensor ta = a.normal(Shape{1000}), tb = b.normal(Shape{1000}), tc = c.normal(Shape{1000});
  EXPECT_EQ(ta, tb);
  EXPECT_NE(ta, tc);
}

TEST(Rng, StateRoundTrip) {
  Rng a(9);
  for (int i = 0; i < 7; ++i) a.normal();
  a.next_u32();
  Rng b = Rng::from_state(a.state());
  for (int i = 0; i < 20; ++i) EXPECT_EQ(a.normal(), b.normal());
}

TEST(Quadrature, MatchesBoostGaussLegendre) {
  using boost::math::quadrature::gauss;
  const auto& bx = gauss<double, 64>::abscissa();
  const auto& bw = gauss<double, 64>::weights();
  QuadratureRule r = gauss_legendre(64);
  // boost stores the non-negative half
  for (std::size_t i = 0; i < bx.size(); ++i) {
    EXPECT_NEAR(r.nodes[32 + i], bx[i], 1e-14);
    EXPECT_NEAR(r.weights[32 + i], bw[i], 1e-14);
    EXPECT_NEAR(r.nodes[31 - i], -bx[i], 1e-14);
  }
}

TEST(Quadrature, IntegratesPolynomialsExactly) {
  for (std::size_t n : {1u, 2u, 5u, 64u}) {
    QuadratureRule r = gauss_legendre(n, 0.5, 2.0);
    const int deg = static_cast<int>(2 * n - 1);
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += r.weights[i] * std::pow(r.nodes[i], deg);
    const double exact = (std::pow(2.0, deg + 1) - std::pow(0.5, deg + 1)) / (deg + 1);
    EXPECT_NEAR(s, exact, 1e-11 * exact) << n;
  }
}
