// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <numbers>

#include "compute/graph.hpp"
#include "compute/quadrature.hpp"
#include "compute/rng.hpp"
#include "likelihood/poe.hpp"
#include "support/gradcheck.hpp"

namespace mssde::testing {

struct PoeInstance {
  Tensor y, macro, micro, sz, se;
};

inline PoeInstance random_instance(Rng& rng, std::size_t B, std::size_t n) {
  PoeInstance in;
  in.y = uniform_tensor(rng, Shape{B, n}, -2.0, 2.0);
  in.macro = uniform_tensor(rng, Shape{B, n}, -2.0, 2.0);
  in.micro = uniform_tensor(rng, Shape{B, n}, -2.0, 2.0);
  in.sz = Tensor(Shape{n});
  in.se = Tensor(Shape{n});
  for (std::size_t i = 0; i < n; ++i) {
    in.sz[i] = std::exp(rng.uniform() * 6.0 - 3.0);
    in.se[i] = std::exp(rng.uniform() * 6.0 - 3.0);
  }
  return in;
}

inline Tensor run_poe(const PoeInstance& in, bool expanded) {
  Graph g(false);
  auto f = expanded ? likelihood::poe_loglik_expanded : likelihood::poe_loglik;
  return f(g.constant(in.y), g.constant(in.macro), g.constant(in.micro), g.constant(in.sz), g.constant(in.se)).value();
}

// log N(y | mu_y, Sigma_y) for row b using dense matrices.
inline double dense_logpdf(const PoeInstance& in, std::size_t b) {
  const std::size_t n = in.sz.size();
  Eigen::MatrixXd Sz = Eigen::MatrixXd::Zero(n, n), Se = Sz;
  Eigen::VectorXd y(n), m1(n), d(n);
  for (std::size_t i = 0; i < n; ++i) {
    Sz(i, i) = in.sz[i];
    Se(i, i) = in.se[i];
    y(i) = in.y[b * n + i];
    m1(i) = in.macro[b * n + i];
    d(i) = in.micro[b * n + i];
  }
  const Eigen::MatrixXd cov = (Sz + Se).inverse();
  const Eigen::VectorXd mu = m1 + cov * Se * d;
  const Eigen::LLT<Eigen::MatrixXd> llt(cov);
  const Eigen::VectorXd r = y - mu;
  const Eigen::VectorXd w = llt.matrixL().solve(r);
  const double logdet = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  return -0.5 * w.squaredNorm() - 0.5 * logdet - 0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);
}

// Tensor-product Gauss-Legendre integral of the PoE density of row 0 over
// +-9 standard deviations around its mean.
inline double poe_integral(const PoeInstance& one, std::size_t nodes = 48) {
  const QuadratureRule base = gauss_legendre(nodes);
  const std::size_t n = one.sz.size();
  std::vector<double> mu(n), sd(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double s = one.sz[i] + one.se[i];
    mu[i] = one.macro[i] + one.se[i] / s * one.micro[i];
    sd[i] = 1.0 / std::sqrt(s);
  }
  std::size_t total = 1;
  for (std::size_t i = 0; i < n; ++i) total *= nodes;
  PoeInstance grid = one;
  grid.y = Tensor(Shape{total, n});
  grid.macro = Tensor(Shape{total, n});
  grid.micro = Tensor(Shape{total, n});
  std::vector<double> w(total, 1.0);
  for (std::size_t k = 0; k < total; ++k) {
    std::size_t rem = k;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t q = rem % nodes;
      rem /= nodes;
      const double half = 9.0 * sd[i];
      grid.y[k * n + i] = mu[i] + half * base.nodes[q];
      w[k] *= half * base.weights[q];
      grid.macro[k * n + i] = one.macro[i];
      grid.micro[k * n + i] = one.micro[i];
    }
  }
  const Tensor ll = run_poe(grid, false);
  double integral = 0.0;
  for (std::size_t k = 0; k < total; ++k) integral += w[k] * std::exp(ll[k]);
  return integral;
}

}  // namespace mssde::testing
