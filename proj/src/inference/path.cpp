// SPDX-License-Identifier: Apache-2.0
#include "inference/path.hpp"

#include <algorithm>
#include <cmath>

#include "core/error.hpp"
#include "dynamics/drift.hpp"

namespace mssde::inference {

HermiteBasis hermite_basis(const std::vector<double>& anchors, const std::vector<double>& t) {
  const std::size_t M = anchors.size(), Q = t.size();
  if (M < 2) throw UsageError("hermite_basis: need at least two anchors");
  for (std::size_t j = 1; j < M; ++j) {
    if (!(anchors[j] > anchors[j - 1])) throw UsageError("hermite_basis: anchor times must increase");
  }
  // slope_j = sum_k D(j, k) f_k
  std::vector<double> D(M * M, 0.0);
  for (std::size_t j = 0; j < M; ++j) {
    const std::size_t lo = j == 0 ? 0 : j - 1, hi = j + 1 == M ? M - 1 : j + 1;
    const double h = anchors[hi] - anchors[lo];
    D[j * M + hi] += 1.0 / h;
    D[j * M + lo] -= 1.0 / h;
  }
  HermiteBasis out{Tensor(Shape{Q, M}), Tensor(Shape{Q, M})};
  for (std::size_t q = 0; q < Q; ++q) {
    const double tq = t[q];
    if (tq < anchors.front() - 1e-12 || tq > anchors.back() + 1e-12) {
      throw UsageError("hermite_basis: query time outside the anchor range");
    }
    std::size_t j = static_cast<std::size_t>(std::upper_bound(anchors.begin(), anchors.end(), tq) - anchors.begin());
    j = std::clamp<std::size_t>(j, 1, M - 1) - 1;
    const double h = anchors[j + 1] - anchors[j];
    const double u = (tq - anchors[j]) / h, u2 = u * u, u3 = u2 * u;
    const double h00 = 2 * u3 - 3 * u2 + 1, h10 = u3 - 2 * u2 + u, h01 = -2 * u3 + 3 * u2, h11 = u3 - u2;
    const double d00 = (6 * u2 - 6 * u) / h, d10 = 3 * u2 - 4 * u + 1, d01 = (-6 * u2 + 6 * u) / h, d11 = 3 * u2 - 2 * u;
    double* v = out.value.data() + q * M;
    double* d = out.deriv.data() + q * M;
    v[j] += h00;
    v[j + 1] += h01;
    d[j] += d00;
    d[j + 1] += d01;
    for (std::size_t k = 0; k < M; ++k) {
      v[k] += h * h10 * D[j * M + k] + h * h11 * D[(j + 1) * M + k];
      d[k] += d10 * D[j * M + k] + d11 * D[(j + 1) * M + k];
    }
  }
  return out;
}

PathValues evaluate_path(const std::vector<double>& anchors, const Tensor& anchor_mean, const Tensor& anchor_var,
                         const std::vector<double>& t) {
  const std::size_t M = anchors.size();
  if (anchor_mean.rank() != 2 || anchor_mean.dim(0) != M || anchor_var.shape() != anchor_mean.shape()) {
    throw ShapeError("evaluate_path: anchors must be [M, n_z]");
  }
  for (double v : anchor_var.values()) {
    if (!(v > 0.0)) throw NumericalError("evaluate_path: anchor variances must be positive");
  }
  const HermiteBasis H = hermite_basis(anchors, t);
  const std::size_t Q = t.size(), n = anchor_mean.dim(1);
  using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  Eigen::Map<const RowMat> W(H.value.data(), Q, M), Wd(H.deriv.data(), Q, M), mu(anchor_mean.data(), M, n);
  RowMat logv = Eigen::Map<const RowMat>(anchor_var.data(), M, n).array().log().matrix();
  PathValues out{Tensor(Shape{Q, n}), Tensor(Shape{Q, n}), Tensor(Shape{Q, n}), Tensor(Shape{Q, n})};
  Eigen::Map<RowMat>(out.mean.data(), Q, n) = W * mu;
  Eigen::Map<RowMat>(out.mean_dot.data(), Q, n) = Wd * mu;
  RowMat lv = W * logv, lvd = Wd * logv;
  Eigen::Map<RowMat>(out.var.data(), Q, n) = lv.array().exp().matrix();
  Eigen::Map<RowMat>(out.var_dot.data(), Q, n) = (lv.array().exp() * lvd.array()).matrix();
  return out;
}

Tensor b_matrix(const Tensor& var, const Tensor& var_dot, const Tensor& ell) {
  if (var.shape() != var_dot.shape()) throw ShapeError("b_matrix: var and var_dot shapes differ");
  const std::size_t n = ell.size();
  if (var.size() % n != 0 || var.shape().back() != n) throw ShapeError("b_matrix: trailing size must equal n_z");
  Tensor out(var.shape());
  for (std::size_t i = 0; i < var.size(); ++i) {
    if (!(var[i] > 0.0)) throw NumericalError("b_matrix: variance must be positive");
    const double l = ell[i % n];
    out[i] = (l * l - var_dot[i]) / (2.0 * var[i]);
  }
  return out;
}

Eigen::MatrixXd b_matrix_dense(const Eigen::MatrixXd& sigma, const Eigen::MatrixXd& sigma_dot,
                               const Eigen::MatrixXd& L) {
  const Eigen::Index n = sigma.rows();
  if (sigma.cols() != n || sigma_dot.rows() != n || sigma_dot.cols() != n || L.rows() != n) {
    throw ShapeError("b_matrix_dense: dimension mismatch");
  }
  // Sigma (x) I + I (x) Sigma
  Eigen::MatrixXd ksum = Eigen::MatrixXd::Zero(n * n, n * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      for (Eigen::Index k = 0; k < n; ++k) {
        ksum(i * n + k, j * n + k) += sigma(i, j);
        ksum(k * n + i, k * n + j) += sigma(i, j);
      }
    }
  }
  const Eigen::MatrixXd rhs = L * L.transpose() - sigma_dot;
  const Eigen::VectorXd vec = Eigen::Map<const Eigen::VectorXd>(rhs.data(), n * n);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(ksum);
  if (!lu.isInvertible()) throw NumericalError("b_matrix_dense: singular Kronecker sum");
  const Eigen::VectorXd b = lu.solve(vec);
  return Eigen::Map<const Eigen::MatrixXd>(b.data(), n, n);
}

Var drift_residual(const ModelConfig& cfg, const ParamVars& p, Var z, const std::vector<double>& t, Var mean,
                   Var mean_dot, Var b) {
  using namespace mssde::ops;
  Var gamma = dynamics::drift(cfg, p, z, t);
  return sub(sub(mean_dot, mul(sub(z, mean), b)), gamma);
}

}  // namespace mssde::inference
