// SPDX-License-Identifier: Apache-2.0
#include "baselines/sindy.hpp"

#include <cmath>

#include "core/error.hpp"

namespace mssde::baselines {

Eigen::MatrixXd pod_basis(const Eigen::MatrixXd& snapshots, std::size_t r) {
  if (r < 1 || r > static_cast<std::size_t>(std::min(snapshots.rows(), snapshots.cols()))) {
    throw UsageError("pod_basis: rank " + std::to_string(r) + " out of range");
  }
  const Eigen::BDCSVD<Eigen::MatrixXd> svd(snapshots, Eigen::ComputeThinU);
  return svd.matrixU().leftCols(static_cast<Eigen::Index>(r));
}

std::size_t library_size(std::size_t r, std::size_t order) {
  if (order < 1 || order > 2) throw UsageError("sindy: polynomial order must be 1 or 2");
  return 1 + r + (order == 2 ? r * (r + 1) / 2 : 0);
}

Eigen::VectorXd library(const Eigen::VectorXd& a, std::size_t order) {
  const std::size_t r = static_cast<std::size_t>(a.size());
  Eigen::VectorXd out(static_cast<Eigen::Index>(library_size(r, order)));
  Eigen::Index c = 0;
  out(c++) = 1.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) out(c++) = a(i);
  if (order == 2) {
    for (Eigen::Index i = 0; i < a.size(); ++i)
      for (Eigen::Index j = i; j < a.size(); ++j) out(c++) = a(i) * a(j);
  }
  return out;
}

Eigen::MatrixXd latent_derivative(const Eigen::MatrixXd& a, double dt) {
  const Eigen::Index n = a.rows();
  if (n < 2) throw DataError("sindy: need at least two snapshots per trajectory");
  if (!(dt > 0.0)) throw DataError("sindy: time step must be positive");
  Eigen::MatrixXd d(n, a.cols());
  if (n == 2) {
    d.row(0) = d.row(1) = (a.row(1) - a.row(0)) / dt;
    return d;
  }
  for (Eigen::Index k = 1; k + 1 < n; ++k) d.row(k) = (a.row(k + 1) - a.row(k - 1)) / (2.0 * dt);
  d.row(0) = (-3.0 * a.row(0) + 4.0 * a.row(1) - a.row(2)) / (2.0 * dt);
  d.row(n - 1) = (3.0 * a.row(n - 1) - 4.0 * a.row(n - 2) + a.row(n - 3)) / (2.0 * dt);
  return d;
}

namespace {

Eigen::VectorXd solve_support(const Eigen::MatrixXd& theta, const Eigen::VectorXd& y, const std::vector<bool>& keep) {
  std::vector<Eigen::Index> cols;
  for (std::size_t j = 0; j < keep.size(); ++j)
    if (keep[j]) cols.push_back(static_cast<Eigen::Index>(j));
  Eigen::VectorXd out = Eigen::VectorXd::Zero(theta.cols());
  if (cols.empty()) return out;
  Eigen::MatrixXd sub(theta.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) sub.col(static_cast<Eigen::Index>(j)) = theta.col(cols[j]);
  const Eigen::VectorXd x = sub.completeOrthogonalDecomposition().solve(y);
  for (std::size_t j = 0; j < cols.size(); ++j) out(cols[j]) = x(static_cast<Eigen::Index>(j));
  return out;
}

}  // namespace

StlsqResult stlsq(const Eigen::MatrixXd& theta, const Eigen::MatrixXd& target, double threshold,
                  std::size_t max_sweeps) {
  if (theta.rows() != target.rows()) throw ShapeError("stlsq: row counts differ");
  if (threshold < 0.0) throw UsageError("stlsq: threshold must be non-negative");
  const std::size_t L = static_cast<std::size_t>(theta.cols());
  StlsqResult res;
  res.coef = theta.completeOrthogonalDecomposition().solve(target);
  std::vector<std::vector<bool>> support(static_cast<std::size_t>(target.cols()), std::vector<bool>(L, true));
  while (res.sweeps < max_sweeps) {
    ++res.sweeps;
    bool changed = false;
    for (Eigen::Index k = 0; k < target.cols(); ++k) {
      auto& keep = support[static_cast<std::size_t>(k)];
      for (std::size_t j = 0; j < L; ++j) {
        const bool big = std::abs(res.coef(static_cast<Eigen::Index>(j), k)) >= threshold;
        if (keep[j] && !big) keep[j] = false, changed = true;
      }
      res.coef.col(k) = solve_support(theta, target.col(k), keep);
    }
    if (!changed) {
      res.converged = true;
      break;
    }
  }
  return res;
}

Eigen::VectorXd SindyModel::rhs(const Eigen::VectorXd& a) const { return coef.transpose() * library(a, order); }

SindyModel sindy_fit(const std::vector<const Trajectory*>& trajectories, std::size_t r, std::size_t order,
                     double threshold) {
  if (trajectories.empty()) throw DataError("sindy_fit: no trajectories");
  library_size(r, order);
  const Eigen::Index ny = static_cast<Eigen::Index>(trajectories.front()->n_y());
  Eigen::Index total = 0;
  for (const Trajectory* t : trajectories) {
    if (static_cast<Eigen::Index>(t->n_y()) != ny) throw ShapeError("sindy_fit: trajectory sizes differ");
    total += static_cast<Eigen::Index>(t->n_t());
  }
  Eigen::MatrixXd snaps(ny, total);
  Eigen::Index c = 0;
  for (const Trajectory* t : trajectories)
    for (std::size_t k = 0; k < t->n_t(); ++k) snaps.col(c++) = Eigen::Map<const Eigen::VectorXd>(t->state(k).data(), ny);

  SindyModel m;
  m.basis = pod_basis(snaps, r);
  m.order = order;
  m.threshold = threshold;
  const Eigen::Index L = static_cast<Eigen::Index>(library_size(r, order)), R = static_cast<Eigen::Index>(r);
  Eigen::MatrixXd theta(total, L), deriv(total, R);
  Eigen::Index row = 0;
  for (const Trajectory* t : trajectories) {
    const Eigen::Index n = static_cast<Eigen::Index>(t->n_t());
    const double dt = n > 1 ? t->times[1] - t->times[0] : 0.0;
    const Eigen::MatrixXd a = (m.basis.transpose() * snaps.middleCols(row, n)).transpose();
    deriv.middleRows(row, n) = latent_derivative(a, dt);
    for (Eigen::Index k = 0; k < n; ++k) theta.row(row + k) = library(a.row(k).transpose(), order).transpose();
    row += n;
  }
  const StlsqResult fit = stlsq(theta, deriv, threshold);
  m.coef = fit.coef;
  m.converged = fit.converged;
  return m;
}

SindyRollout sindy_predict(const SindyModel& model, std::span<const double> y0, const std::vector<double>& times,
                           std::size_t substeps) {
  const Eigen::Index ny = model.basis.rows();
  if (static_cast<Eigen::Index>(y0.size()) != ny) throw ShapeError("sindy_predict: y0 size does not match the model");
  if (times.empty()) throw UsageError("sindy_predict: no output times");
  if (substeps < 1) throw UsageError("sindy_predict: substeps must be positive");
  Eigen::VectorXd a = model.basis.transpose() * Eigen::Map<const Eigen::VectorXd>(y0.data(), ny);
  const double limit = 1e8 * std::max(1.0, a.norm());
  std::vector<double> out;
  auto push = [&] {
    const Eigen::VectorXd y = model.basis * a;
    out.insert(out.end(), y.data(), y.data() + ny);
  };
  push();
  SindyRollout res;
  for (std::size_t k = 1; k < times.size() && !res.blew_up; ++k) {
    const double h = (times[k] - times[k - 1]) / static_cast<double>(substeps);
    for (std::size_t s = 0; s < substeps; ++s) {
      const Eigen::VectorXd k1 = model.rhs(a), k2 = model.rhs(a + 0.5 * h * k1), k3 = model.rhs(a + 0.5 * h * k2),
                            k4 = model.rhs(a + h * k3);
      a += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    if (!a.allFinite() || a.norm() > limit) {
      res.blew_up = true;
    } else {
      push();
    }
  }
  const std::size_t valid = out.size() / static_cast<std::size_t>(ny);
  res.states = Tensor(Shape{valid, static_cast<std::size_t>(ny)}, std::move(out));
  return res;
}

}  // namespace mssde::baselines
