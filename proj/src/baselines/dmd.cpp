// SPDX-License-Identifier: Apache-2.0
#include "baselines/dmd.hpp"

#include <limits>

#include "core/error.hpp"

namespace mssde::baselines {

DmdModel dmd_fit(const Eigen::MatrixXd& X1, const Eigen::MatrixXd& X2, std::size_t r, double lambda) {
  if (X1.cols() < 1 || X1.rows() != X2.rows() || X1.cols() != X2.cols()) {
    throw ShapeError("dmd_fit: need matching snapshot matrices with at least one pair");
  }
  if (r < 1) throw UsageError("dmd_fit: rank must be positive");
  if (lambda < 0.0) throw UsageError("dmd_fit: lambda must be non-negative");
  DmdModel m;
  m.lambda = lambda;
  const Eigen::BDCSVD<Eigen::MatrixXd> svd(X1, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& s = svd.singularValues();
  const double tol = s.size() > 0 ? s(0) * static_cast<double>(std::max(X1.rows(), X1.cols())) *
                                        std::numeric_limits<double>::epsilon()
                                  : 0.0;
  std::size_t numeric = 0;
  while (numeric < static_cast<std::size_t>(s.size()) && s(numeric) > tol) ++numeric;
  if (numeric == 0) throw DataError("dmd_fit: snapshot matrix is zero");
  if (numeric < r) {
    m.warnings.push_back("dmd: data rank " + std::to_string(numeric) + " below requested rank " + std::to_string(r) +
                         "; using " + std::to_string(numeric));
    r = numeric;
  }
  m.rank = r;
  const Eigen::Index k = static_cast<Eigen::Index>(r);
  m.basis = svd.matrixU().leftCols(k);
  const Eigen::VectorXd sk = s.head(k);
  const Eigen::VectorXd gain = sk.array() / (sk.array().square() + lambda);
  m.op = m.basis.transpose() * X2 * svd.matrixV().leftCols(k) * gain.asDiagonal();
  const Eigen::EigenSolver<Eigen::MatrixXd> eig(m.op);
  m.eigenvalues = eig.eigenvalues();
  m.modes = m.basis.cast<std::complex<double>>() * eig.eigenvectors();
  return m;
}

DmdModel dmd_fit(const std::vector<const Trajectory*>& trajectories, std::size_t r, double lambda) {
  Eigen::Index pairs = 0, ny = -1;
  for (const Trajectory* t : trajectories) {
    if (t->n_t() < 2) throw DataError("dmd_fit: trajectories need at least two snapshots");
    if (ny >= 0 && static_cast<Eigen::Index>(t->n_y()) != ny) throw ShapeError("dmd_fit: trajectory sizes differ");
    ny = static_cast<Eigen::Index>(t->n_y());
    pairs += static_cast<Eigen::Index>(t->n_t() - 1);
  }
  if (pairs == 0) throw DataError("dmd_fit: no trajectories");
  Eigen::MatrixXd X1(ny, pairs), X2(ny, pairs);
  Eigen::Index c = 0;
  for (const Trajectory* t : trajectories) {
    for (std::size_t k = 0; k + 1 < t->n_t(); ++k, ++c) {
      X1.col(c) = Eigen::Map<const Eigen::VectorXd>(t->state(k).data(), ny);
      X2.col(c) = Eigen::Map<const Eigen::VectorXd>(t->state(k + 1).data(), ny);
    }
  }
  return dmd_fit(X1, X2, r, lambda);
}

Tensor dmd_predict(const DmdModel& model, std::span<const double> y0, std::size_t n_steps) {
  const Eigen::Index ny = model.basis.rows();
  if (static_cast<Eigen::Index>(y0.size()) != ny) throw ShapeError("dmd_predict: y0 size does not match the model");
  Tensor out(Shape{n_steps + 1, static_cast<std::size_t>(ny)});
  Eigen::VectorXd a = model.basis.transpose() * Eigen::Map<const Eigen::VectorXd>(y0.data(), ny);
  for (std::size_t k = 0; k <= n_steps; ++k) {
    if (k > 0) a = model.op * a;
    Eigen::Map<Eigen::VectorXd>(out.data() + k * ny, ny) = model.basis * a;
  }
  return out;
}

}  // namespace mssde::baselines
