// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "baselines/coarse_dns.hpp"
#include "baselines/dmd.hpp"
#include "baselines/sindy.hpp"
#include "core/error.hpp"
#include "datagen/problems.hpp"
#include "predict/predict.hpp"

using namespace mssde;
using namespace mssde::baselines;

namespace {

Eigen::MatrixXd orthonormal(int rows, int cols, unsigned seed) {
  std::srand(seed);
  const Eigen::MatrixXd M = Eigen::MatrixXd::Random(rows, cols);
  return Eigen::HouseholderQR<Eigen::MatrixXd>(M).householderQ() * Eigen::MatrixXd::Identity(rows, cols);
}

Trajectory from_latent(const Eigen::MatrixXd& Q, const std::vector<Eigen::VectorXd>& z, double dt) {
  Trajectory t;
  const std::size_t ny = static_cast<std::size_t>(Q.rows());
  t.states = Tensor(Shape{z.size(), ny});
  for (std::size_t k = 0; k < z.size(); ++k) {
    t.times.push_back(dt * static_cast<double>(k));
    Eigen::Map<Eigen::VectorXd>(t.states.data() + k * ny, static_cast<Eigen::Index>(ny)) = Q * z[k];
  }
  return t;
}

}  // namespace

TEST(Dmd, RecoversPlantedEigenvalues) {
  const Eigen::MatrixXd Q = orthonormal(5, 2, 1);
  std::vector<Eigen::VectorXd> z{Eigen::Vector2d(1.0, -0.7)};
  for (int k = 0; k < 12; ++k) z.push_back(Eigen::Vector2d(0.9 * z.back()(0), 0.5 * z.back()(1)));
  const Trajectory t = from_latent(Q, z, 0.1);
  const DmdModel m = dmd_fit({&t}, 2, 0.0);
  ASSERT_EQ(m.rank, 2u);
  std::vector<double> ev{m.eigenvalues(0).real(), m.eigenvalues(1).real()};
  std::sort(ev.begin(), ev.end());
  EXPECT_NEAR(ev[0], 0.5, 1e-8);
  EXPECT_NEAR(ev[1], 0.9, 1e-8);
  EXPECT_NEAR(std::abs(m.eigenvalues(0).imag()) + std::abs(m.eigenvalues(1).imag()), 0.0, 1e-12);
  EXPECT_LT((m.basis.transpose() * m.basis - Eigen::Matrix2d::Identity()).norm(), 1e-12);
  EXPECT_TRUE(m.warnings.empty());

  const DmdModel big = dmd_fit({&t}, 4, 0.0);
  EXPECT_EQ(big.rank, 2u);
  EXPECT_EQ(big.warnings.size(), 1u);
}

TEST(Dmd, ScalarRidgeAndLimit) {
  Eigen::MatrixXd x1(1, 1), x2(1, 1);
  x1 << -1.7;
  x2 << 0.9;
  for (double lambda : {0.0, 0.01, 2.0}) {
    const DmdModel m = dmd_fit(x1, x2, 1, lambda);
    EXPECT_NEAR(m.op(0, 0), 0.9 * -1.7 / (1.7 * 1.7 + lambda), 1e-14);
  }
  EXPECT_LT(std::abs(dmd_fit(x1, x2, 1, 1e14).op(0, 0)), 1e-13);
  EXPECT_THROW(dmd_fit(x1, x2, 1, -1.0), UsageError);
  EXPECT_THROW(dmd_fit(Eigen::MatrixXd::Zero(2, 3), Eigen::MatrixXd::Zero(2, 3), 1), DataError);
}

TEST(Dmd, PredictionMatchesReducedOperator) {
  DmdModel m;
  m.rank = 2;
  m.basis = orthonormal(4, 2, 2);
  m.op = Eigen::Matrix2d::Identity();
  const std::vector<double> y0{0.3, -1.0, 2.0, 0.5};
  const Eigen::VectorXd proj = m.basis * (m.basis.transpose() * Eigen::Map<const Eigen::VectorXd>(y0.data(), 4));
  const Tensor c = dmd_predict(m, y0, 5);
  ASSERT_EQ(c.shape(), (Shape{6, 4}));
  for (std::size_t k = 0; k < 6; ++k)
    for (int i = 0; i < 4; ++i) EXPECT_NEAR(c[k * 4 + i], proj(i), 1e-14);

  m.op << 0.6, 0.5, -0.4, 0.3;
  const Tensor p = dmd_predict(m, y0, 40);
  const Eigen::VectorXd one = m.basis * m.op * m.basis.transpose() * Eigen::Map<const Eigen::VectorXd>(y0.data(), 4);
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(p[4 + i], one(i), 1e-14);
  auto norm = [&](std::size_t k) {
    double s = 0.0;
    for (int i = 0; i < 4; ++i) s += p[k * 4 + i] * p[k * 4 + i];
    return std::sqrt(s);
  };
  for (std::size_t k = 20; k < 40; ++k) EXPECT_LE(norm(k + 1), norm(k));
  EXPECT_THROW(dmd_predict(m, std::vector<double>(3), 1), ShapeError);
}

TEST(Sindy, LibraryLayout) {
  EXPECT_EQ(library_size(2, 2), 6u);
  EXPECT_EQ(library_size(3, 1), 4u);
  EXPECT_EQ(library_size(22, 2), 1u + 22u + 253u);
  EXPECT_THROW(library_size(2, 3), UsageError);
  const Eigen::VectorXd l = library(Eigen::Vector2d(2.0, 3.0), 2);
  Eigen::VectorXd e(6);
  e << 1, 2, 3, 4, 6, 9;
  EXPECT_EQ(l, e);
}

TEST(Sindy, DerivativeExactForQuadratics) {
  Eigen::MatrixXd a(6, 1);
  for (int k = 0; k < 6; ++k) a(k, 0) = 1.0 + 2.0 * (0.1 * k) - 3.0 * (0.1 * k) * (0.1 * k);
  const Eigen::MatrixXd d = latent_derivative(a, 0.1);
  for (int k = 0; k < 6; ++k) EXPECT_NEAR(d(k, 0), 2.0 - 6.0 * 0.1 * k, 1e-12);
}

TEST(Sindy, RecoversLinearDecay) {
  const Eigen::MatrixXd v = orthonormal(3, 1, 3);
  std::vector<Trajectory> trajs;
  for (double x0 : {1.0, -0.6, 2.5}) {
    std::vector<Eigen::VectorXd> z;
    for (int k = 0; k <= 200; ++k) z.push_back(Eigen::VectorXd::Constant(1, x0 * std::exp(-2.0 * 1e-3 * k)));
    trajs.push_back(from_latent(v, z, 1e-3));
  }
  std::vector<const Trajectory*> ptrs;
  for (const auto& t : trajs) ptrs.push_back(&t);
  const SindyModel m = sindy_fit(ptrs, 1, 1, 0.1);
  EXPECT_TRUE(m.converged);
  EXPECT_EQ(m.coef(0, 0), 0.0);
  EXPECT_NEAR(m.coef(1, 0), -2.0, 1e-3);

  const SindyModel q = sindy_fit(ptrs, 1, 2, 0.1);
  EXPECT_EQ(q.coef(0, 0), 0.0);
  EXPECT_EQ(q.coef(2, 0), 0.0);
  EXPECT_NEAR(q.coef(1, 0), -2.0, 1e-3);

  const SindyModel zero = sindy_fit(ptrs, 1, 1, 5.0);
  EXPECT_TRUE(zero.coef.isZero(0.0));
}

TEST(Sindy, StlsqResultIsFixedPoint) {
  std::srand(4);
  const Eigen::MatrixXd theta = Eigen::MatrixXd::Random(60, 6);
  Eigen::MatrixXd truth = Eigen::MatrixXd::Zero(6, 2);
  truth(1, 0) = 1.5, truth(4, 0) = -0.8, truth(2, 1) = 0.6;
  const Eigen::MatrixXd y = theta * truth + 0.01 * Eigen::MatrixXd::Random(60, 2);
  const StlsqResult r = stlsq(theta, y, 0.2);
  ASSERT_TRUE(r.converged);
  for (Eigen::Index k = 0; k < 2; ++k) {
    std::vector<Eigen::Index> keep;
    for (Eigen::Index j = 0; j < 6; ++j)
      if (std::abs(r.coef(j, k)) >= 0.2) keep.push_back(j);
    Eigen::MatrixXd sub(60, static_cast<Eigen::Index>(keep.size()));
    for (std::size_t j = 0; j < keep.size(); ++j) sub.col(static_cast<Eigen::Index>(j)) = theta.col(keep[j]);
    const Eigen::VectorXd x = sub.completeOrthogonalDecomposition().solve(y.col(k));
    Eigen::VectorXd again = Eigen::VectorXd::Zero(6);
    for (std::size_t j = 0; j < keep.size(); ++j) again(keep[j]) = x(static_cast<Eigen::Index>(j));
    EXPECT_EQ(again, r.coef.col(k));
  }
  EXPECT_EQ((r.coef.array() != 0.0).count(), 3);
}

TEST(Sindy, PodOrthonormalAndMonotone) {
  std::srand(5);
  const Eigen::MatrixXd X = Eigen::MatrixXd::Random(12, 30);
  double prev = 1e300;
  for (std::size_t r = 1; r <= 12; ++r) {
    const Eigen::MatrixXd U = pod_basis(X, r);
    EXPECT_LT((U.transpose() * U - Eigen::MatrixXd::Identity(r, r)).norm(), 1e-10);
    const double err = (X - U * U.transpose() * X).norm();
    EXPECT_LE(err, prev + 1e-12);
    prev = err;
  }
  EXPECT_LT(prev, 1e-10);
  EXPECT_THROW(pod_basis(X, 13), UsageError);
}

TEST(Sindy, RolloutOrderAndBlowUp) {
  SindyModel m;
  m.basis = orthonormal(3, 1, 6);
  m.order = 1;
  m.coef = Eigen::MatrixXd::Zero(2, 1);
  const Eigen::Vector3d y0 = m.basis.col(0) * 0.7;
  const std::vector<double> y0v(y0.data(), y0.data() + 3);
  std::vector<double> times;
  for (int k = 0; k <= 4; ++k) times.push_back(0.25 * k);
  const SindyRollout flat = sindy_predict(m, y0v, times);
  ASSERT_EQ(flat.states.shape(), (Shape{5, 3}));
  for (std::size_t k = 0; k < 5; ++k)
    for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(flat.states[k * 3 + i], y0(i), 1e-15);
  // lift then project returns the latent state
  EXPECT_NEAR((m.basis.transpose() * m.basis * Eigen::VectorXd::Constant(1, 0.7))(0), 0.7, 1e-15);

  m.coef(1, 0) = -1.0;
  std::vector<double> errs;
  for (std::size_t sub : {2u, 4u, 8u}) {
    const SindyRollout r = sindy_predict(m, y0v, times, sub);
    const Eigen::Map<const Eigen::Vector3d> last(r.states.data() + 12);
    errs.push_back(std::abs((m.basis.transpose() * last)(0) - 0.7 * std::exp(-1.0)));
  }
  EXPECT_NEAR(errs[0] / errs[1], 16.0, 1.5);
  EXPECT_NEAR(errs[1] / errs[2], 16.0, 1.5);

  m.order = 2;
  m.coef = Eigen::MatrixXd::Zero(3, 1);
  m.coef(2, 0) = 1.0;  // a' = a^2 blows up at t = 1 / a0
  const Eigen::Vector3d y1 = m.basis.col(0);
  std::vector<double> long_times;
  for (int k = 0; k <= 40; ++k) long_times.push_back(0.05 * k);
  const SindyRollout b = sindy_predict(m, std::vector<double>(y1.data(), y1.data() + 3), long_times, 4);
  EXPECT_TRUE(b.blew_up);
  EXPECT_LT(b.states.dim(0), long_times.size());
  EXPECT_GE(b.states.dim(0), 15u);
}

TEST(CoarseDns, InterpolationExactOnCubicsAndSharedNodes) {
  const GridSpec fine = make_grid_1d(31, 0.0, 3.0, Boundary::kDirichlet);
  const GridSpec coarse = make_grid_1d(7, 0.0, 3.0, Boundary::kDirichlet);
  auto f = [](double x) { return 1.0 - x + 0.5 * x * x - 0.2 * x * x * x; };
  std::vector<double> vc(7);
  for (std::size_t i = 0; i < 7; ++i) vc[i] = f(coarse.coord(0, i));
  const auto up = interpolate_cubic(coarse, vc, fine);
  for (std::size_t j = 0; j < 31; ++j) EXPECT_NEAR(up[j], f(fine.coord(0, j)), 1e-12);
  const auto down = interpolate_cubic(fine, up, coarse);
  for (std::size_t i = 0; i < 7; ++i) EXPECT_EQ(down[i], up[5 * i]);

  const GridSpec pf = make_grid_1d(200, 0.0, 1.0, Boundary::kPeriodic);
  std::vector<double> errs;
  for (std::size_t n : {20u, 40u, 80u}) {
    const GridSpec pc = make_grid_1d(n, 0.0, 1.0, Boundary::kPeriodic);
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = std::sin(2.0 * std::numbers::pi * pc.coord(0, i));
    const auto u = interpolate_cubic(pc, v, pf);
    double e = 0.0;
    for (std::size_t j = 0; j < 200; ++j) e = std::max(e, std::abs(u[j] - std::sin(2.0 * std::numbers::pi * pf.coord(0, j))));
    errs.push_back(e);
  }
  EXPECT_GT(errs[0] / errs[1], 12.0);
  EXPECT_GT(errs[1] / errs[2], 12.0);

  const GridSpec f2 = make_grid_2d(9, 0.0, 1.0, Boundary::kDirichlet), c2 = make_grid_2d(5, 0.0, 1.0, Boundary::kDirichlet);
  std::vector<double> v2(25);
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 5; ++j) v2[i * 5 + j] = c2.coord(0, i) * c2.coord(0, i) * c2.coord(1, j) + 2.0 * c2.coord(1, j);
  const auto u2 = interpolate_cubic(c2, v2, f2);
  for (std::size_t i = 0; i < 9; ++i)
    for (std::size_t j = 0; j < 9; ++j) {
      const double x = f2.coord(0, i), y = f2.coord(1, j);
      EXPECT_NEAR(u2[i * 9 + j], x * x * y + 2.0 * y, 1e-12);
    }
}

TEST(CoarseDns, MatchedPoints) {
  EXPECT_EQ(matched_coarse_points(make_grid_1d(200, 0.0, 1.0, Boundary::kPeriodic), 22), 20u);
  EXPECT_EQ(matched_coarse_points(make_grid_1d(250, 0.0, 1.0, Boundary::kPeriodic), 27), 25u);
  EXPECT_EQ(matched_coarse_points(make_grid_2d(64, 0.0, 1.0, Boundary::kDirichlet), 70), 8u);
  EXPECT_THROW(matched_coarse_points(make_grid_1d(7, 0.0, 1.0, Boundary::kPeriodic), 1), UsageError);
}

TEST(CoarseDns, SameGridMatchesGeneratorExactly) {
  for (const std::string name : {"advection", "kdv", "burgers2d"}) {
    ProblemSpec s = problem_preset(name);
    s.points = name == "burgers2d" ? 12 : 40;
    s.t_end = 0.05;
    s.dt = name == "kdv" ? 1e-4 : 1e-3;
    s.obs_every = 10;
    const GridSpec grid = problem_grid(s);
    Rng rng(7);
    nlohmann::json params;
    const auto u0 = sample_initial_condition(s, grid, rng, params);
    const Trajectory ref = simulate(s, grid, u0);
    const Trajectory got = coarse_dns(s.problem, s.coeff, grid, s.points, u0, ref.times, s.obs_every);
    EXPECT_EQ(got, ref) << name;
  }
}

TEST(CoarseDns, ConstantAdvectionAndCoarseError) {
  const GridSpec fine = make_grid_1d(200, 0.0, 1.0, Boundary::kPeriodic);
  const std::vector<double> times = uniform_times(0.0, 0.2, 41);
  const Trajectory flat = coarse_dns("advection", 1.0, fine, 20, std::vector<double>(200, 1.3), times, 5);
  for (double v : flat.states.values()) EXPECT_NEAR(v, 1.3, 1e-14);

  ProblemSpec s = problem_preset("advection_desk");
  Rng rng(8);
  nlohmann::json params;
  const auto u0 = sample_initial_condition(s, fine, rng, params);
  const Trajectory ref = integrate_rk4(problem_rhs("advection", fine, 1.0), u0, times, 5);
  const Trajectory self = coarse_dns("advection", 1.0, fine, 200, u0, times, 5);
  const Trajectory low = coarse_dns("advection", 1.0, fine, 20, u0, times, 5);
  const double e_self = predict::error_metric(ref.state(40), self.state(40));
  const double e_low = predict::error_metric(ref.state(40), low.state(40));
  EXPECT_EQ(e_self, 0.0);
  EXPECT_GT(e_low, 0.0);
  EXPECT_THROW(coarse_dns("advection", 1.0, fine, 30, u0, times, 5), UsageError);
}
