// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "core/error.hpp"
#include "likelihood/poe.hpp"
#include "predict/predict.hpp"
#include "scales/scale_ops.hpp"
#include "support/fixtures.hpp"
#include "support/gradcheck.hpp"

using namespace mssde;
using namespace mssde::predict;
using namespace mssde::testing;

TEST(Moments, HandValues) {
  const PredictiveMixture mix{Tensor(Shape{2, 2}, {1, 2, 3, 6}), Tensor(Shape{2}, {0.5, 0.1})};
  const Moments m = predictive_moments(mix);
  EXPECT_EQ(m.mean, Tensor(Shape{2}, {2.0, 4.0}));
  EXPECT_NEAR(m.variance[0], 2.5, 1e-15);
  EXPECT_NEAR(m.variance[1], 8.1, 1e-14);
  EXPECT_FALSE(m.single_component);
  const Moments one = predictive_moments({Tensor(Shape{1, 2}, {1, 2}), Tensor(Shape{2}, {0.5, 0.1})});
  EXPECT_TRUE(one.single_component);
  EXPECT_EQ(one.variance, Tensor(Shape{2}, {0.5, 0.1}));
  EXPECT_THROW(predictive_moments({Tensor(Shape{2, 2}), Tensor(Shape{3})}), ShapeError);
}

TEST(Moments, TotalVarianceIdentity) {
  Rng rng(1);
  for (std::size_t N : {2u, 5u, 64u}) {
    const PredictiveMixture mix{uniform_tensor(rng, Shape{N, 4}, -3.0, 3.0), uniform_tensor(rng, Shape{4}, 0.01, 1.0)};
    const Moments m = predictive_moments(mix);
    for (std::size_t j = 0; j < 4; ++j) {
      double s1 = 0.0, s2 = 0.0;
      for (std::size_t i = 0; i < N; ++i) s1 += mix.means[i * 4 + j], s2 += mix.means[i * 4 + j] * mix.means[i * 4 + j];
      const double Nd = static_cast<double>(N), e = s1 / Nd;
      EXPECT_NEAR(m.mean[j], e, 1e-12);
      EXPECT_NEAR(m.variance[j], mix.variance[j] + Nd / (Nd - 1.0) * (s2 / Nd - e * e), 1e-12);
    }
  }
}

TEST(Moments, MonteCarloMixtureAgreement) {
  Rng rng(2);
  const std::size_t N = 200, n = 3, draws = 100000;
  const PredictiveMixture mix{uniform_tensor(rng, Shape{N, n}, -1.0, 1.0), Tensor(Shape{n}, {0.2, 0.05, 1.0})};
  const Moments m = predictive_moments(mix);
  std::vector<double> s1(n, 0.0), s2(n, 0.0);
  for (std::size_t d = 0; d < draws; ++d) {
    const std::size_t c = std::min<std::size_t>(N - 1, static_cast<std::size_t>(rng.uniform() * N));
    for (std::size_t j = 0; j < n; ++j) {
      const double y = mix.means[c * n + j] + std::sqrt(mix.variance[j]) * rng.normal();
      s1[j] += y, s2[j] += y * y;
    }
  }
  for (std::size_t j = 0; j < n; ++j) {
    const double mean = s1[j] / draws, var = s2[j] / draws - mean * mean;
    EXPECT_NEAR(mean, m.mean[j], 0.02 * std::sqrt(m.variance[j]));
    EXPECT_NEAR(var, m.variance[j], 0.02 * m.variance[j]);
  }
}

TEST(ErrorMetric, Cases) {
  const std::vector<double> y{3.0, 4.0}, zero{0.0, 0.0};
  EXPECT_EQ(error_metric(y, y), 0.0);
  EXPECT_NEAR(error_metric(y, zero), 1.0, 1e-15);
  EXPECT_NEAR(error_metric(y, std::vector<double>{3.0, 4.5}), 0.1, 1e-15);
  EXPECT_THROW(error_metric(zero, y), DataError);
  EXPECT_THROW(error_metric(y, std::vector<double>{1.0}), ShapeError);
}

TEST(Spectrum, PureModeAndParseval) {
  const std::size_t n = 32;
  std::vector<double> u(n);
  for (std::size_t j = 0; j < n; ++j) u[j] = 0.5 + 2.0 * std::sin(2.0 * std::numbers::pi * 3.0 * j / n);
  const auto s = export_spectrum(u);
  ASSERT_EQ(s.size(), n / 2 + 1);
  for (const auto& [k, a] : s) {
    const double expect = k == 0 ? 0.5 * n : (k == 3 ? 2.0 * n / 2.0 : 0.0);
    EXPECT_NEAR(a, expect, 1e-11) << k;
  }
  Rng rng(3);
  for (auto& v : u) v = rng.normal();
  const auto r = export_spectrum(u);
  double energy = 0.0, spec = 0.0;
  for (double v : u) energy += v * v;
  for (const auto& [k, a] : r) spec += (k == 0 || k == n / 2 ? 1.0 : 2.0) * a * a;
  EXPECT_NEAR(spec / n, energy, 1e-10 * energy);
}

namespace {

struct PredictFixture {
  ModelConfig cfg = tiny_config(1, 12, 6, 2);
  ParamMap params;
  std::vector<double> y0;
  PredictFixture() {
    cfg.sigma_obs = 0.1;
    Rng rng(4);
    params = init_params(cfg, rng);
    y0.resize(12);
    for (std::size_t i = 0; i < 12; ++i) y0[i] = std::sin(2.0 * std::numbers::pi * i / 12.0);
  }
};

}  // namespace

TEST(PosteriorPredict, ShapesDeterminismAndThreads) {
  PredictFixture f;
  const std::vector<double> times{0.0, 0.1, 0.2, 0.3};
  PredictOptions opt;
  opt.n_paths = 9;
  opt.dt = 0.025;
  const auto a = posterior_predict(f.cfg, f.params, f.y0, times, Rng(5, 100), opt);
  ASSERT_EQ(a.size(), 4u);
  EXPECT_EQ(a[0].means.shape(), (Shape{9, 12}));
  for (const auto& m : a)
    for (double v : m.variance.values()) EXPECT_NEAR(v, 0.5 * 0.01, 1e-15);
  opt.threads = 3;
  const auto b = posterior_predict(f.cfg, f.params, f.y0, times, Rng(5, 100), opt);
  for (std::size_t k = 0; k < 4; ++k) EXPECT_EQ(a[k].means, b[k].means);
  const auto c = posterior_predict(f.cfg, f.params, f.y0, times, Rng(6, 100), opt);
  EXPECT_NE(a[3].means, c[3].means);
  opt.dt = 0.03;
  EXPECT_THROW(posterior_predict(f.cfg, f.params, f.y0, times, Rng(5), opt), UsageError);
  opt.dt = 0.0;
  EXPECT_THROW(posterior_predict(f.cfg, f.params, f.y0, {0.0, 0.1, 0.3}, Rng(5), opt), UsageError);
  EXPECT_THROW(posterior_predict(f.cfg, f.params, std::vector<double>(5), times, Rng(5), opt), ShapeError);
}

TEST(PosteriorPredict, InitialComponentsScatterAroundEncodedMean) {
  PredictFixture f;
  PredictOptions opt;
  opt.n_paths = 400;
  const auto mix = posterior_predict(f.cfg, f.params, f.y0, {0.0}, Rng(7), opt);
  Graph g(false);
  const ParamVars p = bind_params(g, f.params, false);
  const auto enc = scales::encode(f.cfg, p, g.constant(Tensor(Shape{1, 12}, f.y0)));
  const Tensor centre = likelihood::reconstruct(f.cfg, p, enc.mean).mean.value();
  const Moments m = predictive_moments(mix[0]);
  // components are reconstructions of z0 ~ N(mean, Sigma^z); the decoder is
  // nearly linear at this scale, so their average sits at the centre
  double spread = 0.0;
  for (std::size_t j = 0; j < 12; ++j) spread = std::max(spread, std::sqrt(m.variance[j] - mix[0].variance[j]));
  EXPECT_GT(spread, 0.0);
  for (std::size_t j = 0; j < 12; ++j) EXPECT_NEAR(m.mean[j], centre[j], 4.0 * spread / std::sqrt(400.0) + 1e-9);
}
