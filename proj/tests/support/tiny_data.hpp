// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "datagen/problems.hpp"

namespace mssde::testing {

// 16-point advection, 9 observations per trajectory.
inline Dataset tiny_advection(std::size_t n_train = 2, std::size_t n_val = 1, std::uint64_t seed = 3) {
  ProblemSpec s = problem_preset("advection");
  s.points = 16;
  s.t_end = 0.08;
  s.dt = 1e-3;
  s.obs_every = 10;
  s.sigma = 0.05;
  s.ic_w_lo = 0.1, s.ic_w_hi = 0.2;
  s.n_train = n_train, s.n_val = n_val, s.n_test = 0;
  s.seed = seed;
  return generate_dataset(s);
}

}  // namespace mssde::testing
