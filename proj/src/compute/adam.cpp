// SPDX-License-Identifier: Apache-2.0
#include "compute/adam.hpp"

#include <cmath>

#include "core/error.hpp"

namespace mssde {

Adam::Adam(AdamConfig cfg) : cfg_(cfg) {
  if (!(cfg_.lr > 0.0)) throw UsageError("adam: learning rate must be positive");
  if (cfg_.decay_interval == 0) throw UsageError("adam: decay interval must be positive");
}

double Adam::lr() const noexcept {
  return cfg_.lr * std::pow(cfg_.decay, static_cast<double>(steps_ / cfg_.decay_interval));
}

void Adam::step(ParamMap& params, const ParamMap& grads) {
  for (const auto& [name, g] : grads) {
    auto it = params.find(name);
    if (it == params.end()) throw ShapeError("adam: gradient for unknown parameter '" + name + "'");
    if (it->second.shape() != g.shape()) {
      throw ShapeError("adam: gradient shape " + shape_str(g.shape()) + " does not match parameter '" + name +
                       "' " + shape_str(it->second.shape()));
    }
    if (!g.all_finite()) throw NumericalError("adam: non-finite gradient for parameter '" + name + "'");
  }
  const double lr = this->lr();
  ++steps_;
  const double t = static_cast<double>(steps_);
  const double c1 = 1.0 - std::pow(cfg_.beta1, t);
  const double c2 = 1.0 - std::pow(cfg_.beta2, t);
  for (const auto& [name, g] : grads) {
    Tensor& p = params.at(name);
    auto [mi, m_new] = m_.try_emplace(name, Tensor(p.shape(), 0.0));
    auto [vi, v_new] = v_.try_emplace(name, Tensor(p.shape(), 0.0));
    Tensor& m = mi->second;
    Tensor& v = vi->second;
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * g[i];
      v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * g[i] * g[i];
      p[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + cfg_.eps);
    }
  }
}

}  // namespace mssde
