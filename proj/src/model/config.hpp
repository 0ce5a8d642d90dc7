// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "compute/graph.hpp"
#include "datagen/grid.hpp"

namespace mssde {

/// Architecture of a multiscale latent SDE model. Shapes of all parameters
/// follow from this and the fine grid.
struct ModelConfig {
  GridSpec grid;
  std::size_t coarse = 20;  // coarse points per axis
  std::size_t n_eta = 0;
  bool wide_kernel = false;  // kernel 6s+1, padding 3s (else 4s+1, 2s)
  std::vector<std::size_t> enc_filters{4, 16, 32};
  std::size_t enc_kernel = 9;
  std::size_t stencil_q = 2;
  std::size_t macro_hidden = 64, macro_layers = 3;
  std::size_t micro_hidden = 64, micro_layers = 3;
  bool positional = false;
  double time_scale = 1.0;  // chi(t) = t / time_scale
  double sigma_obs = -1.0;  // negative when unknown

  std::size_t s() const;
  std::size_t n_y() const { return grid.n_y(); }
  std::size_t n_zeta() const;
  std::size_t n_z() const { return n_zeta() + n_eta; }
  std::size_t kernel_len() const { return (wide_kernel ? 6 : 4) * s() + 1; }
  std::size_t kernel_pad() const { return (wide_kernel ? 3 : 2) * s(); }
  PadMode pad_mode() const;
  /// Spatial length per axis after each micro-encoder layer; entry 0 is the fine grid.
  std::vector<std::size_t> enc_lengths() const;
  std::size_t enc_features() const;
  std::size_t stencil_width() const { return 2 * stencil_q + 1; }
  std::size_t macro_in() const;
  /// Dimension of psi(zeta): n_zeta in 1D, n_eta in 2D.
  std::size_t psi_dim() const { return grid.dim == 1 ? n_zeta() : n_eta; }
  std::size_t micro_in() const { return n_eta + psi_dim() + 1; }

  void validate() const;
  nlohmann::json to_json() const;
  static ModelConfig from_json(const nlohmann::json& j);

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

}  // namespace mssde
