// SPDX-License-Identifier: Apache-2.0
#include "model/config.hpp"

#include "core/error.hpp"

namespace mssde {

std::size_t ModelConfig::s() const {
  const std::size_t n = grid.points.at(0);
  if (coarse == 0 || n % coarse != 0) {
    throw UsageError("model: fine grid of " + std::to_string(n) + " points is not divisible by coarse grid of " +
                     std::to_string(coarse));
  }
  return n / coarse;
}

std::size_t ModelConfig::n_zeta() const {
  std::size_t n = grid.fields;
  for (std::size_t a = 0; a < grid.dim; ++a) n *= coarse;
  return n;
}

PadMode ModelConfig::pad_mode() const {
  return grid.boundary == Boundary::kPeriodic ? PadMode::kCircular : PadMode::kZero;
}

std::vector<std::size_t> ModelConfig::enc_lengths() const {
  std::vector<std::size_t> len{grid.points.at(0)};
  const ConvGeometry g{2, enc_kernel / 2, pad_mode()};
  for (std::size_t i = 0; i < enc_filters.size(); ++i) len.push_back(conv_out_len(len.back(), enc_kernel, g));
  return len;
}

std::size_t ModelConfig::enc_features() const {
  std::size_t n = enc_filters.empty() ? grid.fields : enc_filters.back();
  const std::size_t l = enc_lengths().back();
  for (std::size_t a = 0; a < grid.dim; ++a) n *= l;
  return n;
}

std::size_t ModelConfig::macro_in() const {
  std::size_t n = grid.fields;
  for (std::size_t a = 0; a < grid.dim; ++a) n *= stencil_width();
  return n + n_eta + (positional ? 2 * grid.dim : 0);
}

void ModelConfig::validate() const {
  grid.validate();
  for (std::size_t a = 1; a < grid.dim; ++a) {
    if (grid.points[a] != grid.points[0]) throw UsageError("model: 2D grids must be square");
  }
  (void)s();
  if (coarse < 2) throw UsageError("model: coarse grid needs at least two points per axis");
  if (enc_kernel % 2 == 0) throw UsageError("model: micro-encoder kernel must be odd");
  if (macro_layers == 0 || micro_layers == 0) throw UsageError("model: drift MLPs need at least one hidden layer");
  if (!(time_scale > 0.0)) throw UsageError("model: time_scale must be positive");
  for (auto f : enc_filters) {
    if (f == 0) throw UsageError("model: zero encoder filter count");
  }
}

nlohmann::json ModelConfig::to_json() const {
  return {{"dim", grid.dim},
          {"fields", grid.fields},
          {"points", grid.points},
          {"lo", grid.lo},
          {"hi", grid.hi},
          {"boundary", boundary_name(grid.boundary)},
          {"coarse", coarse},
          {"n_eta", n_eta},
          {"wide_kernel", wide_kernel},
          {"enc_filters", enc_filters},
          {"enc_kernel", enc_kernel},
          {"stencil_q", stencil_q},
          {"macro_hidden", macro_hidden},
          {"macro_layers", macro_layers},
          {"micro_hidden", micro_hidden},
          {"micro_layers", micro_layers},
          {"positional", positional},
          {"time_scale", time_scale},
          {"sigma_obs", sigma_obs}};
}

ModelConfig ModelConfig::from_json(const nlohmann::json& j) {
  try {
    ModelConfig c;
    c.grid.dim = j.at("dim").get<std::size_t>();
    c.grid.fields = j.at("fields").get<std::size_t>();
    c.grid.points = j.at("points").get<std::vector<std::size_t>>();
    c.grid.lo = j.at("lo").get<std::vector<double>>();
    c.grid.hi = j.at("hi").get<std::vector<double>>();
    c.grid.boundary = parse_boundary(j.at("boundary").get<std::string>());
    c.coarse = j.at("coarse").get<std::size_t>();
    c.n_eta = j.at("n_eta").get<std::size_t>();
    c.wide_kernel = j.at("wide_kernel").get<bool>();
    c.enc_filters = j.at("enc_filters").get<std::vector<std::size_t>>();
    c.enc_kernel = j.at("enc_kernel").get<std::size_t>();
    c.stencil_q = j.at("stencil_q").get<std::size_t>();
    c.macro_hidden = j.at("macro_hidden").get<std::size_t>();
    c.macro_layers = j.at("macro_layers").get<std::size_t>();
    c.micro_hidden = j.at("micro_hidden").get<std::size_t>();
    c.micro_layers = j.at("micro_layers").get<std::size_t>();
    c.positional = j.at("positional").get<bool>();
    c.time_scale = j.at("time_scale").get<double>();
    c.sigma_obs = j.at("sigma_obs").get<double>();
    c.validate();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("model config: ") + e.what());
  }
}

}  // namespace mssde
