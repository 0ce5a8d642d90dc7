// SPDX-License-Identifier: Apache-2.0
#include "datagen/dataset.hpp"

#include <set>

#include "core/binary_io.hpp"
#include "core/error.hpp"

namespace mssde {


std::vector<std::size_t> Dataset::indices(const std::string& which) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < split.size(); ++i)
    if (split[i] == which) out.push_back(i);
  return out;
}

void Dataset::validate() const {
  grid.validate();
  if (split.size() != trajectories.size()) throw DataError("dataset: split labels do not match trajectory count");
  static const std::set<std::string> kLabels{"train", "val", "test"};
  for (const auto& s : split)
    if (!kLabels.count(s)) throw DataError("dataset: unknown split label '" + s + "'");
  const std::size_t n_y = grid.n_y();
  for (std::size_t k = 0; k < trajectories.size(); ++k) {
    const auto& tr = trajectories[k];
    if (tr.n_t() != n_t() || tr.states.rank() != 2 || tr.states.dim(0) != tr.n_t() || tr.states.dim(1) != n_y) {
      throw DataError("dataset: trajectory " + std::to_string(k) + " has inconsistent shape " +
                      shape_str(tr.states.shape()));
    }
    if (tr.times != trajectories.front().times) throw DataError("dataset: trajectories must share times");
    for (std::size_t i = 1; i < tr.n_t(); ++i)
      if (!(tr.times[i] > tr.times[i - 1])) throw DataError("dataset: times must be strictly increasing");
    if (!tr.states.all_finite()) throw DataError("dataset: trajectory " + std::to_string(k) + " is not finite");
  }
}

void write_dataset(const std::string& path, const Dataset& ds) {
  ds.validate();
  BinaryWriter w(path);
  w.raw("MST1", 4);
  w.put<std::uint32_t>(kDatasetVersion);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(ds.grid.dim));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(ds.grid.fields));
  for (auto p : ds.grid.points) w.put<std::uint32_t>(static_cast<std::uint32_t>(p));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(ds.trajectories.size()));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(ds.n_t()));
  for (std::size_t a = 0; a < ds.grid.dim; ++a) {
    w.put<double>(ds.grid.lo[a]);
    w.put<double>(ds.grid.hi[a]);
  }
  if (!ds.trajectories.empty())
    for (double t : ds.trajectories.front().times) w.put<double>(t);
  for (const auto& tr : ds.trajectories)
    for (double v : tr.states.values()) w.put<double>(v);
  w.finish(path);

  nlohmann::json side;
  side["format"] = "MST1";
  side["sigma"] = ds.sigma;
  side["split"] = ds.split;
  side["boundary"] = boundary_name(ds.grid.boundary);
  side["meta"] = ds.meta;
  std::ofstream js(path + ".json", std::ios::trunc);
  if (!js) throw DataError("cannot open '" + path + ".json' for writing");
  js << side.dump(2) << '\n';
  if (!js) throw DataError("write to '" + path + ".json' failed");
}

Dataset read_dataset(const std::string& path) {
  BinaryReader r(path, "dataset");
  char magic[4];
  r.raw(magic, 4, "magic");
  if (std::memcmp(magic, "MST1", 4) != 0) throw DataError("dataset '" + path + "' has bad magic");
  const auto version = r.get<std::uint32_t>("version");
  if (version != kDatasetVersion) {
    throw DataError("dataset '" + path + "' has unsupported version " + std::to_string(version));
  }
  Dataset ds;
  ds.grid.dim = r.get<std::uint32_t>("dimension");
  if (ds.grid.dim != 1 && ds.grid.dim != 2) throw DataError("dataset '" + path + "' has invalid dimension");
  ds.grid.fields = r.get<std::uint32_t>("field count");
  for (std::size_t a = 0; a < ds.grid.dim; ++a) ds.grid.points.push_back(r.get<std::uint32_t>("grid size"));
  const std::size_t n_traj = r.get<std::uint32_t>("trajectory count");
  const std::size_t n_t = r.get<std::uint32_t>("time count");
  for (std::size_t a = 0; a < ds.grid.dim; ++a) {
    ds.grid.lo.push_back(r.get<double>("domain bounds"));
    ds.grid.hi.push_back(r.get<double>("domain bounds"));
  }
  std::vector<double> times(n_t);
  for (auto& t : times) t = r.get<double>("times");
  const std::size_t n_y = ds.grid.n_y();
  for (std::size_t k = 0; k < n_traj; ++k) {
    Trajectory tr{times, Tensor(Shape{n_t, n_y})};
    r.raw(reinterpret_cast<char*>(tr.states.data()), n_t * n_y * sizeof(double), "payload");
    if constexpr (std::endian::native == std::endian::big) {
      for (auto& v : tr.states.values()) v = to_le(v);
    }
    ds.trajectories.push_back(std::move(tr));
  }
  if (!r.at_end()) throw DataError("dataset '" + path + "' has trailing bytes");

  std::ifstream js(path + ".json");
  if (!js) throw DataError("dataset sidecar '" + path + ".json' is missing");
  nlohmann::json side;
  try {
    js >> side;
    ds.sigma = side.at("sigma").get<double>();
    ds.split = side.at("split").get<std::vector<std::string>>();
    ds.grid.boundary = parse_boundary(side.at("boundary").get<std::string>());
    ds.meta = side.value("meta", nlohmann::json::object());
  } catch (const nlohmann::json::exception& e) {
    throw DataError("dataset sidecar '" + path + ".json' is invalid: " + e.what());
  }
  ds.validate();
  return ds;
}

}  // namespace mssde
