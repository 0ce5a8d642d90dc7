// SPDX-License-Identifier: Apache-2.0
#include "inference/checkpoint.hpp"

#include "core/binary_io.hpp"
#include "model/params.hpp"

namespace mssde::inference {

namespace {

void put_string(BinaryWriter& w, const std::string& s) {
  w.put<std::uint64_t>(s.size());
  w.raw(s.data(), s.size());
}

std::string get_string(BinaryReader& r, const char* what) {
  const auto n = r.get<std::uint64_t>(what);
  if (n > (std::uint64_t{1} << 32)) throw DataError(std::string("checkpoint: implausible length for ") + what);
  std::string s(n, '\0');
  r.raw(s.data(), n, what);
  return s;
}

void put_group(BinaryWriter& w, const ParamMap& m) {
  w.put<std::uint32_t>(static_cast<std::uint32_t>(m.size()));
  for (const auto& [name, t] : m) {
    put_string(w, name);
    w.put<std::uint32_t>(static_cast<std::uint32_t>(t.rank()));
    for (auto d : t.shape()) w.put<std::uint64_t>(d);
    for (double v : t.values()) w.put<double>(v);
  }
}

ParamMap get_group(BinaryReader& r) {
  ParamMap m;
  const auto n = r.get<std::uint32_t>("tensor count");
  for (std::uint32_t i = 0; i < n; ++i) {
    std::string name = get_string(r, "tensor name");
    const auto rank = r.get<std::uint32_t>("tensor rank");
    if (rank > 8) throw DataError("checkpoint: tensor '" + name + "' has implausible rank");
    Shape s(rank);
    std::uint64_t total = 1;
    for (auto& d : s) {
      d = r.get<std::uint64_t>("tensor shape");
      total *= d;
    }
    if (total > (std::uint64_t{1} << 32)) throw DataError("checkpoint: tensor '" + name + "' is implausibly large");
    Tensor t(s);
    for (auto& v : t.values()) v = r.get<double>("tensor data");
    m.emplace(std::move(name), std::move(t));
  }
  return m;
}

}  // namespace

void write_checkpoint(const std::string& path, const Checkpoint& ck) {
  BinaryWriter w(path);
  w.raw("MSCK", 4);
  w.put<std::uint32_t>(kCheckpointVersion);
  const nlohmann::json header{{"model", ck.model.to_json()}, {"stage", ck.stage},       {"step", ck.step},
                              {"val_eps", ck.val_eps},       {"best_val", ck.best_val}, {"best_step", ck.best_step},
                              {"meta", ck.meta}};
  put_string(w, header.dump());
  put_group(w, ck.params);
  put_group(w, ck.adam_m);
  put_group(w, ck.adam_v);
  put_group(w, ck.best_params);
  w.finish(path);
}

Checkpoint read_checkpoint(const std::string& path) {
  BinaryReader r(path, "checkpoint");
  char magic[4];
  r.raw(magic, 4, "magic");
  if (std::string(magic, 4) != "MSCK") throw DataError("'" + path + "' is not a checkpoint (bad magic)");
  const auto version = r.get<std::uint32_t>("version");
  if (version != kCheckpointVersion) throw DataError("checkpoint version " + std::to_string(version) + " not supported");
  Checkpoint ck;
  try {
    const auto h = nlohmann::json::parse(get_string(r, "header"));
    ck.model = ModelConfig::from_json(h.at("model"));
    ck.stage = h.at("stage").get<std::size_t>();
    ck.step = h.at("step").get<std::uint64_t>();
    ck.val_eps = h.at("val_eps").get<double>();
    ck.best_val = h.at("best_val").get<double>();
    ck.best_step = h.at("best_step").get<std::uint64_t>();
    ck.meta = h.at("meta");
  } catch (const nlohmann::json::exception& e) {
    throw DataError("checkpoint '" + path + "': bad header: " + e.what());
  }
  ck.params = get_group(r);
  ck.adam_m = get_group(r);
  ck.adam_v = get_group(r);
  ck.best_params = get_group(r);
  if (!r.at_end()) throw DataError("checkpoint '" + path + "' has trailing bytes");
  check_params(ck.model, ck.params);
  return ck;
}

}  // namespace mssde::inference
