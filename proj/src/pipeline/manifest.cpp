// SPDX-License-Identifier: Apache-2.0
#include "pipeline/manifest.hpp"

#include <boost/uuid/detail/sha1.hpp>
#include <cstdio>

#include "pipeline/report.hpp"

namespace mssde::pipeline {

std::string git_blob_sha1(std::string_view content) {
  boost::uuids::detail::sha1 h;
  const std::string header = "blob " + std::to_string(content.size());
  h.process_bytes(header.data(), header.size() + 1);  // includes the NUL
  h.process_bytes(content.data(), content.size());
  boost::uuids::detail::sha1::digest_type d;
  h.get_digest(d);
  char buf[41];
  for (int i = 0; i < 5; ++i) std::snprintf(buf + 8 * i, 9, "%08x", d[i]);
  return std::string(buf, 40);
}

std::string file_blob_sha1(const std::string& path) { return git_blob_sha1(read_text(path)); }

nlohmann::json Manifest::to_json() const {
  nlohmann::json in = nlohmann::json::array();
  for (const auto& [p, h] : inputs) in.push_back({{"path", p}, {"sha1", h}});
  return {{"command", command}, {"config", config}, {"seed", seed}, {"inputs", in},
          {"outputs", outputs}, {"timings", {{"total_seconds", seconds}}}, {"extra", extra}};
}

void write_manifest(const std::string& path, const Manifest& m) { write_text(path, m.to_json().dump(2) + "\n"); }

}  // namespace mssde::pipeline
