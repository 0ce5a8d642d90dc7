// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

namespace mssde::pipeline {

/// SHA-1 of "blob <size>\0<content>", as git hashes file contents.
std::string git_blob_sha1(std::string_view content);
std::string file_blob_sha1(const std::string& path);

struct Manifest {
  std::string command;
  std::string config;  // resolved key = value text
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, std::string>> inputs;  // path, hash
  std::vector<std::string> outputs;
  double seconds = 0.0;
  nlohmann::json extra = nlohmann::json::object();

  void add_input(const std::string& path) { inputs.emplace_back(path, file_blob_sha1(path)); }
  nlohmann::json to_json() const;
};

void write_manifest(const std::string& path, const Manifest& m);

}  // namespace mssde::pipeline
