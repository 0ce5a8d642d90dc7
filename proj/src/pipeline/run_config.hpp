// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace mssde::pipeline {

struct KeySpec {
  std::string name;
  std::string fallback;  // empty: unset unless given
  std::string help;
};

/// Flat key = value run configuration. Lines may carry # comments; unknown
/// or repeated keys are rejected. Values are checked when read.
class RunConfig {
 public:
  RunConfig();

  static RunConfig parse(std::string_view text, const std::string& origin = "config");
  static RunConfig load(const std::string& path);
  static const std::vector<KeySpec>& keys();

  void set(const std::string& key, const std::string& value);
  bool is_set(const std::string& key) const;

  const std::string& str(const std::string& key) const;
  std::size_t size(const std::string& key) const;
  std::uint64_t u64(const std::string& key) const;
  double real(const std::string& key) const;
  bool flag(const std::string& key) const;
  std::vector<std::size_t> sizes(const std::string& key) const;
  std::vector<double> reals(const std::string& key) const;
  std::vector<std::string> words(const std::string& key) const;

  /// Every key with its effective value, sorted, one "key = value" per line.
  std::string resolved() const;
  nlohmann::json to_json() const;

 private:
  std::map<std::string, std::string> values_;
  std::set<std::string> given_;
};

}  // namespace mssde::pipeline
