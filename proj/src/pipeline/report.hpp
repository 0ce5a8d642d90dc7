// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdio>
#include <string>
#include <vector>

#include "json.hpp"

namespace mssde::pipeline {

struct ErrorRow {
  std::size_t trajectory_id = 0;  // index into the dataset
  double t = 0.0;
  double epsilon = 0.0;
};

/// Per-time errors of one method on one split.
struct ErrorReport {
  std::string method;
  std::vector<ErrorRow> rows;

  std::vector<std::size_t> trajectory_ids() const;  // in first-seen order
  std::vector<double> trajectory_means() const;
};

struct Summary {
  std::string method;
  std::size_t trajectories = 0;
  double mean = 0.0;  // of per-trajectory mean errors
  double std = 0.0;   // population
};

Summary summarize(const ErrorReport& r);

/// "%.17g"; inf and nan spelled as inf, -inf, nan.
std::string fmt(double v);

void write_errors_csv(const std::string& path, const ErrorReport& r);
void write_summary_csv(const std::string& path, const std::vector<Summary>& s);
nlohmann::json summary_json(const std::vector<Summary>& s);

void write_text(const std::string& path, const std::string& text);
std::string read_text(const std::string& path);

}  // namespace mssde::pipeline
