// SPDX-License-Identifier: Apache-2.0
#include "pipeline/report.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "core/error.hpp"

namespace mssde::pipeline {

std::vector<std::size_t> ErrorReport::trajectory_ids() const {
  std::vector<std::size_t> ids;
  for (const auto& r : rows) {
    if (ids.empty() || ids.back() != r.trajectory_id) {
      bool seen = false;
      for (auto i : ids) seen = seen || i == r.trajectory_id;
      if (!seen) ids.push_back(r.trajectory_id);
    }
  }
  return ids;
}

std::vector<double> ErrorReport::trajectory_means() const {
  std::map<std::size_t, std::pair<double, std::size_t>> acc;
  for (const auto& r : rows) {
    auto& a = acc[r.trajectory_id];
    a.first += r.epsilon;
    ++a.second;
  }
  std::vector<double> out;
  for (auto id : trajectory_ids()) out.push_back(acc[id].first / static_cast<double>(acc[id].second));
  return out;
}

Summary summarize(const ErrorReport& r) {
  Summary s;
  s.method = r.method;
  const auto means = r.trajectory_means();
  s.trajectories = means.size();
  if (means.empty()) throw DataError("summary: report '" + r.method + "' has no rows");
  for (double m : means) s.mean += m;
  s.mean /= static_cast<double>(means.size());
  double v = 0.0;
  for (double m : means) v += (m - s.mean) * (m - s.mean);
  s.std = std::sqrt(v / static_cast<double>(means.size()));
  if (std::isinf(s.mean)) s.std = std::numeric_limits<double>::infinity();
  return s;
}

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << text;
  if (!out) throw DataError("write failed for '" + path + "'");
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_errors_csv(const std::string& path, const ErrorReport& r) {
  std::string text = "trajectory_id,t,epsilon\n";
  for (const auto& row : r.rows) {
    text += std::to_string(row.trajectory_id) + "," + fmt(row.t) + "," + fmt(row.epsilon) + "\n";
  }
  write_text(path, text);
}

void write_summary_csv(const std::string& path, const std::vector<Summary>& s) {
  std::string text = "method,trajectories,mean,std\n";
  for (const auto& x : s) {
    text += x.method + "," + std::to_string(x.trajectories) + "," + fmt(x.mean) + "," + fmt(x.std) + "\n";
  }
  write_text(path, text);
}

nlohmann::json summary_json(const std::vector<Summary>& s) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& x : s) {
    // JSON has no inf; diverged methods carry null and a flag.
    const bool finite = std::isfinite(x.mean);
    rows.push_back({{"method", x.method},
                    {"trajectories", x.trajectories},
                    {"mean", finite ? nlohmann::json(x.mean) : nlohmann::json(nullptr)},
                    {"std", finite ? nlohmann::json(x.std) : nlohmann::json(nullptr)},
                    {"diverged", !finite}});
  }
  return rows;
}

}  // namespace mssde::pipeline
