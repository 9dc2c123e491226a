#include "aecd/descriptors/standardize.hpp"

#include <fstream>

namespace aecd::descriptors {

nlohmann::json stats_to_json(const Stats& stats) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [type, s] : stats) {
    j[std::string(to_string(type))] = {{"mean", {s.mean}}, {"std", {s.std}}};
  }
  return j;
}

Stats stats_from_json(const nlohmann::json& j) {
  Stats stats;
  try {
    for (const auto& [key, v] : j.items()) {
      const auto& mean = v.at("mean");
      const auto& sd = v.at("std");
      if (mean.size() != 1 || sd.size() != 1) fail(ErrorCode::Format, "stats arrays must hold one value");
      stats[row_type_from_string(key)] = RowStats{mean[0].get<double>(), sd[0].get<double>()};
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Format, std::string("stats: ") + e.what());
  }
  return stats;
}

void save_stats(const Stats& stats, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::Io, "cannot write " + path.string());
  out << stats_to_json(stats).dump(1) << '\n';
}

Stats load_stats(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open " + path.string());
  try {
    return stats_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Format, path.string() + ": " + e.what());
  }
}
}  // namespace aecd::descriptors
