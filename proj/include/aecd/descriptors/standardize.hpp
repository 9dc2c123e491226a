#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include <json.hpp>

#include "aecd/descriptors/gamma.hpp"

namespace aecd::descriptors {

inline constexpr double kStdFloor = 1e-12;

struct RowStats {
  double mean = 0.0;
  double std = 1.0;
};

/// Training-set statistics per descriptor row type.
using Stats = std::map<RowType, RowStats>;

namespace detail {

/// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v)) comp_ += (sum_ - t) + v;
    else comp_ += (v - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace detail

/// Pooled mean and population std of every row type across the collection.
inline Stats fit_stats(std::span<const DescriptorMatrix> data) {
  if (data.empty()) fail(ErrorCode::EmptyDataset, "cannot fit standardization on an empty dataset");
  Stats stats;
  for (std::size_t r = 0; r < data.front().row_count(); ++r) {
    const RowType type = data.front().rows[r];
    detail::CompensatedSum sum;
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    std::size_t count = 0;
    for (const auto& m : data) {
      for (double v : m.row(r)) {
        sum.add(v);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
        ++count;
      }
    }
    const double mean = lo == hi ? lo : sum.value() / static_cast<double>(count);
    detail::CompensatedSum sq;
    for (const auto& m : data) {
      for (double v : m.row(r)) sq.add((v - mean) * (v - mean));
    }
    const double sd = std::sqrt(sq.value() / static_cast<double>(count));
    stats[type] = RowStats{mean, std::max(sd, kStdFloor)};
  }
  return stats;
}

inline void apply_stats(std::span<DescriptorMatrix> data, const Stats& stats) {
  for (auto& m : data) {
    for (std::size_t r = 0; r < m.row_count(); ++r) {
      const auto it = stats.find(m.rows[r]);
      if (it == stats.end()) {
        fail(ErrorCode::ConfigMismatch, "no statistics for row " + std::string(to_string(m.rows[r])));
      }
      const auto [mean, sd] = it->second;
      for (double& v : m.row(r)) v = (v - mean) / sd;
    }
  }
}

/// Fit mode when `stats` is empty, transform mode otherwise.
inline std::pair<std::vector<DescriptorMatrix>, Stats> standardize(std::vector<DescriptorMatrix> data,
                                                                    std::optional<Stats> stats = std::nullopt) {
  Stats s = stats ? *stats : fit_stats(data);
  apply_stats(data, s);
  return {std::move(data), std::move(s)};
}

nlohmann::json stats_to_json(const Stats& stats);

Stats stats_from_json(const nlohmann::json& j);

void save_stats(const Stats& stats, const std::filesystem::path& path);

Stats load_stats(const std::filesystem::path& path);

}  // namespace aecd::descriptors
