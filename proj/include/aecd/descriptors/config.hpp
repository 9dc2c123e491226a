#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "aecd/error.hpp"
#include "aecd/signal/stft.hpp"

namespace aecd::descriptors {

/// Descriptor parameters. Frequencies in Hz, lengths in samples.
struct DescriptorConfig {
  std::size_t n_ed = 256;
  std::size_t se_window = 1024;
  std::size_t se_hop = 512;
  std::size_t stft_window = 1024;
  std::size_t stft_hop = 256;
  signal::WindowKind stft_window_kind = signal::WindowKind::Hann;
  double band_lo = 5e3;
  double band_hi = 50e3;

  void validate(double sample_rate) const {
    if (n_ed < 8) fail(ErrorCode::InvalidArgument, "n_ed must be at least 8");
    if (!(band_lo < band_hi) || band_hi > sample_rate / 2.0) {
      fail(ErrorCode::InvalidArgument, "analysis band must satisfy band_lo < band_hi <= fs/2");
    }
    if (se_hop == 0 || stft_hop == 0) fail(ErrorCode::ZeroHop, "descriptor hop must be positive");
  }
};

/// Descriptor rows that can appear in an event matrix.
enum class RowType : std::uint8_t { Signal = 0, IF = 1, SE = 2, SK = 3, SLN = 4 };

inline constexpr std::size_t kRowTypeCount = 5;

inline std::string_view to_string(RowType r) {
  switch (r) {
    case RowType::Signal: return "SIGNAL";
    case RowType::IF: return "IF";
    case RowType::SE: return "SE";
    case RowType::SK: return "SK";
    case RowType::SLN: return "SLN";
  }
  return "?";
}

inline RowType row_type_from_string(std::string_view s) {
  for (std::size_t i = 0; i < kRowTypeCount; ++i) {
    if (to_string(static_cast<RowType>(i)) == s) return static_cast<RowType>(i);
  }
  fail(ErrorCode::Format, "unknown descriptor row '" + std::string(s) + "'");
}

/// Input combination lambda_1..lambda_5.
enum class Lambda : std::uint8_t { L1 = 1, L2 = 2, L3 = 3, L4 = 4, L5 = 5 };

inline Lambda lambda_from_int(int v) {
  if (v < 1 || v > 5) fail(ErrorCode::InvalidArgument, "lambda must be in 1..5, got " + std::to_string(v));
  return static_cast<Lambda>(v);
}

inline int to_int(Lambda l) { return static_cast<int>(l); }

/// Rows of each combination: raw signal; IF; IF+SE; IF+SE+SK; IF+SE+SK+SLN.
inline std::vector<RowType> rows_for(Lambda l) {
  switch (l) {
    case Lambda::L1: return {RowType::Signal};
    case Lambda::L2: return {RowType::IF};
    case Lambda::L3: return {RowType::IF, RowType::SE};
    case Lambda::L4: return {RowType::IF, RowType::SE, RowType::SK};
    case Lambda::L5: return {RowType::IF, RowType::SE, RowType::SK, RowType::SLN};
  }
  return {};
}

}  // namespace aecd::descriptors
