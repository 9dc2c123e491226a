#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "aecd/crack_class.hpp"
#include "aecd/descriptors/descriptors.hpp"
#include "aecd/preprocess/channel.hpp"

namespace aecd::descriptors {

/// Per-event descriptor stack: rows.size() sequences of n_ed values, stored
/// row-major.
struct DescriptorMatrix {
  std::int64_t event_id = 0;
  Lambda lambda = Lambda::L5;
  std::vector<RowType> rows;
  std::size_t n_ed = 0;
  std::vector<double> values;
  std::optional<CrackClass> label;

  std::span<const double> row(std::size_t r) const {
    return std::span<const double>(values).subspan(r * n_ed, n_ed);
  }
  std::span<double> row(std::size_t r) { return std::span<double>(values).subspan(r * n_ed, n_ed); }
  double at(std::size_t r, std::size_t t) const { return values[r * n_ed + t]; }
  std::size_t row_count() const { return rows.size(); }
};

/// Native-length descriptor sequence for one row type.
inline std::vector<double> compute_row(RowType type, const TimeSeries& x, const DescriptorConfig& cfg) {
  switch (type) {
    case RowType::Signal: return x.values();
    case RowType::IF: return instantaneous_frequency(x);
    case RowType::SE: return spectral_entropy(x, cfg);
    case RowType::SK: {
      const auto grid = signal::stft(x, cfg.stft_window, cfg.stft_hop, cfg.stft_window_kind);
      const auto kappa = spectral_kurtosis(grid);
      const auto band = band_bins(grid.bin_width(), grid.bin_count, cfg.band_lo, cfg.band_hi);
      return {kappa.begin() + static_cast<std::ptrdiff_t>(band.first),
              kappa.begin() + static_cast<std::ptrdiff_t>(band.last)};
    }
    case RowType::SLN: return spectral_l2l1_norm(x, cfg);
  }
  return {};
}

/// Assemble the rows demanded by `lambda`, each resampled to n_ed.
inline DescriptorMatrix build_gamma(const TimeSeries& x, Lambda lambda, const DescriptorConfig& cfg,
                                    std::int64_t event_id = 0) {
  cfg.validate(x.sample_rate());
  DescriptorMatrix m;
  m.event_id = event_id;
  m.lambda = lambda;
  m.rows = rows_for(lambda);
  m.n_ed = cfg.n_ed;
  m.values.reserve(m.rows.size() * cfg.n_ed);
  for (RowType r : m.rows) {
    const auto seq = resample_descriptor(compute_row(r, x, cfg), cfg.n_ed);
    m.values.insert(m.values.end(), seq.begin(), seq.end());
  }
  return m;
}

inline DescriptorMatrix build_gamma(const preprocess::ProcessedEvent& event, Lambda lambda,
                                    const DescriptorConfig& cfg) {
  auto m = build_gamma(event.waveform, lambda, cfg, event.event_id);
  m.label = event.label;
  return m;
}

/// All five rows of an event (SIGNAL, IF, SE, SK, SLN), from which any lambda
/// combination is a slice.
inline DescriptorMatrix build_all_rows(const preprocess::ProcessedEvent& event, const DescriptorConfig& cfg) {
  cfg.validate(event.waveform.sample_rate());
  DescriptorMatrix m;
  m.event_id = event.event_id;
  m.lambda = Lambda::L5;
  m.n_ed = cfg.n_ed;
  m.label = event.label;
  for (std::size_t i = 0; i < kRowTypeCount; ++i) {
    const auto r = static_cast<RowType>(i);
    m.rows.push_back(r);
    const auto seq = resample_descriptor(compute_row(r, event.waveform, cfg), cfg.n_ed);
    m.values.insert(m.values.end(), seq.begin(), seq.end());
  }
  return m;
}

/// Rows of `lambda` taken from a matrix that already holds them.
inline DescriptorMatrix slice(const DescriptorMatrix& all, Lambda lambda) {
  DescriptorMatrix m;
  m.event_id = all.event_id;
  m.lambda = lambda;
  m.n_ed = all.n_ed;
  m.label = all.label;
  m.rows = rows_for(lambda);
  for (RowType r : m.rows) {
    const auto it = std::find(all.rows.begin(), all.rows.end(), r);
    if (it == all.rows.end()) fail(ErrorCode::ConfigMismatch, "row " + std::string(to_string(r)) + " not available");
    const auto src = all.row(static_cast<std::size_t>(it - all.rows.begin()));
    m.values.insert(m.values.end(), src.begin(), src.end());
  }
  return m;
}

}  // namespace aecd::descriptors
