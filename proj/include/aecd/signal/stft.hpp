#pragma once

#include <cmath>
#include <numbers>
#include <span>
#include <string_view>
#include <vector>

#include "aecd/signal/fft.hpp"
#include "aecd/signal/time_series.hpp"

namespace aecd::signal {

enum class WindowKind { Hann, Rectangular };

inline std::string_view to_string(WindowKind w) { return w == WindowKind::Hann ? "hann" : "rectangular"; }

/// Periodic Hann or rectangular taper of the given length.
inline std::vector<double> make_window(WindowKind kind, std::size_t length) {
  std::vector<double> w(length, 1.0);
  if (kind == WindowKind::Hann) {
    for (std::size_t i = 0; i < length; ++i) {
      w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(length));
    }
  }
  return w;
}

/// Short-time spectra, one-sided, row-major [frame][bin].
struct STFTGrid {
  std::vector<Complex> coefficients;
  std::size_t frame_count = 0;
  std::size_t bin_count = 0;  // nfft/2 + 1
  std::size_t nfft = 0;
  std::size_t window_length = 0;
  std::size_t hop = 0;
  WindowKind window_kind = WindowKind::Hann;
  double sample_rate = 0.0;

  const Complex& at(std::size_t frame, std::size_t bin) const { return coefficients[frame * bin_count + bin]; }
  std::span<const Complex> frame(std::size_t f) const {
    return std::span<const Complex>(coefficients).subspan(f * bin_count, bin_count);
  }
  double bin_width() const { return sample_rate / static_cast<double>(nfft); }
  double bin_frequency(std::size_t bin) const { return static_cast<double>(bin) * bin_width(); }
};

inline std::size_t stft_frame_count(std::size_t length, std::size_t window_length, std::size_t hop) {
  return (length - window_length) / hop + 1;
}

/// Each frame is the DFT of the windowed segment, zero-padded to the next
/// power of two when the window length is not one already.
inline STFTGrid stft(const TimeSeries& x, std::size_t window_length = 256, std::size_t hop = 128,
                     WindowKind kind = WindowKind::Hann) {
  if (hop == 0) fail(ErrorCode::ZeroHop, "hop must be at least one sample");
  if (window_length == 0 || window_length > x.size()) {
    fail(ErrorCode::WindowTooLong, "window length " + std::to_string(window_length) + " exceeds signal length " +
                                       std::to_string(x.size()));
  }
  STFTGrid grid;
  grid.window_length = window_length;
  grid.hop = hop;
  grid.window_kind = kind;
  grid.sample_rate = x.sample_rate();
  grid.nfft = next_pow2(window_length);
  grid.bin_count = grid.nfft / 2 + 1;
  grid.frame_count = stft_frame_count(x.size(), window_length, hop);
  grid.coefficients.resize(grid.frame_count * grid.bin_count);

  const auto w = make_window(kind, window_length);
  const auto s = x.samples();
  std::vector<Complex> buf(grid.nfft);
  for (std::size_t f = 0; f < grid.frame_count; ++f) {
    const std::size_t start = f * hop;
    std::fill(buf.begin(), buf.end(), Complex{});
    for (std::size_t i = 0; i < window_length; ++i) buf[i] = Complex(s[start + i] * w[i], 0.0);
    fft_inplace(buf);
    std::copy_n(buf.begin(), grid.bin_count, grid.coefficients.begin() + static_cast<std::ptrdiff_t>(f * grid.bin_count));
  }
  return grid;
}

}  // namespace aecd::signal
