#pragma once

#include <span>
#include <vector>

#include "aecd/signal/fft.hpp"
#include "aecd/signal/time_series.hpp"

namespace aecd::signal {

/// Two-sided DFT coefficients on a power-of-two grid.
struct Spectrum {
  std::vector<Complex> bins;
  double bin_width = 0.0;  // Hz

  std::size_t size() const noexcept { return bins.size(); }
};

inline Spectrum dft(const TimeSeries& x) {
  auto bins = fft_real(x.samples());
  const double width = x.sample_rate() / static_cast<double>(bins.size());
  return Spectrum{std::move(bins), width};
}

/// Weight of bin k when folding a real signal's two-sided spectrum onto
/// k = 0..n/2 (interior bins stand for their mirror image as well).
inline double one_sided_weight(std::size_t k, std::size_t n) {
  return (k == 0 || 2 * k == n) ? 1.0 : 2.0;
}

/// One-sided power |X(f)|^2 from a two-sided coefficient set, length n/2+1.
inline std::vector<double> one_sided_power(std::span<const Complex> bins) {
  const std::size_t n = bins.size();
  std::vector<double> p(n / 2 + 1);
  for (std::size_t k = 0; k < p.size(); ++k) p[k] = one_sided_weight(k, n) * std::norm(bins[k]);
  return p;
}

/// One-sided power spectrum of length floor(N/2)+1 where N is the padded
/// transform size. Satisfies sum(x^2) == sum(P) / N.
inline std::vector<double> power_spectrum(std::span<const double> x) {
  if (x.empty()) fail(ErrorCode::EmptySignal, "power spectrum of an empty signal");
  const auto bins = fft_real(x);
  return one_sided_power(bins);
}

inline std::vector<double> power_spectrum(const TimeSeries& x) { return power_spectrum(x.samples()); }

}  // namespace aecd::signal
