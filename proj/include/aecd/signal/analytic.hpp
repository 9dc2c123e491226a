#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "aecd/signal/fft.hpp"
#include "aecd/signal/time_series.hpp"

namespace aecd::signal {

/// z(t) = x(t) + j H{x}(t), same length as the source.
class AnalyticSignal {
 public:
  AnalyticSignal(std::vector<Complex> values, double sample_rate)
      : values_(std::move(values)), sample_rate_(sample_rate) {}

  const std::vector<Complex>& values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  double sample_rate() const noexcept { return sample_rate_; }

  std::vector<double> envelope() const {
    std::vector<double> a(values_.size());
    for (std::size_t i = 0; i < a.size(); ++i) a[i] = std::abs(values_[i]);
    return a;
  }

  /// Unwrapped instantaneous phase (radians).
  std::vector<double> phase() const {
    std::vector<double> phi(values_.size());
    if (phi.empty()) return phi;
    double offset = 0.0;
    double prev = std::arg(values_[0]);
    phi[0] = prev;
    for (std::size_t i = 1; i < values_.size(); ++i) {
      const double raw = std::arg(values_[i]);
      const double d = raw - prev;
      if (d > std::numbers::pi) {
        offset -= 2.0 * std::numbers::pi * std::ceil((d - std::numbers::pi) / (2.0 * std::numbers::pi));
      } else if (d < -std::numbers::pi) {
        offset += 2.0 * std::numbers::pi * std::ceil((-d - std::numbers::pi) / (2.0 * std::numbers::pi));
      }
      phi[i] = raw + offset;
      prev = raw;
    }
    return phi;
  }

 private:
  std::vector<Complex> values_;
  double sample_rate_;
};

/// Frequency-domain construction: zero negative frequencies, double positive
/// ones, keep DC and Nyquist. Input is zero-padded to a power of two and the
/// result truncated back to the input length.
inline AnalyticSignal analytic_signal(const TimeSeries& x) {
  if (x.size() < 4) fail(ErrorCode::SignalTooShort, "analytic signal needs at least 4 samples");
  if (all_zero(x.samples())) fail(ErrorCode::AllZeroSignal, "phase undefined for an all-zero signal");

  const std::size_t n = next_pow2(x.size());
  auto spec = fft_real(x.samples(), n);
  for (std::size_t k = 1; k < n / 2; ++k) spec[k] *= 2.0;
  for (std::size_t k = n / 2 + 1; k < n; ++k) spec[k] = 0.0;
  fft_inplace(spec, true);

  std::vector<Complex> z(x.size());
  for (std::size_t i = 0; i < z.size(); ++i) z[i] = Complex(x[i], spec[i].imag());
  return AnalyticSignal(std::move(z), x.sample_rate());
}

}  // namespace aecd::signal
