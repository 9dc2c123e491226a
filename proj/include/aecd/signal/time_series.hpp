#pragma once

#include <cmath>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "aecd/error.hpp"

namespace aecd::signal {

/// Default acquisition rate of the multi-channel recorder (Hz).
inline constexpr double kDefaultSampleRate = 5.0e6;

/// Uniformly sampled real signal. Non-empty, finite samples, positive rate.
class TimeSeries {
 public:
  TimeSeries(std::vector<double> samples, double sample_rate)
      : samples_(std::move(samples)), sample_rate_(sample_rate) {
    if (!(sample_rate_ > 0.0) || !std::isfinite(sample_rate_)) {
      fail(ErrorCode::InvalidArgument, "sample_rate must be positive");
    }
    if (samples_.empty()) fail(ErrorCode::EmptySignal, "time series has no samples");
    for (double v : samples_) {
      if (!std::isfinite(v)) fail(ErrorCode::InvalidArgument, "non-finite sample");
    }
  }

  std::span<const double> samples() const noexcept { return samples_; }
  const std::vector<double>& values() const noexcept { return samples_; }
  double sample_rate() const noexcept { return sample_rate_; }
  std::size_t size() const noexcept { return samples_.size(); }
  double operator[](std::size_t i) const noexcept { return samples_[i]; }
  double dt() const noexcept { return 1.0 / sample_rate_; }

 private:
  std::vector<double> samples_;
  double sample_rate_;
};

inline double energy(std::span<const double> x) {
  double e = 0.0;
  for (double v : x) e += v * v;
  return e;
}

inline double energy(const TimeSeries& x) { return energy(x.samples()); }

inline bool all_zero(std::span<const double> x) {
  for (double v : x) {
    if (v != 0.0) return false;
  }
  return true;
}

/// Pearson correlation; zero when either side has no variance.
inline double pearson(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = std::min(a.size(), b.size());
  if (n == 0) return 0.0;
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= static_cast<double>(n);
  mb /= static_cast<double>(n);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double da = a[i] - ma, db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa <= 0.0 || sbb <= 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

}  // namespace aecd::signal
