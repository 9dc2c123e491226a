#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include "aecd/descriptors/config.hpp"
#include "aecd/signal/analytic.hpp"
#include "aecd/signal/spectrum.hpp"
#include "aecd/signal/stft.hpp"

namespace aecd::descriptors {

using signal::TimeSeries;

/// IF = (1/2pi) dphi/dt from the unwrapped analytic phase: central
/// differences inside, one-sided at the ends, clamped to [0, fs/2].
inline std::vector<double> instantaneous_frequency(const TimeSeries& x) {
  const auto phi = signal::analytic_signal(x).phase();
  const std::size_t n = phi.size();
  const double fs = x.sample_rate();
  const double nyq = fs / 2.0;
  std::vector<double> f(n);
  const double two_pi = 2.0 * std::numbers::pi;
  for (std::size_t i = 0; i < n; ++i) {
    double d;
    if (i == 0) d = (phi[1] - phi[0]) * fs / two_pi;
    else if (i + 1 == n) d = (phi[n - 1] - phi[n - 2]) * fs / two_pi;
    else d = (phi[i + 1] - phi[i - 1]) * fs / (2.0 * two_pi);
    f[i] = std::clamp(d, 0.0, nyq);
  }
  return f;
}

/// Normalized Shannon entropy (log2, divided by log2 of the bin count) of a
/// one-sided power distribution. 0 for an all-zero spectrum.
inline double normalized_entropy(std::span<const double> power) {
  double total = 0.0;
  for (double p : power) total += p;
  if (total <= 0.0 || power.size() < 2) return 0.0;
  double h = 0.0;
  for (double p : power) {
    if (p <= 0.0) continue;
    const double q = p / total;
    h -= q * std::log2(q);
  }
  return std::clamp(h / std::log2(static_cast<double>(power.size())), 0.0, 1.0);
}

/// Framewise spectral entropy over rectangular frames of `se_window` samples.
inline std::vector<double> spectral_entropy(const TimeSeries& x, const DescriptorConfig& cfg) {
  if (cfg.se_hop == 0) fail(ErrorCode::ZeroHop, "se_hop must be positive");
  if (cfg.se_window == 0 || cfg.se_window > x.size()) {
    fail(ErrorCode::WindowTooLong, "se_window exceeds signal length");
  }
  const std::size_t frames = signal::stft_frame_count(x.size(), cfg.se_window, cfg.se_hop);
  std::vector<double> se(frames);
  const auto s = x.samples();
  for (std::size_t f = 0; f < frames; ++f) {
    const auto seg = s.subspan(f * cfg.se_hop, cfg.se_window);
    se[f] = normalized_entropy(signal::power_spectrum(seg));
  }
  return se;
}

/// Entropy of the whole-signal spectrum.
inline double spectral_entropy_total(const TimeSeries& x) {
  return normalized_entropy(signal::power_spectrum(x));
}

/// kappa(f) = <|S|^4>_t / <|S|^2>_t^2 - 2 per one-sided bin; DC (and any bin
/// with no energy) is 0.
inline std::vector<double> spectral_kurtosis(const signal::STFTGrid& grid) {
  if (grid.frame_count < 8) {
    fail(ErrorCode::TooFewFrames, "spectral kurtosis needs at least 8 STFT frames, got " +
                                      std::to_string(grid.frame_count));
  }
  std::vector<double> m2(grid.bin_count, 0.0), m4(grid.bin_count, 0.0);
  for (std::size_t t = 0; t < grid.frame_count; ++t) {
    const auto fr = grid.frame(t);
    for (std::size_t k = 0; k < grid.bin_count; ++k) {
      const double p = std::norm(fr[k]);
      m2[k] += p;
      m4[k] += p * p;
    }
  }
  const double n = static_cast<double>(grid.frame_count);
  std::vector<double> kappa(grid.bin_count, 0.0);
  for (std::size_t k = 1; k < grid.bin_count; ++k) {
    const double a = m2[k] / n;
    if (a <= 0.0) continue;
    kappa[k] = (m4[k] / n) / (a * a) - 2.0;
  }
  return kappa;
}

inline std::vector<double> spectral_kurtosis(const TimeSeries& x, const DescriptorConfig& cfg) {
  return spectral_kurtosis(signal::stft(x, cfg.stft_window, cfg.stft_hop, cfg.stft_window_kind));
}

/// Half-open bin range [first, last) whose centre frequencies lie in [lo, hi].
struct BinRange {
  std::size_t first = 0;
  std::size_t last = 0;
  std::size_t size() const { return last - first; }
};

inline BinRange band_bins(double bin_width, std::size_t bin_count, double lo, double hi) {
  BinRange r{bin_count, bin_count};
  for (std::size_t k = 0; k < bin_count; ++k) {
    const double f = static_cast<double>(k) * bin_width;
    if (f >= lo && r.first == bin_count) r.first = k;
    if (f <= hi) r.last = k + 1;
  }
  if (r.first >= r.last) {
    // Band narrower than one bin: fall back to the nearest bin.
    const auto k = static_cast<std::size_t>(std::lround(0.5 * (lo + hi) / bin_width));
    r.first = std::min(k, bin_count - 1);
    r.last = r.first + 1;
  }
  return r;
}

/// Mean spectral kurtosis over the bins inside [lo, hi].
inline double band_mean(std::span<const double> per_bin, double bin_width, double lo, double hi) {
  const auto r = band_bins(bin_width, per_bin.size(), lo, hi);
  double s = 0.0;
  for (std::size_t k = r.first; k < r.last; ++k) s += per_bin[k];
  return s / static_cast<double>(r.size());
}

/// SEV(n) = |z(n)|^2.
inline std::vector<double> spectral_envelope(const TimeSeries& x) {
  const auto z = signal::analytic_signal(x);
  std::vector<double> sev(z.size());
  for (std::size_t i = 0; i < sev.size(); ++i) sev[i] = std::norm(z.values()[i]);
  return sev;
}

/// RMS / mean of a non-negative envelope, as sqrt(1 + var/mean^2) so the
/// result never drops below 1. Exactly 1 for a constant or all-zero frame.
inline double l2l1_ratio(std::span<const double> sev) {
  if (sev.empty()) return 1.0;
  const auto [lo, hi] = std::minmax_element(sev.begin(), sev.end());
  if (*lo == *hi) return 1.0;
  const double n = static_cast<double>(sev.size());
  double mean = 0.0;
  for (double v : sev) mean += v;
  mean /= n;
  if (mean <= 0.0) return 1.0;
  double var = 0.0;
  for (double v : sev) var += (v - mean) * (v - mean);
  var /= n;
  return std::sqrt(1.0 + var / (mean * mean));
}

/// Envelope kurtosis m4{z}/m2{z}^2 - 2 with m_p the raw moment of |z|.
inline double envelope_kurtosis(std::span<const signal::Complex> z) {
  double m2 = 0.0, m4 = 0.0;
  for (const auto& v : z) {
    const double a = std::abs(v);
    m2 += a * a;
    m4 += a * a * a * a;
  }
  const double n = static_cast<double>(z.size());
  m2 /= n;
  m4 /= n;
  return m4 / (m2 * m2) - 2.0;
}

inline std::vector<double> spectral_l2l1_norm(std::span<const double> sev, const DescriptorConfig& cfg) {
  if (cfg.stft_window < 8) fail(ErrorCode::InvalidArgument, "SLN frame length must be at least 8");
  if (cfg.stft_hop == 0) fail(ErrorCode::ZeroHop, "stft_hop must be positive");
  if (cfg.stft_window > sev.size()) fail(ErrorCode::WindowTooLong, "SLN frame exceeds signal length");
  const std::size_t frames = signal::stft_frame_count(sev.size(), cfg.stft_window, cfg.stft_hop);
  std::vector<double> out(frames);
  for (std::size_t f = 0; f < frames; ++f) out[f] = l2l1_ratio(sev.subspan(f * cfg.stft_hop, cfg.stft_window));
  return out;
}

/// Framewise SLN = RMS(SEV) / mean(SEV) over (stft_window, stft_hop) frames.
inline std::vector<double> spectral_l2l1_norm(const TimeSeries& x, const DescriptorConfig& cfg) {
  return spectral_l2l1_norm(spectral_envelope(x), cfg);
}

/// Linear interpolation onto n_ed evenly spaced positions spanning the source
/// index range; both endpoints are reproduced exactly.
inline std::vector<double> resample_descriptor(std::span<const double> values, std::size_t n_ed) {
  if (values.empty()) fail(ErrorCode::EmptyInput, "cannot resample an empty sequence");
  if (n_ed == 0) fail(ErrorCode::InvalidArgument, "n_ed must be positive");
  std::vector<double> out(n_ed);
  const std::size_t len = values.size();
  if (len == 1 || n_ed == 1) {
    std::fill(out.begin(), out.end(), values.front());
    if (n_ed > 1) out.back() = values.back();
    return out;
  }
  const double denom = static_cast<double>(n_ed - 1);
  for (std::size_t j = 0; j < n_ed; ++j) {
    const double pos = static_cast<double>(j * (len - 1)) / denom;
    const auto i0 = std::min(static_cast<std::size_t>(pos), len - 2);
    const double frac = pos - static_cast<double>(i0);
    out[j] = frac == 0.0 ? values[i0] : values[i0] + frac * (values[i0 + 1] - values[i0]);
  }
  out.back() = values.back();
  return out;
}

}  // namespace aecd::descriptors
