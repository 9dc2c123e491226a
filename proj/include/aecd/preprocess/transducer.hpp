#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <vector>

#include <json.hpp>

#include "aecd/signal/fft.hpp"
#include "aecd/signal/time_series.hpp"

namespace aecd::preprocess {

using signal::Complex;
using signal::TimeSeries;

/// Sensor response W_s on the two-sided transform grid plus the flat
/// filter/amplifier gain (ups). Division is floored at
/// floor_epsilon * max|W_s|.
struct TransducerModel {
  std::vector<Complex> response;
  double ups = 1.0;
  double floor_epsilon = 1e-6;

  void validate() const {
    if (response.empty()) fail(ErrorCode::InvalidArgument, "transducer response is empty");
    if (!(ups > 0.0)) fail(ErrorCode::InvalidArgument, "transducer gain must be positive");
    if (!(floor_epsilon > 0.0)) fail(ErrorCode::InvalidArgument, "floor_epsilon must be positive");
  }
};

/// Flat unit response of the given transform size.
inline TransducerModel flat_model(std::size_t nfft, double ups = 1.0) {
  return TransducerModel{std::vector<Complex>(nfft, Complex(1.0, 0.0)), ups, 1e-6};
}

/// Second-order resonant band-pass sampled on the transform grid, unit peak
/// gain at `resonance_hz`. Negative-frequency bins are conjugates so the
/// impulse response is real.
inline TransducerModel resonant_model(std::size_t nfft, double sample_rate, double resonance_hz = 150e3,
                                      double quality = 2.0, double ups = 1.0, double floor_epsilon = 1e-6) {
  if (!signal::is_pow2(nfft)) fail(ErrorCode::InvalidArgument, "transform size must be a power of two");
  std::vector<Complex> h(nfft);
  const double w0 = 2.0 * std::numbers::pi * resonance_hz;
  for (std::size_t k = 0; k <= nfft / 2; ++k) {
    const double w = 2.0 * std::numbers::pi * static_cast<double>(k) * sample_rate / static_cast<double>(nfft);
    const Complex num(0.0, w * w0 / quality);
    const Complex den(w0 * w0 - w * w, w * w0 / quality);
    h[k] = num / den;
    if (k > 0 && k < nfft / 2) h[nfft - k] = std::conj(h[k]);
  }
  h[nfft / 2] = Complex(h[nfft / 2].real(), 0.0);
  return TransducerModel{std::move(h), ups, floor_epsilon};
}

namespace detail {

inline void check_model_size(const TimeSeries& r, const TransducerModel& model) {
  model.validate();
  const std::size_t n = signal::next_pow2(r.size());
  if (model.response.size() != n) {
    fail(ErrorCode::ModelLengthMismatch, "response has " + std::to_string(model.response.size()) +
                                             " bins, transform size is " + std::to_string(n));
  }
}

inline std::vector<double> real_part(const std::vector<Complex>& z, std::size_t length) {
  std::vector<double> out(length);
  for (std::size_t i = 0; i < length; ++i) out[i] = z[i].real();
  return out;
}

}  // namespace detail

/// Transfer-function removal: S(f) = R(f) / (ups * W_s(f)) with the
/// response magnitude floored at floor_epsilon * max|W_s| (phase kept).
inline TimeSeries deconvolve_tfr(const TimeSeries& r, const TransducerModel& model) {
  detail::check_model_size(r, model);
  const std::size_t n = model.response.size();
  auto spec = signal::fft_real(r.samples(), n);

  double peak = 0.0;
  for (const auto& w : model.response) peak = std::max(peak, std::abs(w));
  const double floor = model.floor_epsilon * peak;
  for (std::size_t k = 0; k < n; ++k) {
    Complex w = model.response[k];
    const double mag = std::abs(w);
    if (mag < floor) w = mag > 0.0 ? w * (floor / mag) : Complex(floor, 0.0);
    spec[k] /= model.ups * w;
  }
  signal::fft_inplace(spec, true);
  return TimeSeries(detail::real_part(spec, r.size()), r.sample_rate());
}

/// Forward acquisition model R(f) = ups * W_s(f) * S(f) (circular on the
/// padded grid), the exact inverse of deconvolve_tfr away from floored bins.
inline TimeSeries convolve_tfr(const TimeSeries& s, const TransducerModel& model) {
  detail::check_model_size(s, model);
  const std::size_t n = model.response.size();
  auto spec = signal::fft_real(s.samples(), n);
  for (std::size_t k = 0; k < n; ++k) spec[k] *= model.ups * model.response[k];
  signal::fft_inplace(spec, true);
  return TimeSeries(detail::real_part(spec, s.size()), s.sample_rate());
}

nlohmann::json to_json(const TransducerModel& model);

TransducerModel transducer_from_json(const nlohmann::json& j);

TransducerModel load_transducer(const std::filesystem::path& path);

void save_transducer(const TransducerModel& model, const std::filesystem::path& path);

}  // namespace aecd::preprocess
