#pragma once

#include <bit>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

#include "aecd/error.hpp"

namespace aecd::signal {

using Complex = std::complex<double>;

inline std::size_t next_pow2(std::size_t n) { return n <= 1 ? 1 : std::bit_ceil(n); }

inline bool is_pow2(std::size_t n) { return n != 0 && std::has_single_bit(n); }

namespace detail {

inline void bit_reverse_permute(std::span<Complex> a) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
}

}  // namespace detail

/// In-place iterative radix-2 transform. `inverse` applies the 1/N scale.
inline void fft_inplace(std::span<Complex> a, bool inverse = false) {
  const std::size_t n = a.size();
  if (!is_pow2(n)) fail(ErrorCode::InvalidArgument, "transform size must be a power of two");
  if (n == 1) return;
  detail::bit_reverse_permute(a);

  // Twiddles evaluated directly (no recurrence) to keep round-off at ulp level.
  const double sign = inverse ? 1.0 : -1.0;
  std::vector<Complex> tw(n / 2);
  for (std::size_t k = 0; k < n / 2; ++k) {
    const double ang = sign * 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
    tw[k] = Complex(std::cos(ang), std::sin(ang));
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t half = len / 2;
    const std::size_t stride = n / len;
    for (std::size_t i = 0; i < n; i += len) {
      for (std::size_t k = 0; k < half; ++k) {
        const Complex u = a[i + k];
        const Complex v = a[i + k + half] * tw[k * stride];
        a[i + k] = u + v;
        a[i + k + half] = u - v;
      }
    }
  }
  if (inverse) {
    const double s = 1.0 / static_cast<double>(n);
    for (auto& v : a) v *= s;
  }
}

/// Forward DFT of a real sequence, zero-padded to the next power of two.
inline std::vector<Complex> fft_real(std::span<const double> x, std::size_t size = 0) {
  const std::size_t n = size == 0 ? next_pow2(x.size()) : size;
  if (!is_pow2(n) || n < x.size()) fail(ErrorCode::InvalidArgument, "bad transform size");
  std::vector<Complex> a(n);
  for (std::size_t i = 0; i < x.size(); ++i) a[i] = Complex(x[i], 0.0);
  fft_inplace(a);
  return a;
}

inline std::vector<Complex> fft(std::vector<Complex> a) {
  fft_inplace(a);
  return a;
}

inline std::vector<Complex> ifft(std::vector<Complex> a) {
  fft_inplace(a, true);
  return a;
}

}  // namespace aecd::signal
