#pragma once

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <span>
#include <vector>

#include "aecd/signal/time_series.hpp"

namespace aecd::preprocess {

struct EmdOptions {
  std::size_t max_imfs = 12;
  double sift_tolerance = 0.2;
  std::size_t max_sifts = 100;
  /// Number of extrema reflected about each end before fitting envelopes.
  std::size_t mirror_extrema = 2;
  /// Also require |extrema - zero crossings| <= 1 before accepting an IMF.
  bool require_imf_condition = true;
};

/// Intrinsic mode functions, highest frequency first, plus the residual.
struct IMFSet {
  std::vector<std::vector<double>> imfs;
  std::vector<double> residual;
  std::vector<double> significance;  // Pearson correlation of each IMF with the source
  double sample_rate = 0.0;

  std::size_t size() const noexcept { return imfs.size(); }
};

struct ExtremaCount {
  std::size_t maxima = 0;
  std::size_t minima = 0;
  std::size_t zero_crossings = 0;

  std::size_t extrema() const { return maxima + minima; }
};

inline ExtremaCount count_extrema(std::span<const double> x) {
  ExtremaCount c;
  for (std::size_t i = 1; i + 1 < x.size(); ++i) {
    c.maxima += (x[i] > x[i - 1]) & (x[i] >= x[i + 1]);
    c.minima += (x[i] < x[i - 1]) & (x[i] <= x[i + 1]);
  }
  double last = 0.0;
  for (double v : x) {
    if (v == 0.0) continue;
    if (last != 0.0 && (v > 0.0) != (last > 0.0)) ++c.zero_crossings;
    last = v;
  }
  return c;
}

namespace detail {

/// Natural cubic spline through (knot_x, knot_y), evaluated at 0..n-1.
/// Knots must be strictly increasing and bracket [0, n-1].
class NaturalSpline {
 public:
  void fit_and_eval(std::span<const double> kx, std::span<const double> ky, std::span<double> out) {
    const std::size_t m = kx.size();
    m2_.assign(m, 0.0);
    if (m >= 3) {
      // Thomas algorithm on the interior second derivatives.
      c_.assign(m, 0.0);
      d_.assign(m, 0.0);
      for (std::size_t i = 1; i + 1 < m; ++i) {
        const double h0 = kx[i] - kx[i - 1];
        const double h1 = kx[i + 1] - kx[i];
        const double a = h0 / 6.0, b = (h0 + h1) / 3.0, c = h1 / 6.0;
        const double rhs = (ky[i + 1] - ky[i]) / h1 - (ky[i] - ky[i - 1]) / h0;
        const double denom = b - a * c_[i - 1];
        c_[i] = c / denom;
        d_[i] = (rhs - a * d_[i - 1]) / denom;
      }
      for (std::size_t i = m - 2; i >= 1; --i) {
        m2_[i] = d_[i] - c_[i] * m2_[i + 1];
        if (i == 1) break;
      }
    }
    // Per-segment cubic in the offset from the left knot, evaluated by Horner.
    std::size_t t = 0;
    const std::size_t n = out.size();
    for (std::size_t seg = 0; seg + 1 < m && t < n; ++seg) {
      const double x0 = kx[seg], h = kx[seg + 1] - x0;
      const double c0 = ky[seg];
      const double c1 = (ky[seg + 1] - ky[seg]) / h - h * (2.0 * m2_[seg] + m2_[seg + 1]) / 6.0;
      const double c2 = 0.5 * m2_[seg];
      const double c3 = (m2_[seg + 1] - m2_[seg]) / (6.0 * h);
      const bool last_seg = seg + 2 >= m;
      for (; t < n && (last_seg || static_cast<double>(t) <= kx[seg + 1]); ++t) {
        const double u = static_cast<double>(t) - x0;
        out[t] = c0 + u * (c1 + u * (c2 + u * c3));
      }
    }
  }

 private:
  std::vector<double> m2_, c_, d_;
};

/// Scratch buffers reused across sifting iterations.
class Sifter {
 public:
  Sifter(std::size_t n, const EmdOptions& opt) : opt_(opt), upper_(n), lower_(n) {}

  /// Envelope mean of h; false when h lacks the extrema needed for envelopes.
  bool envelope_mean(std::span<const double> h, std::span<double> mean) {
    const std::size_t n = h.size();
    max_pos_.resize(n);
    min_pos_.resize(n);
    std::size_t nmax = 0, nmin = 0;
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const bool is_max = (h[i] > h[i - 1]) & (h[i] >= h[i + 1]);
      const bool is_min = (h[i] < h[i - 1]) & (h[i] <= h[i + 1]);
      max_pos_[nmax] = i;
      min_pos_[nmin] = i;
      nmax += is_max;
      nmin += is_min;
    }
    max_pos_.resize(nmax);
    min_pos_.resize(nmin);
    if (max_pos_.empty() || min_pos_.empty() || max_pos_.size() + min_pos_.size() < 3) return false;
    build_knots(h, max_pos_);
    spline_.fit_and_eval(kx_, ky_, upper_);
    build_knots(h, min_pos_);
    spline_.fit_and_eval(kx_, ky_, lower_);
    for (std::size_t i = 0; i < n; ++i) mean[i] = 0.5 * (upper_[i] + lower_[i]);
    return true;
  }

 private:
  // Extrema mirrored about the first and last samples.
  void build_knots(std::span<const double> h, const std::vector<std::size_t>& pos) {
    const double last = static_cast<double>(h.size() - 1);
    const std::size_t nm = std::min(opt_.mirror_extrema, pos.size());
    kx_.clear();
    ky_.clear();
    for (std::size_t j = nm; j-- > 0;) {
      kx_.push_back(-static_cast<double>(pos[j]));
      ky_.push_back(h[pos[j]]);
    }
    for (std::size_t p : pos) {
      kx_.push_back(static_cast<double>(p));
      ky_.push_back(h[p]);
    }
    for (std::size_t j = 0; j < nm; ++j) {
      const std::size_t p = pos[pos.size() - 1 - j];
      kx_.push_back(2.0 * last - static_cast<double>(p));
      ky_.push_back(h[p]);
    }
  }

  EmdOptions opt_;
  std::vector<std::size_t> max_pos_, min_pos_;
  std::vector<double> kx_, ky_, upper_, lower_;
  NaturalSpline spline_;
};

inline double max_abs(std::span<const double> x) {
  double m = 0.0;
  for (double v : x) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace detail

/// Empirical mode decomposition by envelope-mean sifting.
///
/// Each IMF is sifted until the Cauchy-type change
/// sum((h_prev - h_new)^2) / sum(h_prev^2) drops below `sift_tolerance` and
/// the extrema/zero-crossing counts differ by at most one, or until
/// `max_sifts` iterations. Extraction stops once the residual lacks the
/// extrema to build both envelopes (monotone or a single hump), falls to
/// round-off level, or `max_imfs` is reached.
inline IMFSet emd_decompose(const signal::TimeSeries& x, const EmdOptions& opt = {}) {
  const std::size_t n = x.size();
  if (n < 16) fail(ErrorCode::SignalTooShort, "EMD needs at least 16 samples");

  IMFSet out;
  out.sample_rate = x.sample_rate();
  out.residual.assign(x.samples().begin(), x.samples().end());
  const double scale = detail::max_abs(x.samples());

  detail::Sifter sifter(n, opt);
  std::vector<double> h(n), mean(n);
  while (out.imfs.size() < opt.max_imfs) {
    if (detail::max_abs(out.residual) <= 1e-10 * scale) break;
    h = out.residual;
    if (!sifter.envelope_mean(h, mean)) break;
    for (std::size_t it = 0; it < opt.max_sifts; ++it) {
      if (it > 0 && !sifter.envelope_mean(h, mean)) break;
      double num = 0.0, den = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        num += mean[i] * mean[i];
        den += h[i] * h[i];
        h[i] -= mean[i];
      }
      if (den == 0.0 || num / den < opt.sift_tolerance) {
        if (!opt.require_imf_condition) break;
        const auto c = count_extrema(h);
        const auto diff = static_cast<long>(c.extrema()) - static_cast<long>(c.zero_crossings);
        if (std::abs(diff) <= 1) break;
      }
    }
    for (std::size_t i = 0; i < n; ++i) out.residual[i] -= h[i];
    out.imfs.push_back(h);
  }
  out.significance.reserve(out.imfs.size());
  for (const auto& imf : out.imfs) out.significance.push_back(signal::pearson(imf, x.samples()));
  return out;
}

}  // namespace aecd::preprocess
