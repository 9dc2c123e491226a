#pragma once

#include <cmath>
#include <vector>

#include "aecd/preprocess/emd.hpp"

namespace aecd::preprocess {

struct DenoiseOptions {
  EmdOptions emd;
  double pcc_threshold = 0.1;
};

struct DenoiseResult {
  signal::TimeSeries waveform;
  /// Set when the decomposition produced fewer than 3 IMFs and the input was
  /// passed through unchanged.
  bool too_few_imfs = false;
  std::vector<std::size_t> kept;  // 0-based IMF indices summed into the output
  std::size_t imf_count = 0;
};

/// Hilbert-Huang denoise/detrend: drop the first IMF (noise), the last IMF
/// and the residual (trend), and any remaining IMF whose |PCC| with the input
/// is below the threshold; the output is the sum of what is left.
inline DenoiseResult hht_denoise(const signal::TimeSeries& x, const DenoiseOptions& opt = {}) {
  const auto set = emd_decompose(x, opt.emd);
  if (set.size() < 3) return DenoiseResult{x, true, {}, set.size()};

  std::vector<double> out(x.size(), 0.0);
  DenoiseResult r{x, false, {}, set.size()};
  for (std::size_t k = 1; k + 1 < set.size(); ++k) {
    if (std::abs(set.significance[k]) < opt.pcc_threshold) continue;
    r.kept.push_back(k);
    const auto& imf = set.imfs[k];
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += imf[i];
  }
  r.waveform = signal::TimeSeries(std::move(out), x.sample_rate());
  return r;
}

}  // namespace aecd::preprocess
