#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "aecd/crack_class.hpp"
#include "aecd/preprocess/hht.hpp"
#include "aecd/preprocess/transducer.hpp"


namespace aecd::preprocess {

/// Multi-channel transducer recording of one event. Channels share length and
/// sample rate.
struct RawEvent {
  std::vector<signal::TimeSeries> channels;
  std::int64_t event_id = 0;
  double trigger_time = 0.0;

  void validate() const {
    if (channels.empty()) fail(ErrorCode::InvalidArgument, "event has no channels");
    for (const auto& c : channels) {
      if (c.size() != channels.front().size() || c.sample_rate() != channels.front().sample_rate()) {
        fail(ErrorCode::DimensionMismatch, "channels differ in length or sample rate");
      }
    }
  }
};

/// Denoised waveform of the channel with the highest post-denoise energy.
struct ProcessedEvent {
  signal::TimeSeries waveform;
  std::size_t source_channel = 0;  // 1-based (Ch1..ChK)
  double energy = 0.0;
  std::optional<CrackClass> label;
  std::int64_t event_id = 0;
};

struct PreprocessOptions {
  DenoiseOptions denoise;
};

/// Transfer-function removal then HHT denoising on every channel; keeps the
/// channel with the largest sum of squares (lowest index on ties). A channel
/// that throws is skipped; the error is rethrown only when every channel
/// fails.
inline ProcessedEvent select_max_energy_channel(const RawEvent& event, const TransducerModel& model,
                                                const PreprocessOptions& opt = {}) {
  event.validate();
  std::optional<ProcessedEvent> best;
  std::exception_ptr last_error;
  for (std::size_t k = 0; k < event.channels.size(); ++k) {
    try {
      auto s = deconvolve_tfr(event.channels[k], model);
      auto d = hht_denoise(s, opt.denoise);
      const double e = signal::energy(d.waveform);
      if (!best || e > best->energy) best = ProcessedEvent{std::move(d.waveform), k + 1, e, std::nullopt, event.event_id};
    } catch (...) {
      last_error = std::current_exception();
    }
  }
  if (!best) std::rethrow_exception(last_error);
  return std::move(*best);
}

}  // namespace aecd::preprocess
