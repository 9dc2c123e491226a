#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <vector>

#include <json.hpp>

#include "aecd/binary_io.hpp"
#include "aecd/synth/generator.hpp"

namespace aecd::synth {

struct LabeledDataset {
  std::vector<LabeledEvent> events;
  double sample_rate = signal::kDefaultSampleRate;

  std::size_t size() const { return events.size(); }
};

/// Balanced labels in a seeded random order; event i is generated from
/// derive_seed(seed, i), so the set is a pure function of (n_per_class, cfg).
inline std::vector<CrackClass> shuffled_labels(std::size_t n_per_class, std::uint64_t seed) {
  std::vector<CrackClass> labels;
  labels.reserve(kClassCount * n_per_class);
  for (std::size_t c = 0; c < kClassCount; ++c) labels.insert(labels.end(), n_per_class, class_from_index(c));
  Rng rng(derive_seed(seed, 0, /*stream=*/1));
  std::shuffle(labels.begin(), labels.end(), rng.engine());
  return labels;
}

inline LabeledEvent generate_indexed_event(const std::vector<CrackClass>& labels, std::size_t i,
                                           const SynthConfig& cfg) {
  return generate_event(labels[i], cfg, derive_seed(cfg.seed, i), static_cast<std::int64_t>(i));
}

inline LabeledDataset generate_dataset(std::size_t n_per_class, const SynthConfig& cfg) {
  if (n_per_class == 0) fail(ErrorCode::InvalidArgument, "n_per_class must be at least 1");
  cfg.validate();
  const auto labels = shuffled_labels(n_per_class, cfg.seed);
  LabeledDataset ds;
  ds.sample_rate = cfg.sample_rate;
  ds.events.reserve(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) ds.events.push_back(generate_indexed_event(labels, i, cfg));
  return ds;
}

/// Label-preserving perturbation, one of: time shift up to 5% of the record
/// (zero-filled), amplitude scale in [0.7, 1.3], or extra Gaussian noise at
/// snr_db + delta (delta in [-3, 3] dB) passed through the sensor model.
enum class AugmentKind { TimeShift, AmplitudeScale, AdditiveNoise };

inline LabeledEvent augment(const LabeledEvent& in, const SynthConfig& cfg, Rng& rng,
                            std::optional<AugmentKind> force = std::nullopt) {
  LabeledEvent out = in;
  const auto kind = force ? *force : static_cast<AugmentKind>(rng.uniform_int(0, 2));
  auto& chans = out.event.channels;
  switch (kind) {
    case AugmentKind::TimeShift: {
      const auto n = static_cast<std::int64_t>(chans.front().size());
      const auto max_shift = static_cast<std::int64_t>(0.05 * static_cast<double>(n));
      const auto shift = rng.uniform_int(-max_shift, max_shift);
      for (auto& ch : chans) {
        std::vector<double> v(ch.size(), 0.0);
        for (std::int64_t i = 0; i < n; ++i) {
          const std::int64_t src = i - shift;
          if (src >= 0 && src < n) v[static_cast<std::size_t>(i)] = ch[static_cast<std::size_t>(src)];
        }
        ch = signal::TimeSeries(std::move(v), ch.sample_rate());
      }
      break;
    }
    case AugmentKind::AmplitudeScale: {
      const double g = rng.uniform(0.7, 1.3);
      for (auto& ch : chans) {
        auto v = ch.values();
        for (double& x : v) x *= g;
        ch = signal::TimeSeries(std::move(v), ch.sample_rate());
      }
      break;
    }
    case AugmentKind::AdditiveNoise: {
      const double delta = rng.uniform(-3.0, 3.0);
      const double sd = in.draw.noise_sd * std::pow(10.0, -delta / 20.0);
      const auto model = cfg.transducer();
      for (auto& ch : chans) {
        std::vector<double> nz(ch.size());
        for (double& x : nz) x = rng.normal(0.0, sd);
        const auto shaped = preprocess::convolve_tfr(signal::TimeSeries(std::move(nz), ch.sample_rate()), model);
        auto v = ch.values();
        for (std::size_t i = 0; i < v.size(); ++i) v[i] += shaped[i];
        ch = signal::TimeSeries(std::move(v), ch.sample_rate());
      }
      break;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// On-disk layout: <dir>/manifest.json + one AEWF file per event.
// AEWF (little-endian): "AEWF", channels u32, length u32, float64 samples
// channel-major.

void write_waveform(const std::filesystem::path& path, const preprocess::RawEvent& ev);

preprocess::RawEvent read_waveform(const std::filesystem::path& path, double sample_rate,
                                   std::int64_t event_id = 0);

struct ManifestEntry {
  std::int64_t id = 0;
  std::optional<CrackClass> label;
  std::string file;
};

struct Manifest {
  double sample_rate = signal::kDefaultSampleRate;
  std::vector<ManifestEntry> events;
  nlohmann::json extra = nlohmann::json::object();
};

CrackClass class_from_string(std::string_view s);

void write_manifest(const std::filesystem::path& dir, const Manifest& m);

Manifest read_manifest(const std::filesystem::path& dir);

std::string waveform_file_name(std::int64_t id);

void save_dataset(const std::filesystem::path& dir, const LabeledDataset& ds, nlohmann::json extra = {});

}  // namespace aecd::synth
