#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "aecd/descriptors/gamma.hpp"
#include "aecd/parallel.hpp"
#include "aecd/preprocess/channel.hpp"
#include "aecd/synth/dataset.hpp"

namespace aecd::eval {

using descriptors::DescriptorMatrix;

struct EventSource {
  std::function<preprocess::RawEvent(std::size_t)> load;
  std::function<std::optional<CrackClass>(std::size_t)> label;
  std::size_t count = 0;
};

struct FeatureFailure {
  std::size_t index = 0;
  std::string message;
};

struct FeatureSet {
  std::vector<DescriptorMatrix> features;  // successful events, source order
  std::vector<std::size_t> source_index;   // position of each feature in the source
  std::vector<FeatureFailure> failures;
};

/// Transfer-function removal, HHT denoising, channel selection and all five
/// descriptor rows for every event of `src`. Events are independent, so the
/// result does not depend on `threads`. A failing event is skipped and
/// reported.
inline FeatureSet extract_features(const EventSource& src, const preprocess::TransducerModel& model,
                                   const descriptors::DescriptorConfig& cfg,
                                   const preprocess::PreprocessOptions& opt = {}, std::size_t threads = 1) {
  std::vector<std::optional<DescriptorMatrix>> slots(src.count);
  std::vector<std::string> errors(src.count);
  parallel_for(src.count, threads, [&](std::size_t i) {
    try {
      const auto raw = src.load(i);
      auto processed = preprocess::select_max_energy_channel(raw, model, opt);
      processed.label = src.label ? src.label(i) : std::nullopt;
      slots[i] = descriptors::build_all_rows(processed, cfg);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });
  FeatureSet out;
  for (std::size_t i = 0; i < src.count; ++i) {
    if (slots[i]) {
      out.features.push_back(std::move(*slots[i]));
      out.source_index.push_back(i);
    } else {
      out.failures.push_back({i, errors[i]});
    }
  }
  return out;
}

/// Events generated on demand from (labels, cfg); nothing is held in memory
/// beyond the event being processed.
inline EventSource synthetic_source(const std::vector<CrackClass>& labels, const synth::SynthConfig& cfg) {
  EventSource src;
  src.count = labels.size();
  src.load = [&labels, &cfg](std::size_t i) { return synth::generate_indexed_event(labels, i, cfg).event; };
  src.label = [&labels](std::size_t i) { return std::optional<CrackClass>(labels[i]); };
  return src;
}

inline std::vector<DescriptorMatrix> slice_all(std::span<const DescriptorMatrix> all, descriptors::Lambda lambda) {
  std::vector<DescriptorMatrix> out;
  out.reserve(all.size());
  for (const auto& m : all) out.push_back(descriptors::slice(m, lambda));
  return out;
}

}  // namespace aecd::eval
