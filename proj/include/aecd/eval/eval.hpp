#pragma once

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "aecd/descriptors/standardize.hpp"
#include "aecd/eval/pipeline.hpp"
#include "aecd/nn/train.hpp"

namespace aecd::eval {

struct SplitRatios {
  double train = 0.72;
  double val = 0.18;
  double test = 0.10;
};

struct SplitIndices {
  std::vector<std::size_t> train, val, test;
};

/// Stratified split: each class is shuffled with the seed and cut at the
/// rounded ratio boundaries. Indices are returned in ascending order.
inline SplitIndices split_indices(std::span<const CrackClass> labels, const SplitRatios& r, std::uint64_t seed) {
  if (labels.size() < 10) fail(ErrorCode::DatasetTooSmall, "split needs at least 10 events");
  if (r.train < 0 || r.val < 0 || r.test < 0 || std::abs(r.train + r.val + r.test - 1.0) > 1e-9) {
    fail(ErrorCode::InvalidArgument, "split ratios must be non-negative and sum to 1");
  }
  SplitIndices out;
  for (std::size_t c = 0; c < kClassCount; ++c) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (class_index(labels[i]) == c) members.push_back(i);
    }
    synth::Rng rng(synth::derive_seed(seed, c, /*stream=*/5));
    std::shuffle(members.begin(), members.end(), rng.engine());
    const auto n = static_cast<double>(members.size());
    const auto n_train = static_cast<std::size_t>(std::llround(r.train * n));
    const auto n_val = std::min(members.size() - n_train, static_cast<std::size_t>(std::llround(r.val * n)));
    for (std::size_t k = 0; k < members.size(); ++k) {
      auto& part = k < n_train ? out.train : (k < n_train + n_val ? out.val : out.test);
      part.push_back(members[k]);
    }
  }
  for (auto* part : {&out.train, &out.val, &out.test}) std::sort(part->begin(), part->end());
  return out;
}

template <typename T>
struct Split {
  std::vector<T> train, val, test;
};

template <typename T>
std::vector<T> gather(std::span<const T> data, const std::vector<std::size_t>& idx) {
  std::vector<T> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(data[i]);
  return out;
}

inline std::vector<CrackClass> labels_of(std::span<const DescriptorMatrix> data) {
  std::vector<CrackClass> out;
  for (const auto& m : data) {
    if (!m.label) fail(ErrorCode::UnlabeledData, "event " + std::to_string(m.event_id) + " has no label");
    out.push_back(*m.label);
  }
  return out;
}

inline std::vector<CrackClass> labels_of(std::span<const synth::LabeledEvent> data) {
  std::vector<CrackClass> out;
  for (const auto& e : data) out.push_back(e.label);
  return out;
}

/// Stratified three-way split of labeled descriptor matrices or events.
template <typename T>
Split<T> split(std::span<const T> data, const SplitRatios& r, std::uint64_t seed) {
  const auto idx = split_indices(labels_of(data), r, seed);
  return {gather(data, idx.train), gather(data, idx.val), gather(data, idx.test)};
}

/// Rows: true class. Columns: predicted class.
struct ConfusionMatrix {
  std::array<std::array<std::size_t, kClassCount>, kClassCount> counts{};

  void add(CrackClass truth, CrackClass predicted) { ++counts[class_index(truth)][class_index(predicted)]; }
  std::size_t total() const {
    std::size_t n = 0;
    for (const auto& row : counts) n += std::accumulate(row.begin(), row.end(), std::size_t{0});
    return n;
  }
  std::size_t trace() const {
    std::size_t n = 0;
    for (std::size_t c = 0; c < kClassCount; ++c) n += counts[c][c];
    return n;
  }
  std::size_t row_sum(std::size_t c) const { return std::accumulate(counts[c].begin(), counts[c].end(), std::size_t{0}); }
  double accuracy() const { return total() ? static_cast<double>(trace()) / static_cast<double>(total()) : 0.0; }
  double recall(std::size_t c) const {
    return row_sum(c) ? static_cast<double>(counts[c][c]) / static_cast<double>(row_sum(c)) : 0.0;
  }
};

struct Evaluation {
  double accuracy = 0.0;
  ConfusionMatrix confusion;
};

inline Evaluation evaluate_predictions(std::span<const CrackClass> truth, std::span<const CrackClass> predicted) {
  if (truth.size() != predicted.size()) fail(ErrorCode::DimensionMismatch, "one prediction per event required");
  Evaluation e;
  for (std::size_t i = 0; i < truth.size(); ++i) e.confusion.add(truth[i], predicted[i]);
  e.accuracy = e.confusion.accuracy();
  return e;
}

/// Accuracy and confusion matrix of a frozen model on a labeled,
/// standardized set.
inline Evaluation evaluate(const nn::ModelParams& model, std::span<const DescriptorMatrix> data,
                           std::size_t threads = 1) {
  if (data.empty()) fail(ErrorCode::EmptyDataset, "cannot evaluate an empty set");
  const auto truth = labels_of(data);
  const auto preds = nn::predict_all(model, data, threads);
  std::vector<CrackClass> predicted;
  for (const auto& p : preds) predicted.push_back(p.label);
  return evaluate_predictions(truth, predicted);
}

std::string confusion_text(const ConfusionMatrix& m);

// ---------------------------------------------------------------------------
// Parameter sweep over input combinations and network sizes.

struct SweepConfig {
  std::vector<descriptors::Lambda> lambdas{descriptors::Lambda::L1, descriptors::Lambda::L5};
  std::vector<std::size_t> d_lstms{16};
  std::vector<std::uint64_t> seeds{1};
  SplitRatios ratios;
  nn::TrainConfig train;
};

struct SweepCell {
  descriptors::Lambda lambda = descriptors::Lambda::L5;
  std::size_t d_lstm = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  double train_acc = 0.0, val_acc = 0.0, test_acc = 0.0;
  std::size_t epochs = 0;
  double j_trn = 0.0, j_val = 0.0;  // at the returned (lowest J_VAL) epoch
  double wall_time_s = 0.0;
  std::vector<nn::EpochRecord> history;
  ConfusionMatrix test_confusion;
};

struct SweepResult {
  std::vector<SweepCell> cells;

  /// Mean of `field` over the completed seeds of one (lambda, d_lstm) cell.
  double mean(descriptors::Lambda lambda, std::size_t d_lstm, double SweepCell::*field) const {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& c : cells) {
      if (c.ok && c.lambda == lambda && c.d_lstm == d_lstm) {
        sum += c.*field;
        ++n;
      }
    }
    return n ? sum / static_cast<double>(n) : std::nan("");
  }
  double mean_epochs(descriptors::Lambda lambda, std::size_t d_lstm) const {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& c : cells) {
      if (c.ok && c.lambda == lambda && c.d_lstm == d_lstm) {
        sum += static_cast<double>(c.epochs);
        ++n;
      }
    }
    return n ? sum / static_cast<double>(n) : std::nan("");
  }
};

struct PreparedSplit {
  std::vector<DescriptorMatrix> train, val, test;
  descriptors::Stats stats;
};

/// Split with `seed`, slice the lambda rows and standardize with training
/// statistics.
inline PreparedSplit prepare(std::span<const DescriptorMatrix> all_rows, descriptors::Lambda lambda,
                             const SplitRatios& ratios, std::uint64_t seed) {
  const auto parts = split(all_rows, ratios, seed);
  PreparedSplit p;
  p.train = slice_all(parts.train, lambda);
  p.val = slice_all(parts.val, lambda);
  p.test = slice_all(parts.test, lambda);
  p.stats = descriptors::fit_stats(p.train);
  descriptors::apply_stats(p.train, p.stats);
  descriptors::apply_stats(p.val, p.stats);
  descriptors::apply_stats(p.test, p.stats);
  return p;
}

/// One grid cell: prepare, train with `seed`, evaluate. Failures are
/// recorded in the cell rather than thrown.
inline SweepCell run_cell(std::span<const DescriptorMatrix> all_rows, descriptors::Lambda lambda, std::size_t d_lstm,
                          std::uint64_t seed, const SplitRatios& ratios, nn::TrainConfig cfg) {
  SweepCell cell;
  cell.lambda = lambda;
  cell.d_lstm = d_lstm;
  cell.seed = seed;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    const auto data = prepare(all_rows, lambda, ratios, seed);
    cfg.seed = seed;
    const auto result = nn::train(data.train, data.val, d_lstm, cfg);
    cell.history = result.history;
    cell.epochs = result.epochs_used();
    const auto& best = result.history[result.best_epoch - 1];
    cell.j_trn = best.j_trn;
    cell.j_val = best.j_val;
    cell.train_acc = evaluate(result.model, data.train, cfg.threads).accuracy;
    cell.val_acc = evaluate(result.model, data.val, cfg.threads).accuracy;
    if (!data.test.empty()) {
      const auto test = evaluate(result.model, data.test, cfg.threads);
      cell.test_acc = test.accuracy;
      cell.test_confusion = test.confusion;
    }
    cell.ok = true;
  } catch (const std::exception& e) {
    cell.error = e.what();
  }
  cell.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return cell;
}

/// Every (lambda, d_lstm, seed) combination on descriptor matrices holding
/// all rows. `progress` is called after each finished cell.
inline SweepResult sweep(std::span<const DescriptorMatrix> all_rows, const SweepConfig& cfg,
                         const std::function<void(const SweepCell&)>& progress = {}) {
  SweepResult r;
  for (auto lambda : cfg.lambdas) {
    for (auto d : cfg.d_lstms) {
      for (auto seed : cfg.seeds) {
        r.cells.push_back(run_cell(all_rows, lambda, d, seed, cfg.ratios, cfg.train));
        if (progress) progress(r.cells.back());
      }
    }
  }
  return r;
}

std::string sweep_csv(const SweepResult& r);

}  // namespace aecd::eval
