#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>
#include <vector>

#include "aecd/nn/model.hpp"

namespace aecd::nn {

struct TrainConfig {
  std::size_t minibatch = 64;
  double learning_rate = 0.001;
  double momentum = 0.9;
  std::size_t max_epochs = 220;
  std::size_t patience = 30;
  double tolerance = 1e-6;  // minimum J_VAL decrease that resets patience
  std::uint64_t seed = 1;
  std::size_t threads = 1;
  Readout readout = Readout::Last;
  double validation_fraction = 0.2;

  void validate(std::size_t dataset_size) const {
    if (!(learning_rate > 0.0)) fail(ErrorCode::InvalidArgument, "learning rate must be positive");
    if (minibatch < 1 || minibatch > dataset_size) {
      fail(ErrorCode::InvalidArgument, "minibatch must lie in [1, dataset size]");
    }
    if (patience < 1) fail(ErrorCode::InvalidArgument, "patience must be at least 1");
    if (!(momentum >= 0.0 && momentum < 1.0)) fail(ErrorCode::InvalidArgument, "momentum must lie in [0, 1)");
  }
};

/// v <- mu v - r g; theta <- theta + v.
inline void sgdm_step(ModelParams& theta, const ModelParams& grad, ModelParams& velocity, const TrainConfig& cfg) {
  auto p = tensors(theta);
  const auto g = tensors(grad);
  auto v = tensors(velocity);
  if (p.size() != g.size() || p.size() != v.size()) fail(ErrorCode::DimensionMismatch, "parameter layouts differ");
  for (std::size_t t = 0; t < p.size(); ++t) {
    if (p[t].size() != g[t].size() || p[t].size() != v[t].size()) {
      fail(ErrorCode::DimensionMismatch, "parameter shapes differ");
    }
    for (std::size_t i = 0; i < p[t].size(); ++i) {
      v[t][i] = cfg.momentum * v[t][i] - cfg.learning_rate * g[t][i];
      p[t][i] += v[t][i];
    }
  }
}

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double j_trn = 0.0;
  double j_val = 0.0;
  double train_acc = 0.0;
  double val_acc = 0.0;
};

struct TrainResult {
  ModelParams model;  // snapshot with the lowest J_VAL
  std::vector<EpochRecord> history;
  std::size_t best_epoch = 0;
  double best_j_val = std::numeric_limits<double>::infinity();

  std::size_t epochs_used() const { return history.size(); }
};

/// Optional replacement of the measured validation loss, e.g. to replay a
/// scripted loss curve.
using ValidationOverride = std::function<double(std::size_t epoch, double measured)>;

/// Training-set J and accuracy are running means over the epoch's
/// mini-batches; validation values are measured after the epoch.
inline TrainResult train(std::span<const DescriptorMatrix> train_set, std::span<const DescriptorMatrix> val_set,
                         std::size_t d_lstm, const TrainConfig& cfg, const ValidationOverride& override_val = {}) {
  if (train_set.empty() || val_set.empty()) fail(ErrorCode::EmptyDataset, "training and validation sets must be non-empty");
  cfg.validate(train_set.size());
  const auto labels = labels_of(train_set);
  labels_of(val_set);
  const auto& first = train_set.front();

  TrainResult r;
  ModelParams theta = make_model(first.lambda, first.n_ed, d_lstm, cfg.readout);
  initialize(theta, synth::derive_seed(cfg.seed, 0, /*stream=*/2));
  ModelParams velocity = zeros_like(theta);
  r.model = theta;

  std::vector<std::size_t> order(train_set.size());
  std::vector<const DescriptorMatrix*> batch;
  std::vector<std::size_t> batch_labels;
  std::size_t stale = 0;
  double patience_ref = std::numeric_limits<double>::infinity();
  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    synth::Rng rng(synth::derive_seed(cfg.seed, epoch, /*stream=*/3));
    std::shuffle(order.begin(), order.end(), rng.engine());

    double loss_sum = 0.0;
    std::size_t hits = 0;
    for (std::size_t lo = 0; lo < order.size(); lo += cfg.minibatch) {
      const std::size_t n = std::min(cfg.minibatch, order.size() - lo);
      batch.clear();
      batch_labels.clear();
      for (std::size_t k = lo; k < lo + n; ++k) {
        batch.push_back(&train_set[order[k]]);
        batch_labels.push_back(labels[order[k]]);
      }
      const auto g = bptt_gradients(theta, batch, batch_labels, cfg.threads);
      sgdm_step(theta, g.grad, velocity, cfg);
      loss_sum += g.loss * static_cast<double>(n);
      hits += g.correct;
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.j_trn = loss_sum / static_cast<double>(order.size());
    rec.train_acc = static_cast<double>(hits) / static_cast<double>(order.size());
    const auto val = score(theta, val_set, cfg.threads);
    rec.j_val = override_val ? override_val(epoch, val.loss) : val.loss;
    rec.val_acc = val.accuracy;
    r.history.push_back(rec);

    if (rec.j_val < r.best_j_val) {
      r.best_j_val = rec.j_val;
      r.best_epoch = epoch;
      r.model = theta;
    }
    if (rec.j_val < patience_ref - cfg.tolerance) {
      patience_ref = rec.j_val;
      stale = 0;
    } else if (++stale >= cfg.patience) {
      break;
    }
  }
  return r;
}

/// Seeded 80/20 split of a labeled set, then train.
inline TrainResult train(std::span<const DescriptorMatrix> data, std::size_t d_lstm, const TrainConfig& cfg,
                         const ValidationOverride& override_val = {}) {
  if (data.size() < 2) fail(ErrorCode::EmptyDataset, "need at least two events to train");
  labels_of(data);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  synth::Rng rng(synth::derive_seed(cfg.seed, 0, /*stream=*/4));
  std::shuffle(order.begin(), order.end(), rng.engine());
  const auto n_val = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::llround(cfg.validation_fraction * static_cast<double>(data.size()))), 1,
      data.size() - 1);
  std::vector<DescriptorMatrix> val, trn;
  for (std::size_t i = 0; i < order.size(); ++i) (i < n_val ? val : trn).push_back(data[order[i]]);
  return train(trn, val, d_lstm, cfg, override_val);
}

inline std::string history_csv(const std::vector<EpochRecord>& history) {
  std::ostringstream out;
  out << std::setprecision(17);
  out << "epoch,j_trn,j_val,train_acc,val_acc\n";
  for (const auto& h : history) {
    out << h.epoch << ',' << h.j_trn << ',' << h.j_val << ',' << h.train_acc << ',' << h.val_acc << '\n';
  }
  return out.str();
}

inline void save_history(const std::vector<EpochRecord>& history, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::Io, "cannot write " + path.string());
  out << history_csv(history);
}

}  // namespace aecd::nn
