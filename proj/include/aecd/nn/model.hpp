#pragma once

#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "aecd/crack_class.hpp"
#include "aecd/descriptors/gamma.hpp"
#include "aecd/descriptors/standardize.hpp"
#include "aecd/nn/lstm.hpp"
#include "aecd/parallel.hpp"
#include "aecd/synth/rng.hpp"

namespace aecd::nn {

using descriptors::DescriptorMatrix;
using descriptors::Lambda;

/// How the layer-2 sequence is reduced to one vector for the dense layer.
enum class Readout { Last, Mean };

/// Stacked BiLSTM -> ReLU -> BiLSTM -> dense(3) -> softmax.
struct ModelParams {
  BiLSTMLayer layer1;
  BiLSTMLayer layer2;
  Matrix dense_W;  // 3 x layer2 width
  Vector dense_b;  // 3

  Lambda lambda = Lambda::L5;
  std::size_t n_ed = 0;
  Readout readout = Readout::Last;
  std::string stats_ref;
  std::optional<descriptors::Stats> stats;

  std::size_t n1() const { return layer1.width(); }
  std::size_t n2() const { return layer2.width(); }
  std::size_t d_lstm() const { return n1() + n2(); }
  std::size_t input_rows() const { return layer1.input(); }
};

/// Zero parameters with layer widths n1 and n2 (each split evenly between
/// the two directions).
inline ModelParams make_model(Lambda lambda, std::size_t n_ed, std::size_t n1, std::size_t n2,
                              Readout readout = Readout::Last) {
  if (n1 < 2 || n2 < 2 || n1 % 2 != 0 || n2 % 2 != 0) {
    fail(ErrorCode::InvalidArgument, "layer widths must be even and at least 2");
  }
  if (n_ed == 0) fail(ErrorCode::InvalidArgument, "n_ed must be positive");
  ModelParams m;
  m.lambda = lambda;
  m.n_ed = n_ed;
  m.readout = readout;
  m.layer1 = BiLSTMLayer(descriptors::rows_for(lambda).size(), n1 / 2);
  m.layer2 = BiLSTMLayer(n1, n2 / 2);
  m.dense_W = Matrix::Zero(kClassCount, static_cast<Eigen::Index>(n2));
  m.dense_b = Vector::Zero(kClassCount);
  return m;
}

/// d_lstm is split equally between the two layers.
inline ModelParams make_model(Lambda lambda, std::size_t n_ed, std::size_t d_lstm, Readout readout = Readout::Last) {
  if (d_lstm % 4 != 0) fail(ErrorCode::InvalidArgument, "d_lstm must be a multiple of 4");
  return make_model(lambda, n_ed, d_lstm / 2, d_lstm / 2, readout);
}

/// Same shapes and metadata, all parameters zero.
inline ModelParams zeros_like(const ModelParams& m) {
  ModelParams z = make_model(m.lambda, m.n_ed, m.n1(), m.n2(), m.readout);
  return z;
}

/// Every parameter tensor as a flat view, in a fixed order.
inline std::vector<std::span<double>> tensors(ModelParams& m) {
  std::vector<std::span<double>> out;
  auto add = [&](auto& t) { out.emplace_back(t.data(), static_cast<std::size_t>(t.size())); };
  for (auto* layer : {&m.layer1, &m.layer2}) {
    for (auto* cell : {&layer->forward_cell, &layer->backward_cell}) {
      add(cell->W);
      add(cell->V);
      add(cell->b);
    }
  }
  add(m.dense_W);
  add(m.dense_b);
  return out;
}

inline std::vector<std::span<const double>> tensors(const ModelParams& m) {
  auto mut = tensors(const_cast<ModelParams&>(m));
  return {mut.begin(), mut.end()};
}

inline std::size_t parameter_count(const ModelParams& m) {
  std::size_t n = 0;
  for (auto t : tensors(m)) n += t.size();
  return n;
}

/// Dense weights N(0, 1) / sqrt(fan_in); LSTM weights U(-1/sqrt(h), 1/sqrt(h));
/// forget-gate bias 1, other biases 0.
inline void initialize(ModelParams& m, std::uint64_t seed) {
  synth::Rng rng(seed);
  for (auto* layer : {&m.layer1, &m.layer2}) {
    for (auto* cell : {&layer->forward_cell, &layer->backward_cell}) {
      const double a = 1.0 / std::sqrt(static_cast<double>(cell->hidden()));
      for (Eigen::Index i = 0; i < cell->W.size(); ++i) cell->W.data()[i] = rng.uniform(-a, a);
      for (Eigen::Index i = 0; i < cell->V.size(); ++i) cell->V.data()[i] = rng.uniform(-a, a);
      cell->b.setZero();
      cell->gate_b(Gate::Forget).setOnes();
    }
  }
  const double scale = 1.0 / std::sqrt(static_cast<double>(m.dense_W.cols()));
  for (Eigen::Index i = 0; i < m.dense_W.size(); ++i) m.dense_W.data()[i] = rng.normal(0.0, 1.0) * scale;
  m.dense_b.setZero();
}

inline std::vector<double> relu(std::span<const double> v) {
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = std::max(v[i], 0.0);
  return out;
}

/// Max-shifted softmax.
inline std::vector<double> softmax(std::span<const double> logits) {
  if (logits.empty()) return {};
  const double top = *std::max_element(logits.begin(), logits.end());
  std::vector<double> out(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) sum += out[i] = std::exp(logits[i] - top);
  for (double& v : out) v /= sum;
  return out;
}

inline constexpr double kLogClamp = 1e-15;

/// Mean over rows of -sum_j t_ij ln(y_ij). Rows of `predictions` must sum to
/// one within 1e-6; `targets` must be one-hot.
inline double cross_entropy(const Matrix& predictions, const Matrix& targets) {
  if (predictions.rows() != targets.rows() || predictions.cols() != targets.cols()) {
    fail(ErrorCode::DimensionMismatch, "prediction and target shapes differ");
  }
  if (predictions.rows() == 0) fail(ErrorCode::EmptyInput, "cross entropy of an empty batch");
  double loss = 0.0;
  for (Eigen::Index i = 0; i < predictions.rows(); ++i) {
    if (std::abs(predictions.row(i).sum() - 1.0) > 1e-6) {
      fail(ErrorCode::RowNotNormalized, "prediction row " + std::to_string(i) + " does not sum to 1");
    }
    int ones = 0;
    for (Eigen::Index j = 0; j < targets.cols(); ++j) {
      const double t = targets(i, j);
      if (t != 0.0 && t != 1.0) fail(ErrorCode::InvalidArgument, "targets must be one-hot");
      if (t == 1.0) {
        ++ones;
        loss -= std::log(std::max(predictions(i, j), kLogClamp));
      }
    }
    if (ones != 1) fail(ErrorCode::InvalidArgument, "targets must be one-hot");
  }
  return loss / static_cast<double>(predictions.rows());
}

/// Activations of one batch, kept for the backward pass.
struct BatchCache {
  std::size_t steps = 0;
  std::size_t batch = 0;
  Matrix input;
  BiLSTMCache layer1;
  Matrix rectified;
  BiLSTMCache layer2;
  Matrix pooled;  // n2 x batch
  Matrix probs;   // 3 x batch
};

inline void check_compatible(const ModelParams& m, const DescriptorMatrix& g) {
  if (g.n_ed != m.n_ed) {
    fail(ErrorCode::ConfigMismatch,
         "n_ed mismatch: model " + std::to_string(m.n_ed) + ", features " + std::to_string(g.n_ed));
  }
  if (g.lambda != m.lambda || g.row_count() != m.input_rows()) {
    fail(ErrorCode::ConfigMismatch, "lambda mismatch: model " + std::to_string(descriptors::to_int(m.lambda)) +
                                        ", features " + std::to_string(descriptors::to_int(g.lambda)));
  }
  if (g.values.size() != g.row_count() * g.n_ed) fail(ErrorCode::DimensionMismatch, "descriptor matrix is ragged");
}

inline void forward_batch(const ModelParams& m, std::span<const DescriptorMatrix* const> batch, BatchCache& c) {
  const std::size_t B = batch.size();
  const std::size_t T = m.n_ed;
  for (const auto* g : batch) check_compatible(m, *g);
  c.steps = T;
  c.batch = B;
  const auto rows = static_cast<Eigen::Index>(m.input_rows());
  c.input.resize(rows, static_cast<Eigen::Index>(T * B));
  for (std::size_t b = 0; b < B; ++b) {
    for (Eigen::Index r = 0; r < rows; ++r) {
      const auto row = batch[b]->row(static_cast<std::size_t>(r));
      for (std::size_t t = 0; t < T; ++t) c.input(r, static_cast<Eigen::Index>(t * B + b)) = row[t];
    }
  }
  run_bilstm(m.layer1, c.input, T, B, c.layer1);
  c.rectified = c.layer1.output.cwiseMax(0.0);
  run_bilstm(m.layer2, c.rectified, T, B, c.layer2);
  const auto Bi = static_cast<Eigen::Index>(B);
  if (m.readout == Readout::Last) {
    c.pooled = c.layer2.output.rightCols(Bi);
  } else {
    c.pooled = Matrix::Zero(c.layer2.output.rows(), Bi);
    for (std::size_t t = 0; t < T; ++t) c.pooled += c.layer2.output.middleCols(static_cast<Eigen::Index>(t) * Bi, Bi);
    c.pooled /= static_cast<double>(T);
  }
  Matrix logits = m.dense_W * c.pooled;
  logits.colwise() += m.dense_b;
  c.probs.resize(logits.rows(), Bi);
  for (Eigen::Index b = 0; b < Bi; ++b) {
    const Vector col = logits.col(b);
    const auto p = softmax(std::span<const double>(col.data(), static_cast<std::size_t>(col.size())));
    for (Eigen::Index k = 0; k < logits.rows(); ++k) c.probs(k, b) = p[static_cast<std::size_t>(k)];
  }
}

/// Adds d(scale * sum of per-example CE)/d(theta) into `grad`.
inline void backward_batch(const ModelParams& m, const BatchCache& c, std::span<const std::size_t> labels, double scale,
                           ModelParams& grad) {
  const auto B = static_cast<Eigen::Index>(c.batch);
  Matrix d_logits = c.probs;
  for (Eigen::Index b = 0; b < B; ++b) d_logits(static_cast<Eigen::Index>(labels[static_cast<std::size_t>(b)]), b) -= 1.0;
  d_logits *= scale;
  grad.dense_W.noalias() += d_logits * c.pooled.transpose();
  grad.dense_b += d_logits.rowwise().sum();
  const Matrix d_pooled = m.dense_W.transpose() * d_logits;

  Matrix d_out2 = Matrix::Zero(c.layer2.output.rows(), c.layer2.output.cols());
  if (m.readout == Readout::Last) {
    d_out2.rightCols(B) = d_pooled;
  } else {
    const Matrix share = d_pooled / static_cast<double>(c.steps);
    for (std::size_t t = 0; t < c.steps; ++t) d_out2.middleCols(static_cast<Eigen::Index>(t) * B, B) = share;
  }
  const auto h2 = static_cast<Eigen::Index>(m.layer2.hidden());
  Matrix d_rect = Matrix::Zero(c.rectified.rows(), c.rectified.cols());
  backprop_direction(m.layer2.forward_cell, c.rectified, c.steps, c.batch, Direction::Forward, c.layer2.fwd,
                     d_out2.topRows(h2), grad.layer2.forward_cell, &d_rect);
  backprop_direction(m.layer2.backward_cell, c.rectified, c.steps, c.batch, Direction::Backward, c.layer2.bwd,
                     d_out2.bottomRows(h2), grad.layer2.backward_cell, &d_rect);

  const Matrix d_out1 = (c.layer1.output.array() > 0.0).select(d_rect, 0.0);
  const auto h1 = static_cast<Eigen::Index>(m.layer1.hidden());
  backprop_direction(m.layer1.forward_cell, c.input, c.steps, c.batch, Direction::Forward, c.layer1.fwd,
                     d_out1.topRows(h1), grad.layer1.forward_cell, nullptr);
  backprop_direction(m.layer1.backward_cell, c.input, c.steps, c.batch, Direction::Backward, c.layer1.bwd,
                     d_out1.bottomRows(h1), grad.layer1.backward_cell, nullptr);
}

/// Examples per work unit. Fixed so the reduction order, and therefore every
/// result bit, is independent of the worker count.
inline constexpr std::size_t kChunkSize = 16;

struct GradientResult {
  ModelParams grad;
  double loss = 0.0;         // batch-mean cross entropy
  std::size_t correct = 0;   // argmax hits in the batch
};

inline std::size_t argmax_lowest(std::span<const double> p) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < p.size(); ++k) {
    if (p[k] > p[best]) best = k;
  }
  return best;
}

/// Exact gradient of the batch-mean cross entropy by backpropagation through
/// time.
inline GradientResult bptt_gradients(const ModelParams& m, std::span<const DescriptorMatrix* const> batch,
                                     std::span<const std::size_t> labels, std::size_t threads = 1) {
  if (batch.empty()) fail(ErrorCode::EmptyInput, "empty batch");
  if (labels.size() != batch.size()) fail(ErrorCode::DimensionMismatch, "one label per example required");
  const std::size_t chunks = (batch.size() + kChunkSize - 1) / kChunkSize;
  const double scale = 1.0 / static_cast<double>(batch.size());
  std::vector<ModelParams> grads(chunks);
  std::vector<double> losses(chunks, 0.0);
  std::vector<std::size_t> hits(chunks, 0);
  parallel_for(chunks, threads, [&](std::size_t k) {
    const std::size_t lo = k * kChunkSize;
    const std::size_t n = std::min(kChunkSize, batch.size() - lo);
    BatchCache cache;
    forward_batch(m, batch.subspan(lo, n), cache);
    grads[k] = zeros_like(m);
    backward_batch(m, cache, labels.subspan(lo, n), scale, grads[k]);
    for (std::size_t b = 0; b < n; ++b) {
      const auto col = cache.probs.col(static_cast<Eigen::Index>(b));
      const auto y = static_cast<Eigen::Index>(labels[lo + b]);
      losses[k] -= std::log(std::max(col(y), kLogClamp));
      if (argmax_lowest(std::span<const double>(col.data(), static_cast<std::size_t>(col.size()))) ==
          labels[lo + b]) {
        ++hits[k];
      }
    }
  });
  GradientResult r{std::move(grads[0]), losses[0], hits[0]};
  auto total = tensors(r.grad);
  for (std::size_t k = 1; k < chunks; ++k) {
    const auto part = tensors(std::as_const(grads[k]));
    for (std::size_t t = 0; t < total.size(); ++t) {
      for (std::size_t i = 0; i < total[t].size(); ++i) total[t][i] += part[t][i];
    }
    r.loss += losses[k];
    r.correct += hits[k];
  }
  r.loss *= scale;
  return r;
}

inline std::vector<std::size_t> labels_of(std::span<const DescriptorMatrix> data) {
  std::vector<std::size_t> out;
  out.reserve(data.size());
  for (const auto& g : data) {
    if (!g.label) fail(ErrorCode::UnlabeledData, "event " + std::to_string(g.event_id) + " has no label");
    out.push_back(class_index(*g.label));
  }
  return out;
}

inline std::vector<const DescriptorMatrix*> pointers_to(std::span<const DescriptorMatrix> data) {
  std::vector<const DescriptorMatrix*> out;
  out.reserve(data.size());
  for (const auto& g : data) out.push_back(&g);
  return out;
}

inline GradientResult bptt_gradients(const ModelParams& m, std::span<const DescriptorMatrix> batch,
                                     std::size_t threads = 1) {
  const auto labels = labels_of(batch);
  const auto ptrs = pointers_to(batch);
  return bptt_gradients(m, ptrs, labels, threads);
}

struct ForwardResult {
  std::array<double, kClassCount> probs{};
  BatchCache cache;
};

inline ForwardResult model_forward(const ModelParams& m, const DescriptorMatrix& g) {
  ForwardResult r;
  const DescriptorMatrix* one[] = {&g};
  forward_batch(m, one, r.cache);
  for (std::size_t k = 0; k < kClassCount; ++k) r.probs[k] = r.cache.probs(static_cast<Eigen::Index>(k), 0);
  return r;
}

struct Prediction {
  CrackClass label = CrackClass::Tensile;
  std::array<double, kClassCount> probs{};
};

inline Prediction predict(const ModelParams& m, const DescriptorMatrix& g) {
  const auto f = model_forward(m, g);
  return Prediction{class_from_index(argmax_lowest(f.probs)), f.probs};
}

/// Predictions for many events, evaluated in fixed-size chunks.
inline std::vector<Prediction> predict_all(const ModelParams& m, std::span<const DescriptorMatrix* const> events,
                                           std::size_t threads = 1) {
  std::vector<Prediction> out(events.size());
  const std::size_t chunks = (events.size() + kChunkSize - 1) / kChunkSize;
  parallel_for(chunks, threads, [&](std::size_t k) {
    const std::size_t lo = k * kChunkSize;
    const std::size_t n = std::min(kChunkSize, events.size() - lo);
    BatchCache cache;
    forward_batch(m, events.subspan(lo, n), cache);
    for (std::size_t b = 0; b < n; ++b) {
      auto& p = out[lo + b];
      for (std::size_t c = 0; c < kClassCount; ++c) {
        p.probs[c] = cache.probs(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(b));
      }
      p.label = class_from_index(argmax_lowest(p.probs));
    }
  });
  return out;
}

inline std::vector<Prediction> predict_all(const ModelParams& m, std::span<const DescriptorMatrix> events,
                                           std::size_t threads = 1) {
  const auto ptrs = pointers_to(events);
  return predict_all(m, ptrs, threads);
}

/// Mean cross entropy and accuracy of a labeled set.
struct SetScore {
  double loss = 0.0;
  double accuracy = 0.0;
};

inline SetScore score(const ModelParams& m, std::span<const DescriptorMatrix> data, std::size_t threads = 1) {
  if (data.empty()) fail(ErrorCode::EmptyDataset, "cannot score an empty set");
  const auto labels = labels_of(data);
  const auto preds = predict_all(m, data, threads);
  SetScore s;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    s.loss -= std::log(std::max(preds[i].probs[labels[i]], kLogClamp));
    hits += class_index(preds[i].label) == labels[i];
  }
  s.loss /= static_cast<double>(data.size());
  s.accuracy = static_cast<double>(hits) / static_cast<double>(data.size());
  return s;
}

// ---------------------------------------------------------------------------
// JSON model file. Matrices are nested row-major arrays.

inline constexpr int kModelVersion = 1;

nlohmann::json to_json(const ModelParams& m);

ModelParams model_from_json(const nlohmann::json& j);

void save_model(const ModelParams& m, const std::filesystem::path& path);

ModelParams load_model(const std::filesystem::path& path);

}  // namespace aecd::nn
