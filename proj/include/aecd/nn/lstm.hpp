#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "aecd/error.hpp"

namespace aecd::nn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class Direction { Forward, Backward };

/// Gate blocks inside the stacked parameter matrices.
enum class Gate { Input = 0, Forget = 1, Output = 2, Cell = 3 };

inline constexpr std::size_t kGateCount = 4;

/// One LSTM direction. W, V and b stack the four gates (input, forget,
/// output, cell candidate) as consecutive blocks of `hidden` rows.
struct LSTMCellParams {
  Matrix W;  // 4*hidden x input
  Matrix V;  // 4*hidden x hidden
  Vector b;  // 4*hidden

  LSTMCellParams() = default;
  LSTMCellParams(std::size_t input, std::size_t hidden)
      : W(Matrix::Zero(kGateCount * hidden, input)),
        V(Matrix::Zero(kGateCount * hidden, hidden)),
        b(Vector::Zero(kGateCount * hidden)) {}

  std::size_t hidden() const { return static_cast<std::size_t>(V.cols()); }
  std::size_t input() const { return static_cast<std::size_t>(W.cols()); }

  auto gate_W(Gate g) { return W.middleRows(static_cast<Eigen::Index>(g) * V.cols(), V.cols()); }
  auto gate_V(Gate g) { return V.middleRows(static_cast<Eigen::Index>(g) * V.cols(), V.cols()); }
  auto gate_b(Gate g) { return b.segment(static_cast<Eigen::Index>(g) * V.cols(), V.cols()); }
  auto gate_W(Gate g) const { return W.middleRows(static_cast<Eigen::Index>(g) * V.cols(), V.cols()); }
  auto gate_V(Gate g) const { return V.middleRows(static_cast<Eigen::Index>(g) * V.cols(), V.cols()); }
  auto gate_b(Gate g) const { return b.segment(static_cast<Eigen::Index>(g) * V.cols(), V.cols()); }

  void validate() const {
    const auto h = V.cols();
    if (V.rows() != static_cast<Eigen::Index>(kGateCount) * h || W.rows() != V.rows() || b.size() != V.rows()) {
      fail(ErrorCode::DimensionMismatch, "LSTM parameter shapes disagree with the hidden size");
    }
    if (!W.allFinite() || !V.allFinite() || !b.allFinite()) fail(ErrorCode::InvalidArgument, "non-finite LSTM weight");
  }
};

struct BiLSTMLayer {
  LSTMCellParams forward_cell;
  LSTMCellParams backward_cell;

  BiLSTMLayer() = default;
  BiLSTMLayer(std::size_t input, std::size_t hidden) : forward_cell(input, hidden), backward_cell(input, hidden) {}

  std::size_t hidden() const { return forward_cell.hidden(); }
  std::size_t input() const { return forward_cell.input(); }
  std::size_t width() const { return 2 * hidden(); }
};

/// Activations of one direction over a batch of sequences. Matrices are
/// time-major: column t*batch + b holds step t of sequence b.
struct DirectionCache {
  Matrix gates;   // activated i, f, o, g stacked
  Matrix cell;
  Matrix cell_tanh;
  Matrix hidden;
};

struct BiLSTMCache {
  DirectionCache fwd;
  DirectionCache bwd;
  Matrix output;  // [forward; backward] hidden, width x (steps*batch)
};

namespace detail {

inline Eigen::Index step_index(Direction dir, std::size_t s, std::size_t steps) {
  return static_cast<Eigen::Index>(dir == Direction::Forward ? s : steps - 1 - s);
}

// Eigen vectorizes exp but not tanh for double.
template <typename Derived>
auto fast_tanh(const Eigen::ArrayBase<Derived>& x) {
  return 1.0 - 2.0 / ((2.0 * x).exp() + 1.0);
}

}  // namespace detail

/// Runs one direction over x (input x steps*batch), h0 = c0 = 0.
inline void run_direction(const LSTMCellParams& p, const Matrix& x, std::size_t steps, std::size_t batch,
                          Direction dir, DirectionCache& out) {
  if (static_cast<std::size_t>(x.rows()) != p.input() || static_cast<std::size_t>(x.cols()) != steps * batch) {
    fail(ErrorCode::DimensionMismatch, "LSTM input width does not match the cell");
  }
  const auto h = static_cast<Eigen::Index>(p.hidden());
  const auto B = static_cast<Eigen::Index>(batch);
  out.gates.noalias() = p.W * x;
  out.gates.colwise() += p.b;
  out.cell.resize(h, x.cols());
  out.cell_tanh.resize(h, x.cols());
  out.hidden.resize(h, x.cols());
  for (std::size_t s = 0; s < steps; ++s) {
    const auto t = detail::step_index(dir, s, steps);
    auto zt = out.gates.middleCols(t * B, B);
    if (s > 0) {
      const auto prev = detail::step_index(dir, s - 1, steps);
      zt.noalias() += p.V * out.hidden.middleCols(prev * B, B);
    }
    zt.topRows(3 * h) = (1.0 + (-zt.topRows(3 * h).array()).exp()).inverse().matrix();
    zt.bottomRows(h) = detail::fast_tanh(zt.bottomRows(h).array()).matrix();
    auto ct = out.cell.middleCols(t * B, B);
    const auto i = zt.topRows(h).array();
    const auto f = zt.middleRows(h, h).array();
    const auto o = zt.middleRows(2 * h, h).array();
    const auto g = zt.bottomRows(h).array();
    if (s > 0) {
      const auto prev = detail::step_index(dir, s - 1, steps);
      ct = (f * out.cell.middleCols(prev * B, B).array() + i * g).matrix();
    } else {
      ct = (i * g).matrix();
    }
    auto tc = out.cell_tanh.middleCols(t * B, B);
    tc = detail::fast_tanh(ct.array()).matrix();
    out.hidden.middleCols(t * B, B) = (o * tc.array()).matrix();
  }
}

/// Reverse-mode pass through one direction. Accumulates parameter gradients
/// into `grad` and, when `d_x` is given, input gradients into *d_x.
inline void backprop_direction(const LSTMCellParams& p, const Matrix& x, std::size_t steps, std::size_t batch,
                               Direction dir, const DirectionCache& cache, const Matrix& d_hidden,
                               LSTMCellParams& grad, Matrix* d_x) {
  const auto h = static_cast<Eigen::Index>(p.hidden());
  const auto B = static_cast<Eigen::Index>(batch);
  Matrix dz(4 * h, x.cols());
  Eigen::ArrayXXd dh_next = Eigen::ArrayXXd::Zero(h, B);
  Eigen::ArrayXXd dc = Eigen::ArrayXXd::Zero(h, B);
  Eigen::ArrayXXd dh(h, B);
  for (std::size_t s = steps; s-- > 0;) {
    const auto t = detail::step_index(dir, s, steps);
    const auto gt = cache.gates.middleCols(t * B, B);
    const auto i = gt.topRows(h).array();
    const auto f = gt.middleRows(h, h).array();
    const auto o = gt.middleRows(2 * h, h).array();
    const auto g = gt.bottomRows(h).array();
    const auto tc = cache.cell_tanh.middleCols(t * B, B).array();
    dh = d_hidden.middleCols(t * B, B).array() + dh_next;
    dc += dh * o * (1.0 - tc * tc);
    auto dzt = dz.middleCols(t * B, B);
    dzt.topRows(h) = (dc * g * i * (1.0 - i)).matrix();
    if (s > 0) {
      const auto prev = detail::step_index(dir, s - 1, steps);
      dzt.middleRows(h, h) = (dc * cache.cell.middleCols(prev * B, B).array() * f * (1.0 - f)).matrix();
    } else {
      dzt.middleRows(h, h).setZero();
    }
    dzt.middleRows(2 * h, h) = (dh * tc * o * (1.0 - o)).matrix();
    dzt.bottomRows(h) = (dc * i * (1.0 - g * g)).matrix();
    dc *= f;
    dh_next.matrix().noalias() = p.V.transpose() * dzt;
  }
  grad.W.noalias() += dz * x.transpose();
  grad.b += dz.rowwise().sum();
  if (steps > 1) {
    const auto span = static_cast<Eigen::Index>(steps - 1) * B;
    if (dir == Direction::Forward) {
      grad.V.noalias() += dz.rightCols(span) * cache.hidden.leftCols(span).transpose();
    } else {
      grad.V.noalias() += dz.leftCols(span) * cache.hidden.rightCols(span).transpose();
    }
  }
  if (d_x) d_x->noalias() += p.W.transpose() * dz;
}

inline void run_bilstm(const BiLSTMLayer& layer, const Matrix& x, std::size_t steps, std::size_t batch,
                       BiLSTMCache& out) {
  run_direction(layer.forward_cell, x, steps, batch, Direction::Forward, out.fwd);
  run_direction(layer.backward_cell, x, steps, batch, Direction::Backward, out.bwd);
  const auto h = static_cast<Eigen::Index>(layer.hidden());
  out.output.resize(2 * h, x.cols());
  out.output.topRows(h) = out.fwd.hidden;
  out.output.bottomRows(h) = out.bwd.hidden;
}

namespace detail {

inline Matrix to_columns(const std::vector<Vector>& seq, std::size_t width) {
  Matrix x(static_cast<Eigen::Index>(width), static_cast<Eigen::Index>(seq.size()));
  for (std::size_t t = 0; t < seq.size(); ++t) {
    if (static_cast<std::size_t>(seq[t].size()) != width) {
      fail(ErrorCode::DimensionMismatch, "input vector width does not match the cell");
    }
    x.col(static_cast<Eigen::Index>(t)) = seq[t];
  }
  return x;
}

inline std::vector<Vector> to_sequence(const Matrix& m) {
  std::vector<Vector> out;
  out.reserve(static_cast<std::size_t>(m.cols()));
  for (Eigen::Index t = 0; t < m.cols(); ++t) out.emplace_back(m.col(t));
  return out;
}

}  // namespace detail

/// Hidden states of one direction over a single sequence, in original time
/// order.
inline std::vector<Vector> lstm_forward(const LSTMCellParams& cell, const std::vector<Vector>& inputs,
                                        Direction dir = Direction::Forward) {
  if (inputs.empty()) return {};
  DirectionCache cache;
  run_direction(cell, detail::to_columns(inputs, cell.input()), inputs.size(), 1, dir, cache);
  return detail::to_sequence(cache.hidden);
}

/// Per step: forward hidden followed by backward hidden.
inline std::vector<Vector> bilstm_forward(const BiLSTMLayer& layer, const std::vector<Vector>& inputs) {
  if (inputs.empty()) return {};
  BiLSTMCache cache;
  run_bilstm(layer, detail::to_columns(inputs, layer.input()), inputs.size(), 1, cache);
  return detail::to_sequence(cache.output);
}

}  // namespace aecd::nn
