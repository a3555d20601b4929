#ifndef SYNTHTS_NN_OPS_HPP
#define SYNTHTS_NN_OPS_HPP

#include <cstddef>
#include <span>
#include <vector>

#include "synthts/core/rng.hpp"
#include "synthts/nn/tensor.hpp"

namespace synthts::nn {

template <typename T>
Var<T> constant(Tensor<T> value);

template <typename T>
Var<T> parameter(Tensor<T> value);

// Reverse-mode sweep from a scalar: seeds d(root)/d(root) = 1 and runs every
// reachable backward closure in reverse topological order. Parameter
// gradients accumulate; callers zero them between steps.
template <typename T>
void backward(const Var<T>& root);

// x [B, in], weight [out, in], bias [out] -> [B, out].
template <typename T>
Var<T> linear(const Var<T>& x, const Var<T>& weight, const Var<T>& bias);

// Stride-1 "same" 1-D convolution: x [B, C, L], weight [F, C, K], bias [F]
// -> [B, F, L]. Padding is (K-1)/2 on the left and the rest on the right.
template <typename T>
Var<T> conv1d(const Var<T>& x, const Var<T>& weight, const Var<T>& bias);

// Running statistics of one batch-norm layer.
template <typename T>
struct NormStats {
  std::vector<T> mean;
  std::vector<T> var;
};

// Batch normalization over every axis but the channel axis (axis 1) of a
// [B, C] or [B, C, L] input. Training uses batch statistics and updates
// `running` with the given momentum; evaluation uses `running`.
template <typename T>
Var<T> batch_norm(const Var<T>& x, const Var<T>& gamma, const Var<T>& beta, NormStats<T>& running, bool training,
                  T momentum = T(0.1), T eps = T(1e-5));

template <typename T>
Var<T> relu(const Var<T>& x);

template <typename T>
Var<T> add(const Var<T>& a, const Var<T>& b);

template <typename T>
Var<T> scale(const Var<T>& x, T factor);

// Non-overlapping max pooling along the last axis of [B, C, L]; a trailing
// partial pool is dropped.
template <typename T>
Var<T> max_pool1d(const Var<T>& x, std::size_t pool);

// [B, C, L] -> [B, C].
template <typename T>
Var<T> global_avg_pool(const Var<T>& x);

// [B, ...] -> [B, prod(...)].
template <typename T>
Var<T> flatten(const Var<T>& x);

// Inverted dropout; identity outside training or when rate == 0.
template <typename T>
Var<T> dropout(const Var<T>& x, T rate, Rng& rng, bool training);

// LSTM over the time axis of x [B, C, S] returning the last hidden state
// [B, H]. w_input [4H, C], w_hidden [4H, H], bias [4H], gate order
// input, forget, cell, output. Zero initial state.
template <typename T>
Var<T> lstm_last(const Var<T>& x, const Var<T>& w_input, const Var<T>& w_hidden, const Var<T>& bias);

// Mean cross-entropy of softmax(logits [B, K]) against integer labels.
template <typename T>
Var<T> softmax_cross_entropy(const Var<T>& logits, std::span<const int> labels);

// Mean squared error against a constant target of the same size.
template <typename T>
Var<T> mse(const Var<T>& prediction, const Tensor<T>& target);

// Row-wise softmax of [B, K] values, no graph.
template <typename T>
Tensor<T> softmax(const Tensor<T>& logits);

}  // namespace synthts::nn

#endif  // SYNTHTS_NN_OPS_HPP
