#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "hopqg/nn/tensor.hpp"

namespace hopqg::nn {

// Shape errors raise hopqg::ShapeMismatch.

Tensor matmul(const Tensor& a, const Tensor& b);     // (m x k)(k x n)
Tensor matmul_nt(const Tensor& a, const Tensor& b);  // (m x k)(n x k)^T
Tensor transpose(const Tensor& a);

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);  // elementwise
Tensor scale(const Tensor& a, double factor);
Tensor add_row(const Tensor& a, const Tensor& row);       // a (m x n) + row (1 x n) per row
Tensor mul_rows(const Tensor& a, const Tensor& weights);  // row i of a times weights(i, 0)
Tensor outer_add(const Tensor& col, const Tensor& row);   // (m x 1) + (1 x n) -> m x n

Tensor tanh(const Tensor& a);
Tensor sigmoid(const Tensor& a);
Tensor relu(const Tensor& a);
Tensor leaky_relu(const Tensor& a, double slope);
Tensor exp(const Tensor& a);
Tensor log(const Tensor& a);

// Row-wise softmax. With a mask (row-major, same shape), entries marked 0 get
// probability exactly 0; a row with no admissible entry becomes all zeros.
Tensor softmax_rows(const Tensor& a);
Tensor softmax_rows(const Tensor& a, const std::vector<std::uint8_t>& mask);
Tensor log_softmax_rows(const Tensor& a);

Tensor concat_cols(const std::vector<Tensor>& parts);
Tensor concat_rows(const std::vector<Tensor>& parts);
Tensor slice_rows(const Tensor& a, std::size_t begin, std::size_t end);
Tensor slice_cols(const Tensor& a, std::size_t begin, std::size_t end);
Tensor gather_rows(const Tensor& table, std::span<const int> ids);

Tensor sum(const Tensor& a);         // 1 x 1
Tensor mean(const Tensor& a);        // 1 x 1
Tensor mean_rows(const Tensor& a);   // 1 x n column means
Tensor max_rows(const Tensor& a);    // 1 x n column maxima (gradient to first argmax)
// Mean of each half-open row range of a; result is ranges.size() x cols.
Tensor mean_row_ranges(const Tensor& a, const std::vector<std::pair<std::size_t, std::size_t>>& ranges);

Tensor layer_norm_rows(const Tensor& a, const Tensor& gain, const Tensor& bias, double eps = 1e-5);

// Mean negative log-likelihood of target[r] under softmax(logits row r).
// Rows whose target is negative are ignored; all-ignored yields 0.
Tensor cross_entropy_rows(const Tensor& logits, std::span<const int> targets);
// Mean binary cross-entropy of sigmoid(logits) against targets in [0, 1].
Tensor bce_with_logits(const Tensor& logits, std::span<const double> targets);

// Runs an LSTM over the rows of inputs (L x in), starting from zero state,
// with gates ordered [input, forget, cell, output]:
//   weights_x: in x 4h, weights_h: h x 4h, bias: 1 x 4h. Returns L x h.
Tensor lstm_sequence(const Tensor& inputs, const Tensor& weights_x, const Tensor& weights_h, const Tensor& bias);

}  // namespace hopqg::nn
