#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "hopqg/nn/ops.hpp"
#include "hopqg/nn/tensor.hpp"

namespace hopqg::nn {

// Named trainable tensors in registration order. Each parameter draws its
// initial values from a generator keyed by (seed, name), so adding a new
// parameter never shifts the initialization of existing ones.
class ParameterSet {
 public:
  explicit ParameterSet(std::uint64_t seed = 0) : seed_(seed) {}

  // uniform(-1/sqrt(fan_in), 1/sqrt(fan_in))
  Tensor add(const std::string& name, std::size_t rows, std::size_t cols, std::size_t fan_in);
  Tensor add_constant(const std::string& name, std::size_t rows, std::size_t cols, double value);

  std::size_t size() const { return params_.size(); }
  std::size_t scalar_count() const;
  const std::vector<std::pair<std::string, Tensor>>& items() const { return params_; }
  Tensor find(const std::string& name) const;  // throws InvalidArgument
  bool contains(const std::string& name) const;
  std::uint64_t seed() const { return seed_; }
  void zero_grad();

 private:
  std::uint64_t seed_;
  std::vector<std::pair<std::string, Tensor>> params_;
};

struct Dense {
  Dense() = default;
  Dense(ParameterSet& ps, const std::string& name, std::size_t in, std::size_t out, bool bias = true);
  Tensor operator()(const Tensor& x) const;

  Tensor weight;  // in x out
  Tensor bias;    // 1 x out, undefined when disabled
};

struct LayerNorm {
  LayerNorm() = default;
  LayerNorm(ParameterSet& ps, const std::string& name, std::size_t dim);
  Tensor operator()(const Tensor& x) const { return layer_norm_rows(x, gain, bias); }

  Tensor gain;
  Tensor bias;
};

// Row-stochastic attention matrices of one attention call, one per head.
struct AttentionMaps {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::vector<double>> heads;
};

struct MultiHeadAttention {
  MultiHeadAttention() = default;
  MultiHeadAttention(ParameterSet& ps, const std::string& name, std::size_t dim, std::size_t heads);
  // Queries from x attend over memory. An empty memory yields zeros.
  Tensor operator()(const Tensor& x, const Tensor& memory, bool causal, AttentionMaps* record = nullptr) const;

  std::size_t dim = 0;
  std::size_t heads = 1;
  Dense q, k, v, o;
};

struct FeedForward {
  FeedForward() = default;
  FeedForward(ParameterSet& ps, const std::string& name, std::size_t dim, std::size_t hidden);
  Tensor operator()(const Tensor& x) const { return out(relu(in(x))); }

  Dense in, out;
};

// Pre-norm transformer blocks.
struct EncoderBlock {
  EncoderBlock() = default;
  EncoderBlock(ParameterSet& ps, const std::string& name, std::size_t dim, std::size_t heads, std::size_t ffn);
  Tensor operator()(const Tensor& x, AttentionMaps* record = nullptr) const;

  LayerNorm ln1, ln2;
  MultiHeadAttention attn;
  FeedForward ffn;
};

struct DecoderBlock {
  DecoderBlock() = default;
  DecoderBlock(ParameterSet& ps, const std::string& name, std::size_t dim, std::size_t heads, std::size_t ffn);
  Tensor operator()(const Tensor& x, const Tensor& memory) const;

  LayerNorm ln1, ln2, ln3;
  MultiHeadAttention self_attn, cross_attn;
  FeedForward ffn;
};

// Square 0/1 adjacency over n nodes, row-major.
struct Adjacency {
  std::size_t n = 0;
  std::vector<std::uint8_t> cells;

  explicit Adjacency(std::size_t nodes = 0) : n(nodes), cells(nodes * nodes, 0) {}
  void connect(std::size_t i, std::size_t j) { cells[i * n + j] = cells[j * n + i] = 1; }
  bool operator()(std::size_t i, std::size_t j) const { return cells[i * n + j] != 0; }
  bool symmetric() const;
};

// Single-head graph attention: node i attends over itself and its
// neighbours with scores LeakyReLU(a_src.z_i + a_dst.z_j), z = xW.
struct GatLayer {
  GatLayer() = default;
  GatLayer(ParameterSet& ps, const std::string& name, std::size_t in, std::size_t out, double slope = 0.2);
  Tensor operator()(const Tensor& x, const Adjacency& adj, Tensor* attention = nullptr) const;

  Tensor weight;  // in x out
  Tensor a_src;   // out x 1
  Tensor a_dst;   // out x 1
  double slope = 0.2;
};

struct BiAttentionOutput {
  Tensor context;     // m x out
  Tensor query;       // k x out
  Tensor similarity;  // m x k
  Tensor c2q;         // m x k, rows sum to 1
};

// Similarity S_ij = w.c_i + w.q_j + (c_i * w3).q_j, symmetric when the two
// inputs coincide. The context side follows the usual bidirectional layout
// [c; c~; c*c~; c*h~]; the query side mirrors it with the transposed scores.
struct BiAttention {
  BiAttention() = default;
  BiAttention(ParameterSet& ps, const std::string& name, std::size_t dim, std::size_t out);
  BiAttentionOutput operator()(const Tensor& context, const Tensor& query) const;

  Tensor w;   // dim x 1
  Tensor w3;  // 1 x dim
  Dense context_proj;  // 4 dim -> out
  Dense query_proj;    // 3 dim -> out
};

struct LstmState {
  Tensor h;  // 1 x hidden
  Tensor c;  // 1 x hidden
};

struct Lstm {
  Lstm() = default;
  Lstm(ParameterSet& ps, const std::string& name, std::size_t in, std::size_t hidden);
  // One step built from primitive ops; gates [i, f, g, o].
  LstmState cell(const Tensor& x, const LstmState& prev) const;
  // Whole sequence from zero state using the fused kernel.
  Tensor sequence(const Tensor& inputs) const { return lstm_sequence(inputs, wx, wh, b); }

  std::size_t hidden = 0;
  Tensor wx;  // in x 4h
  Tensor wh;  // h x 4h
  Tensor b;   // 1 x 4h
};

// Rows of sinusoidal position encodings.
Tensor sinusoidal_positions(std::size_t length, std::size_t dim);

// Column of ones, handy for broadcasting a row: matmul(ones(m), row).
Tensor ones_column(std::size_t rows);

}  // namespace hopqg::nn
