#include "hopqg/nn/layers.hpp"

#include <cmath>

#include "hopqg/error.hpp"
#include "hopqg/rng.hpp"

namespace hopqg::nn {

Tensor ParameterSet::add(const std::string& name, std::size_t rows, std::size_t cols, std::size_t fan_in) {
  if (contains(name)) throw InvalidArgument("duplicate parameter name: " + name);
  Rng rng(derive_seed(seed_, name));
  const double r = 1.0 / std::sqrt(static_cast<double>(fan_in == 0 ? 1 : fan_in));
  std::vector<double> v(rows * cols);
  for (double& x : v) x = rng.uniform(-r, r);
  Tensor t({rows, cols}, std::move(v), true);
  params_.emplace_back(name, t);
  return t;
}

Tensor ParameterSet::add_constant(const std::string& name, std::size_t rows, std::size_t cols, double value) {
  if (contains(name)) throw InvalidArgument("duplicate parameter name: " + name);
  Tensor t = Tensor::full(rows, cols, value, true);
  params_.emplace_back(name, t);
  return t;
}

std::size_t ParameterSet::scalar_count() const {
  std::size_t n = 0;
  for (const auto& [name, t] : params_) n += t.size();
  return n;
}

Tensor ParameterSet::find(const std::string& name) const {
  for (const auto& [n, t] : params_) {
    if (n == name) return t;
  }
  throw InvalidArgument("unknown parameter: " + name);
}

bool ParameterSet::contains(const std::string& name) const {
  for (const auto& [n, t] : params_) {
    if (n == name) return true;
  }
  return false;
}

void ParameterSet::zero_grad() {
  for (auto& [n, t] : params_) t.zero_grad();
}

Dense::Dense(ParameterSet& ps, const std::string& name, std::size_t in, std::size_t out, bool with_bias)
    : weight(ps.add(name + ".w", in, out, in)) {
  if (with_bias) bias = ps.add(name + ".b", 1, out, in);
}

Tensor Dense::operator()(const Tensor& x) const {
  Tensor y = matmul(x, weight);
  return bias.defined() ? add_row(y, bias) : y;
}

LayerNorm::LayerNorm(ParameterSet& ps, const std::string& name, std::size_t dim)
    : gain(ps.add_constant(name + ".gain", 1, dim, 1.0)), bias(ps.add_constant(name + ".bias", 1, dim, 0.0)) {}

MultiHeadAttention::MultiHeadAttention(ParameterSet& ps, const std::string& name, std::size_t d, std::size_t h)
    : dim(d),
      heads(h),
      q(ps, name + ".q", d, d),
      k(ps, name + ".k", d, d),
      v(ps, name + ".v", d, d),
      o(ps, name + ".o", d, d) {
  if (h == 0 || d % h != 0) throw InvalidArgument("attention heads must divide the model dimension");
}

Tensor MultiHeadAttention::operator()(const Tensor& x, const Tensor& memory, bool causal, AttentionMaps* record) const {
  if (x.cols() != dim || memory.cols() != dim) throw ShapeMismatch("attention: input width differs from model dimension");
  const std::size_t m = x.rows(), n = memory.rows();
  if (record) {
    record->rows = m;
    record->cols = n;
    record->heads.clear();
  }
  if (n == 0) return Tensor::zeros(m, dim);
  const Tensor Q = q(x), K = k(memory), V = v(memory);
  const std::size_t dh = dim / heads;
  const double inv = 1.0 / std::sqrt(static_cast<double>(dh));
  std::vector<std::uint8_t> mask;
  if (causal) {
    mask.assign(m * n, 0);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j <= i && j < n; ++j) mask[i * n + j] = 1;
  }
  std::vector<Tensor> outs;
  outs.reserve(heads);
  for (std::size_t h = 0; h < heads; ++h) {
    const std::size_t b = h * dh, e = b + dh;
    Tensor Qh = heads == 1 ? Q : slice_cols(Q, b, e);
    Tensor Kh = heads == 1 ? K : slice_cols(K, b, e);
    Tensor Vh = heads == 1 ? V : slice_cols(V, b, e);
    Tensor scores = scale(matmul_nt(Qh, Kh), inv);
    Tensor probs = causal ? softmax_rows(scores, mask) : softmax_rows(scores);
    if (record) record->heads.emplace_back(probs.values().begin(), probs.values().end());
    outs.push_back(matmul(probs, Vh));
  }
  return o(heads == 1 ? outs[0] : concat_cols(outs));
}

FeedForward::FeedForward(ParameterSet& ps, const std::string& name, std::size_t dim, std::size_t hidden)
    : in(ps, name + ".in", dim, hidden), out(ps, name + ".out", hidden, dim) {}

EncoderBlock::EncoderBlock(ParameterSet& ps, const std::string& name, std::size_t dim, std::size_t heads,
                           std::size_t ffn_dim)
    : ln1(ps, name + ".ln1", dim),
      ln2(ps, name + ".ln2", dim),
      attn(ps, name + ".attn", dim, heads),
      ffn(ps, name + ".ffn", dim, ffn_dim) {}

Tensor EncoderBlock::operator()(const Tensor& x, AttentionMaps* record) const {
  Tensor n1 = ln1(x);
  Tensor y = add(x, attn(n1, n1, false, record));
  return add(y, ffn(ln2(y)));
}

DecoderBlock::DecoderBlock(ParameterSet& ps, const std::string& name, std::size_t dim, std::size_t heads,
                           std::size_t ffn_dim)
    : ln1(ps, name + ".ln1", dim),
      ln2(ps, name + ".ln2", dim),
      ln3(ps, name + ".ln3", dim),
      self_attn(ps, name + ".self", dim, heads),
      cross_attn(ps, name + ".cross", dim, heads),
      ffn(ps, name + ".ffn", dim, ffn_dim) {}

Tensor DecoderBlock::operator()(const Tensor& x, const Tensor& memory) const {
  Tensor n1 = ln1(x);
  Tensor y = add(x, self_attn(n1, n1, true));
  y = add(y, cross_attn(ln2(y), memory, false));
  return add(y, ffn(ln3(y)));
}

bool Adjacency::symmetric() const {
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (cells[i * n + j] != cells[j * n + i]) return false;
  return true;
}

GatLayer::GatLayer(ParameterSet& ps, const std::string& name, std::size_t in, std::size_t out, double s)
    : weight(ps.add(name + ".w", in, out, in)),
      a_src(ps.add(name + ".a_src", out, 1, out)),
      a_dst(ps.add(name + ".a_dst", out, 1, out)),
      slope(s) {}

Tensor GatLayer::operator()(const Tensor& x, const Adjacency& adj, Tensor* attention) const {
  if (x.rows() != adj.n) throw ShapeMismatch("gat: node count differs from adjacency size");
  if (x.cols() != weight.rows()) throw ShapeMismatch("gat: feature width differs from weight rows");
  if (!adj.symmetric()) throw ShapeMismatch("gat: adjacency is not symmetric");
  const std::size_t n = adj.n;
  if (n == 0) return Tensor::zeros(0, weight.cols());
  Tensor z = matmul(x, weight);
  Tensor scores = leaky_relu(outer_add(matmul(z, a_src), transpose(matmul(z, a_dst))), slope);
  std::vector<std::uint8_t> mask(adj.cells);
  for (std::size_t i = 0; i < n; ++i) mask[i * n + i] = 1;
  Tensor alpha = softmax_rows(scores, mask);
  if (attention) *attention = alpha;
  return matmul(alpha, z);
}

BiAttention::BiAttention(ParameterSet& ps, const std::string& name, std::size_t dim, std::size_t out)
    : w(ps.add(name + ".w", dim, 1, dim)),
      w3(ps.add(name + ".w3", 1, dim, dim)),
      context_proj(ps, name + ".cproj", 4 * dim, out),
      query_proj(ps, name + ".qproj", 3 * dim, out) {}

BiAttentionOutput BiAttention::operator()(const Tensor& c, const Tensor& q) const {
  if (c.cols() != w.rows() || q.cols() != w.rows()) throw ShapeMismatch("bi-attention: input width differs");
  if (c.rows() == 0 || q.rows() == 0) throw ShapeMismatch("bi-attention: empty input");
  const std::size_t m = c.rows();
  Tensor cross = matmul_nt(mul(c, matmul(ones_column(m), w3)), q);
  Tensor S = add(outer_add(matmul(c, w), transpose(matmul(q, w))), cross);
  Tensor A = softmax_rows(S);
  Tensor c_att = matmul(A, q);
  Tensor b = softmax_rows(max_rows(transpose(S)));
  Tensor h_att = matmul(ones_column(m), matmul(b, c));
  Tensor fused_c = context_proj(concat_cols({c, c_att, mul(c, c_att), mul(c, h_att)}));
  Tensor q_att = matmul(softmax_rows(transpose(S)), c);
  Tensor fused_q = query_proj(concat_cols({q, q_att, mul(q, q_att)}));
  return {fused_c, fused_q, S, A};
}

Lstm::Lstm(ParameterSet& ps, const std::string& name, std::size_t in, std::size_t h)
    : hidden(h),
      wx(ps.add(name + ".wx", in, 4 * h, in)),
      wh(ps.add(name + ".wh", h, 4 * h, h)),
      b(ps.add(name + ".b", 1, 4 * h, h)) {}

LstmState Lstm::cell(const Tensor& x, const LstmState& prev) const {
  if (x.rows() != 1 || x.cols() != wx.rows()) throw ShapeMismatch("lstm: input must be 1 x in");
  if (prev.h.rows() != 1 || prev.h.cols() != hidden || prev.c.shape() != prev.h.shape())
    throw ShapeMismatch("lstm: state must be 1 x hidden");
  Tensor z = add_row(add(matmul(x, wx), matmul(prev.h, wh)), b);
  const std::size_t h = hidden;
  Tensor i = sigmoid(slice_cols(z, 0, h));
  Tensor f = sigmoid(slice_cols(z, h, 2 * h));
  Tensor g = tanh(slice_cols(z, 2 * h, 3 * h));
  Tensor o = sigmoid(slice_cols(z, 3 * h, 4 * h));
  Tensor c = add(mul(f, prev.c), mul(i, g));
  return {mul(o, tanh(c)), c};
}

Tensor sinusoidal_positions(std::size_t length, std::size_t dim) {
  std::vector<double> v(length * dim);
  for (std::size_t p = 0; p < length; ++p) {
    for (std::size_t i = 0; i < dim; ++i) {
      const double rate = std::pow(10000.0, -static_cast<double>(i - i % 2) / static_cast<double>(dim));
      const double a = static_cast<double>(p) * rate;
      v[p * dim + i] = i % 2 == 0 ? std::sin(a) : std::cos(a);
    }
  }
  return Tensor({length, dim}, std::move(v));
}

Tensor ones_column(std::size_t rows) { return Tensor::full(rows, 1, 1.0); }

}  // namespace hopqg::nn
