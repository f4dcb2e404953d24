#include <cmath>

#include "doctest.h"
#include "grad_suite.hpp"
#include "hopqg/error.hpp"
#include "hopqg/nn/optim.hpp"

using namespace hopqg;
using namespace hopqg::nn;

namespace {

Tensor leaf(std::size_t r, std::size_t c, std::vector<double> v) { return Tensor({r, c}, std::move(v), true); }

// Plain triple loop, independent of the kernel under test.
std::vector<double> naive_matmul(const Tensor& a, const Tensor& b) {
  std::vector<double> out(a.rows() * b.cols(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j)
      for (std::size_t k = 0; k < a.cols(); ++k) out[i * b.cols() + j] += a(i, k) * b(k, j);
  return out;
}

}  // namespace

TEST_CASE("backward of trivial functions") {
  Tensor x = Tensor::scalar(3.0, true);
  x.backward();
  CHECK(x.grad()[0] == doctest::Approx(1.0));
  x.zero_grad();
  mul(x, x).backward();
  CHECK(x.grad()[0] == doctest::Approx(6.0));
  CHECK_THROWS_AS(Tensor::zeros(2, 1, true).backward(), NonScalarOutput);
}

TEST_CASE("leaf gradients accumulate and reused nodes sum their paths") {
  Tensor x = Tensor::scalar(2.0, true);
  Tensor y = mul(x, x);
  add(y, y).backward();
  CHECK(x.grad()[0] == doctest::Approx(8.0));
  add(y, y).backward();
  CHECK(x.grad()[0] == doctest::Approx(16.0));
}

TEST_CASE("no-grad guard records constants") {
  Tensor x = Tensor::scalar(2.0, true);
  Tensor y;
  {
    NoGradGuard guard;
    y = mul(x, x);
    CHECK_FALSE(grad_enabled());
  }
  CHECK(grad_enabled());
  CHECK_FALSE(y.requires_grad());
}

TEST_CASE("matmul matches the naive product") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Tensor a = random_tensor(3, 4, seed), b = random_tensor(4, 2, seed + 100);
    const auto ref = naive_matmul(a, b);
    Tensor c = matmul(a, b);
    for (std::size_t i = 0; i < ref.size(); ++i) CHECK(c.values()[i] == doctest::Approx(ref[i]).epsilon(1e-12));
    Tensor bt = transpose(b);
    Tensor d = matmul_nt(a, bt);
    for (std::size_t i = 0; i < ref.size(); ++i) CHECK(d.values()[i] == doctest::Approx(ref[i]).epsilon(1e-12));
  }
  CHECK_THROWS_AS(matmul(Tensor::zeros(2, 3), Tensor::zeros(2, 3)), ShapeMismatch);
}

TEST_CASE("softmax rows sum to one and respect the mask") {
  Tensor a = random_tensor(3, 4, 7, 5.0);
  Tensor p = softmax_rows(a);
  for (std::size_t r = 0; r < 3; ++r) {
    double s = 0;
    for (std::size_t c = 0; c < 4; ++c) s += p(r, c);
    CHECK(s == doctest::Approx(1.0));
  }
  std::vector<std::uint8_t> mask = {1, 0, 1, 0, 0, 0, 0, 0, 1, 1, 1, 1};
  Tensor m = softmax_rows(a, mask);
  CHECK(m(0, 1) == 0.0);
  CHECK(m(0, 0) + m(0, 2) == doctest::Approx(1.0));
  for (std::size_t c = 0; c < 4; ++c) CHECK(m(1, c) == 0.0);
  // Large logits stay finite.
  Tensor big = softmax_rows(Tensor::row({1000.0, 1000.0}));
  CHECK(big(0, 0) == doctest::Approx(0.5));
}

TEST_CASE("cross entropy of uniform logits is ln L") {
  for (std::size_t L : {2u, 8u, 31u}) {
    const std::vector<int> target = {static_cast<int>(L / 2)};
    CHECK(cross_entropy_rows(Tensor::zeros(1, L), target).item() == doctest::Approx(std::log(double(L))).epsilon(1e-12));
  }
  const std::vector<int> ignored = {-1, -1};
  CHECK(cross_entropy_rows(Tensor::zeros(2, 3), ignored).item() == 0.0);
  const std::vector<double> half = {1.0, 0.0};
  CHECK(bce_with_logits(Tensor::zeros(2, 1), half).item() == doctest::Approx(std::log(2.0)));
}

TEST_CASE("layer norm output has zero mean and unit variance") {
  Tensor x = random_tensor(4, 6, 3, 3.0);
  Tensor y = layer_norm_rows(x, Tensor::full(1, 6, 1.0), Tensor::zeros(1, 6));
  for (std::size_t r = 0; r < 4; ++r) {
    double mu = 0, var = 0;
    for (std::size_t c = 0; c < 6; ++c) mu += y(r, c) / 6;
    for (std::size_t c = 0; c < 6; ++c) var += (y(r, c) - mu) * (y(r, c) - mu) / 6;
    CHECK(mu == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(var == doctest::Approx(1.0).epsilon(1e-4));
  }
}

TEST_CASE("gradients pass central differences") {
  for (const auto& c : hopqg::testing::gradient_cases()) {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
      CAPTURE(c.name);
      CAPTURE(seed);
      const GradCheckResult r = c.run(seed);
      CHECK(r.checked > 0);
      CHECK(r.max_relative_error < 1e-3);
    }
  }
}

TEST_CASE("grad check of a linear map is essentially exact") {
  Tensor x = random_tensor(2, 3, 5);
  Tensor w = Tensor({3, 2}, {1, 2, 3, 4, 5, 6});
  const GradCheckResult r = grad_check([&] { return sum(matmul(x, w)); }, {x});
  CHECK(r.max_relative_error < 1e-8);
}

TEST_CASE("gat with a single isolated node attends to itself") {
  ParameterSet ps(3);
  GatLayer gat(ps, "gat", 3, 2);
  Tensor x = random_tensor(1, 3, 4);
  Tensor alpha;
  Tensor out = gat(x, Adjacency(1), &alpha);
  CHECK(alpha(0, 0) == doctest::Approx(1.0));
  Tensor z = matmul(x, gat.weight);
  CHECK(out(0, 0) == doctest::Approx(z(0, 0)));
  CHECK(out(0, 1) == doctest::Approx(z(0, 1)));
}

TEST_CASE("gat only attends along edges") {
  ParameterSet ps(4);
  GatLayer gat(ps, "gat", 3, 3);
  Adjacency adj(4);
  adj.connect(0, 1);
  adj.connect(2, 3);
  Tensor alpha;
  gat(random_tensor(4, 3, 9), adj, &alpha);
  for (std::size_t i = 0; i < 4; ++i) {
    double s = 0;
    for (std::size_t j = 0; j < 4; ++j) {
      if (i != j && !adj(i, j)) CHECK(alpha(i, j) == 0.0);
      s += alpha(i, j);
    }
    CHECK(s == doctest::Approx(1.0));
  }
  Adjacency bad(2);
  bad.cells[1] = 1;
  CHECK_THROWS_AS(gat(random_tensor(2, 3, 1), bad), ShapeMismatch);
}

TEST_CASE("bi-attention properties") {
  ParameterSet ps(5);
  BiAttention att(ps, "b", 4, 3);
  SUBCASE("a single query vector takes all the weight") {
    BiAttentionOutput out = att(random_tensor(5, 4, 1), random_tensor(1, 4, 2));
    for (std::size_t i = 0; i < 5; ++i) CHECK(out.c2q(i, 0) == doctest::Approx(1.0));
  }
  SUBCASE("identical inputs give a symmetric similarity") {
    Tensor c = random_tensor(4, 4, 3);
    BiAttentionOutput out = att(c, c);
    for (std::size_t i = 0; i < 4; ++i)
      for (std::size_t j = 0; j < 4; ++j) CHECK(out.similarity(i, j) == doctest::Approx(out.similarity(j, i)));
  }
  CHECK_THROWS_AS(att(random_tensor(2, 3, 1), random_tensor(2, 4, 1)), ShapeMismatch);
}

TEST_CASE("lstm cell with zero weights") {
  ParameterSet ps(1);
  Lstm lstm(ps, "l", 2, 3);
  for (Tensor t : {lstm.wx, lstm.wh, lstm.b}) std::fill(t.mutable_values().begin(), t.mutable_values().end(), 0.0);
  Tensor c0 = Tensor::row({1.0, -2.0, 0.5});
  LstmState s = lstm.cell(random_tensor(1, 2, 1), {Tensor::zeros(1, 3), c0});
  // Every gate is sigmoid(0) = 0.5 and the candidate is tanh(0) = 0.
  for (std::size_t j = 0; j < 3; ++j) {
    CHECK(s.c(0, j) == doctest::Approx(0.5 * c0(0, j)));
    CHECK(s.h(0, j) == doctest::Approx(0.5 * std::tanh(0.5 * c0(0, j))));
  }
}

TEST_CASE("fused lstm sequence equals the unrolled cell") {
  ParameterSet ps(8);
  Lstm lstm(ps, "l", 3, 4);
  Tensor x = random_tensor(5, 3, 2);
  Tensor fused = lstm.sequence(x);
  LstmState s{Tensor::zeros(1, 4), Tensor::zeros(1, 4)};
  for (std::size_t t = 0; t < 5; ++t) {
    s = lstm.cell(slice_rows(x, t, t + 1), s);
    for (std::size_t j = 0; j < 4; ++j) CHECK(fused(t, j) == doctest::Approx(s.h(0, j)).epsilon(1e-12));
  }
}

TEST_CASE("causal self-attention ignores the future") {
  ParameterSet ps(2);
  MultiHeadAttention attn(ps, "a", 4, 2);
  Tensor x = random_tensor(3, 4, 1);
  Tensor y1 = attn(x, x, true);
  std::vector<double> v(x.values().begin(), x.values().end());
  for (std::size_t j = 8; j < 12; ++j) v[j] += 1.0;
  Tensor x2({3, 4}, v);
  Tensor y2 = attn(x2, x2, true);
  for (std::size_t r = 0; r < 2; ++r)
    for (std::size_t c = 0; c < 4; ++c) CHECK(y1(r, c) == doctest::Approx(y2(r, c)));
  CHECK(attn(x, Tensor::zeros(0, 4), false).values()[0] == 0.0);
}

TEST_CASE("parameter initialisation is keyed by name") {
  ParameterSet a(11), b(11);
  Tensor wa = a.add("w", 3, 3, 3);
  b.add("other", 2, 2, 2);
  Tensor wb = b.add("w", 3, 3, 3);
  for (std::size_t i = 0; i < 9; ++i) {
    CHECK(wa.values()[i] == wb.values()[i]);
    CHECK(std::abs(wa.values()[i]) <= 1.0 / std::sqrt(3.0));
  }
  CHECK_THROWS_AS(a.add("w", 1, 1, 1), InvalidArgument);
  CHECK_THROWS_AS(a.find("missing"), InvalidArgument);
  CHECK(a.scalar_count() == 9);
}

TEST_CASE("adam") {
  SUBCASE("zero learning rate leaves parameters unchanged") {
    ParameterSet ps(1);
    Tensor w = ps.add("w", 2, 2, 2);
    const std::vector<double> before(w.values().begin(), w.values().end());
    sum(mul(w, w)).backward();
    Adam adam(ps);
    adam.step(0.0);
    CHECK(std::vector<double>(w.values().begin(), w.values().end()) == before);
  }
  SUBCASE("first step moves each coordinate by lr against its gradient sign") {
    ParameterSet ps(1);
    Tensor w = ps.add("w", 1, 3, 1);
    const std::vector<double> before(w.values().begin(), w.values().end());
    sum(mul(w, Tensor::row({1.0, -2.0, 3.0}))).backward();
    Adam adam(ps);
    const double norm = adam.step(0.1);
    CHECK(norm == doctest::Approx(std::sqrt(14.0)));
    CHECK(w.values()[0] == doctest::Approx(before[0] - 0.1).epsilon(1e-6));
    CHECK(w.values()[1] == doctest::Approx(before[1] + 0.1).epsilon(1e-6));
  }
  SUBCASE("minimises a quadratic") {
    ParameterSet ps(2);
    Tensor w = ps.add("w", 1, 2, 1);
    Adam adam(ps);
    for (int i = 0; i < 500; ++i) {
      ps.zero_grad();
      Tensor d = sub(w, Tensor::row({3.0, -1.0}));
      sum(mul(d, d)).backward();
      adam.step(0.05);
    }
    CHECK(w.values()[0] == doctest::Approx(3.0).epsilon(1e-2));
    CHECK(w.values()[1] == doctest::Approx(-1.0).epsilon(1e-2));
  }
}

TEST_CASE("warmup schedule") {
  CHECK(warmup_rate(1.0, 0, 4) == doctest::Approx(0.25));
  CHECK(warmup_rate(1.0, 3, 4) == doctest::Approx(1.0));
  CHECK(warmup_rate(1.0, 10, 4) == doctest::Approx(1.0));
  CHECK(warmup_rate(2.0, 5, 0) == doctest::Approx(2.0));
}
