#include "hopqg/nn/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "hopqg/error.hpp"

namespace hopqg::nn {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw ShapeMismatch(what);
}

// Gradient buffer of parent i, or nullptr when that parent is constant.
double* grad_of(Node& self, std::size_t i) {
  Node& p = *self.parents[i];
  return p.requires_grad ? p.grad.data() : nullptr;
}

const double* value_of(Node& self, std::size_t i) { return self.parents[i]->value.data(); }

template <typename F, typename D>
Tensor unary(const Tensor& a, F f, D df_from_xy) {
  std::vector<double> y(a.size());
  const auto x = a.values();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = f(x[i]);
  return Tensor::make(a.shape(), std::move(y), {a}, [df_from_xy](Node& self) {
    double* g = grad_of(self, 0);
    if (!g) return;
    const double* x = value_of(self, 0);
    for (std::size_t i = 0; i < self.value.size(); ++i) g[i] += self.grad[i] * df_from_xy(x[i], self.value[i]);
  });
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  require(a.cols() == b.rows(), "matmul: inner dimensions differ");
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  std::vector<double> c(m * n, 0.0);
  const double* A = a.values().data();
  const double* B = b.values().data();
  for (std::size_t i = 0; i < m; ++i) {
    double* ci = c.data() + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = A[i * k + p];
      if (av == 0.0) continue;
      const double* bp = B + p * n;
      for (std::size_t j = 0; j < n; ++j) ci[j] += av * bp[j];
    }
  }
  return Tensor::make({m, n}, std::move(c), {a, b}, [m, k, n](Node& self) {
    const double* A = value_of(self, 0);
    const double* B = value_of(self, 1);
    const double* G = self.grad.data();
    if (double* gA = grad_of(self, 0)) {
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t p = 0; p < k; ++p) {
          double s = 0.0;
          const double* bp = B + p * n;
          const double* gi = G + i * n;
          for (std::size_t j = 0; j < n; ++j) s += gi[j] * bp[j];
          gA[i * k + p] += s;
        }
      }
    }
    if (double* gB = grad_of(self, 1)) {
      for (std::size_t i = 0; i < m; ++i) {
        const double* gi = G + i * n;
        for (std::size_t p = 0; p < k; ++p) {
          const double av = A[i * k + p];
          if (av == 0.0) continue;
          double* gbp = gB + p * n;
          for (std::size_t j = 0; j < n; ++j) gbp[j] += av * gi[j];
        }
      }
    }
  });
}

Tensor matmul_nt(const Tensor& a, const Tensor& b) {
  require(a.cols() == b.cols(), "matmul_nt: inner dimensions differ");
  const std::size_t m = a.rows(), k = a.cols(), n = b.rows();
  std::vector<double> c(m * n, 0.0);
  const double* A = a.values().data();
  const double* B = b.values().data();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t p = 0; p < k; ++p) s += A[i * k + p] * B[j * k + p];
      c[i * n + j] = s;
    }
  }
  return Tensor::make({m, n}, std::move(c), {a, b}, [m, k, n](Node& self) {
    const double* A = value_of(self, 0);
    const double* B = value_of(self, 1);
    const double* G = self.grad.data();
    double* gA = grad_of(self, 0);
    double* gB = grad_of(self, 1);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        const double g = G[i * n + j];
        if (g == 0.0) continue;
        if (gA) {
          for (std::size_t p = 0; p < k; ++p) gA[i * k + p] += g * B[j * k + p];
        }
        if (gB) {
          for (std::size_t p = 0; p < k; ++p) gB[j * k + p] += g * A[i * k + p];
        }
      }
    }
  });
}

Tensor transpose(const Tensor& a) {
  const std::size_t m = a.rows(), n = a.cols();
  std::vector<double> y(m * n);
  const auto x = a.values();
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) y[j * m + i] = x[i * n + j];
  return Tensor::make({n, m}, std::move(y), {a}, [m, n](Node& self) {
    double* g = grad_of(self, 0);
    if (!g) return;
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) g[i * n + j] += self.grad[j * m + i];
  });
}

Tensor add(const Tensor& a, const Tensor& b) {
  require(a.shape() == b.shape(), "add: shapes differ");
  std::vector<double> y(a.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = a.values()[i] + b.values()[i];
  return Tensor::make(a.shape(), std::move(y), {a, b}, [](Node& self) {
    for (std::size_t p = 0; p < 2; ++p) {
      if (double* g = grad_of(self, p)) {
        for (std::size_t i = 0; i < self.grad.size(); ++i) g[i] += self.grad[i];
      }
    }
  });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require(a.shape() == b.shape(), "sub: shapes differ");
  std::vector<double> y(a.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = a.values()[i] - b.values()[i];
  return Tensor::make(a.shape(), std::move(y), {a, b}, [](Node& self) {
    if (double* g = grad_of(self, 0)) {
      for (std::size_t i = 0; i < self.grad.size(); ++i) g[i] += self.grad[i];
    }
    if (double* g = grad_of(self, 1)) {
      for (std::size_t i = 0; i < self.grad.size(); ++i) g[i] -= self.grad[i];
    }
  });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require(a.shape() == b.shape(), "mul: shapes differ");
  std::vector<double> y(a.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = a.values()[i] * b.values()[i];
  return Tensor::make(a.shape(), std::move(y), {a, b}, [](Node& self) {
    const double* A = value_of(self, 0);
    const double* B = value_of(self, 1);
    if (double* g = grad_of(self, 0)) {
      for (std::size_t i = 0; i < self.grad.size(); ++i) g[i] += self.grad[i] * B[i];
    }
    if (double* g = grad_of(self, 1)) {
      for (std::size_t i = 0; i < self.grad.size(); ++i) g[i] += self.grad[i] * A[i];
    }
  });
}

Tensor scale(const Tensor& a, double factor) {
  std::vector<double> y(a.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = a.values()[i] * factor;
  return Tensor::make(a.shape(), std::move(y), {a}, [factor](Node& self) {
    if (double* g = grad_of(self, 0)) {
      for (std::size_t i = 0; i < self.grad.size(); ++i) g[i] += self.grad[i] * factor;
    }
  });
}

Tensor add_row(const Tensor& a, const Tensor& row) {
  require(row.rows() == 1 && row.cols() == a.cols(), "add_row: row must be 1 x cols");
  const std::size_t m = a.rows(), n = a.cols();
  std::vector<double> y(a.values().begin(), a.values().end());
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) y[i * n + j] += row.values()[j];
  return Tensor::make(a.shape(), std::move(y), {a, row}, [m, n](Node& self) {
    if (double* g = grad_of(self, 0)) {
      for (std::size_t i = 0; i < m * n; ++i) g[i] += self.grad[i];
    }
    if (double* g = grad_of(self, 1)) {
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) g[j] += self.grad[i * n + j];
    }
  });
}

Tensor mul_rows(const Tensor& a, const Tensor& weights) {
  require(weights.cols() == 1 && weights.rows() == a.rows(), "mul_rows: weights must be rows x 1");
  const std::size_t m = a.rows(), n = a.cols();
  std::vector<double> y(m * n);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) y[i * n + j] = a.values()[i * n + j] * weights.values()[i];
  return Tensor::make(a.shape(), std::move(y), {a, weights}, [m, n](Node& self) {
    const double* A = value_of(self, 0);
    const double* W = value_of(self, 1);
    if (double* g = grad_of(self, 0)) {
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) g[i * n + j] += self.grad[i * n + j] * W[i];
    }
    if (double* g = grad_of(self, 1)) {
      for (std::size_t i = 0; i < m; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) s += self.grad[i * n + j] * A[i * n + j];
        g[i] += s;
      }
    }
  });
}

Tensor outer_add(const Tensor& col, const Tensor& row) {
  require(col.cols() == 1 && row.rows() == 1, "outer_add: expects (m x 1) and (1 x n)");
  const std::size_t m = col.rows(), n = row.cols();
  std::vector<double> y(m * n);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) y[i * n + j] = col.values()[i] + row.values()[j];
  return Tensor::make({m, n}, std::move(y), {col, row}, [m, n](Node& self) {
    double* gc = grad_of(self, 0);
    double* gr = grad_of(self, 1);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        const double g = self.grad[i * n + j];
        if (gc) gc[i] += g;
        if (gr) gr[j] += g;
      }
  });
}

Tensor tanh(const Tensor& a) {
  return unary(a, [](double x) { return std::tanh(x); }, [](double, double y) { return 1.0 - y * y; });
}

Tensor sigmoid(const Tensor& a) {
  return unary(
      a, [](double x) { return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x)); },
      [](double, double y) { return y * (1.0 - y); });
}

Tensor relu(const Tensor& a) {
  return unary(a, [](double x) { return x > 0 ? x : 0.0; }, [](double x, double) { return x > 0 ? 1.0 : 0.0; });
}

Tensor leaky_relu(const Tensor& a, double slope) {
  return unary(
      a, [slope](double x) { return x > 0 ? x : slope * x; },
      [slope](double x, double) { return x > 0 ? 1.0 : slope; });
}

Tensor exp(const Tensor& a) {
  return unary(a, [](double x) { return std::exp(x); }, [](double, double y) { return y; });
}

Tensor log(const Tensor& a) {
  return unary(a, [](double x) { return std::log(x); }, [](double x, double) { return 1.0 / x; });
}

namespace {

Tensor softmax_impl(const Tensor& a, const std::vector<std::uint8_t>* mask) {
  const std::size_t m = a.rows(), n = a.cols();
  std::vector<double> y(m * n, 0.0);
  const auto x = a.values();
  for (std::size_t i = 0; i < m; ++i) {
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
      if (!mask || (*mask)[i * n + j]) mx = std::max(mx, x[i * n + j]);
    }
    if (mx == -std::numeric_limits<double>::infinity()) continue;
    double z = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (!mask || (*mask)[i * n + j]) {
        y[i * n + j] = std::exp(x[i * n + j] - mx);
        z += y[i * n + j];
      }
    }
    for (std::size_t j = 0; j < n; ++j) y[i * n + j] /= z;
  }
  return Tensor::make(a.shape(), std::move(y), {a}, [m, n](Node& self) {
    double* g = grad_of(self, 0);
    if (!g) return;
    const double* Y = self.value.data();
    const double* G = self.grad.data();
    for (std::size_t i = 0; i < m; ++i) {
      double dot = 0.0;
      for (std::size_t j = 0; j < n; ++j) dot += Y[i * n + j] * G[i * n + j];
      for (std::size_t j = 0; j < n; ++j) g[i * n + j] += Y[i * n + j] * (G[i * n + j] - dot);
    }
  });
}

}  // namespace

Tensor softmax_rows(const Tensor& a) { return softmax_impl(a, nullptr); }

Tensor softmax_rows(const Tensor& a, const std::vector<std::uint8_t>& mask) {
  require(mask.size() == a.size(), "softmax_rows: mask shape differs");
  return softmax_impl(a, &mask);
}

Tensor log_softmax_rows(const Tensor& a) {
  const std::size_t m = a.rows(), n = a.cols();
  std::vector<double> y(m * n);
  const auto x = a.values();
  for (std::size_t i = 0; i < m; ++i) {
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) mx = std::max(mx, x[i * n + j]);
    double z = 0.0;
    for (std::size_t j = 0; j < n; ++j) z += std::exp(x[i * n + j] - mx);
    const double lse = mx + std::log(z);
    for (std::size_t j = 0; j < n; ++j) y[i * n + j] = x[i * n + j] - lse;
  }
  return Tensor::make(a.shape(), std::move(y), {a}, [m, n](Node& self) {
    double* g = grad_of(self, 0);
    if (!g) return;
    for (std::size_t i = 0; i < m; ++i) {
      double total = 0.0;
      for (std::size_t j = 0; j < n; ++j) total += self.grad[i * n + j];
      for (std::size_t j = 0; j < n; ++j) {
        g[i * n + j] += self.grad[i * n + j] - std::exp(self.value[i * n + j]) * total;
      }
    }
  });
}

Tensor concat_cols(const std::vector<Tensor>& parts) {
  require(!parts.empty(), "concat_cols: no inputs");
  const std::size_t m = parts[0].rows();
  std::vector<std::size_t> widths;
  std::size_t n = 0;
  for (const auto& p : parts) {
    require(p.rows() == m, "concat_cols: row counts differ");
    widths.push_back(p.cols());
    n += p.cols();
  }
  std::vector<double> y(m * n);
  std::size_t off = 0;
  for (const auto& p : parts) {
    const std::size_t w = p.cols();
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < w; ++j) y[i * n + off + j] = p.values()[i * w + j];
    off += w;
  }
  return Tensor::make({m, n}, std::move(y), parts, [m, n, widths](Node& self) {
    std::size_t off = 0;
    for (std::size_t p = 0; p < widths.size(); ++p) {
      const std::size_t w = widths[p];
      if (double* g = grad_of(self, p)) {
        for (std::size_t i = 0; i < m; ++i)
          for (std::size_t j = 0; j < w; ++j) g[i * w + j] += self.grad[i * n + off + j];
      }
      off += w;
    }
  });
}

Tensor concat_rows(const std::vector<Tensor>& parts) {
  require(!parts.empty(), "concat_rows: no inputs");
  const std::size_t n = parts[0].cols();
  std::vector<std::size_t> sizes;
  std::size_t m = 0;
  for (const auto& p : parts) {
    require(p.cols() == n, "concat_rows: column counts differ");
    sizes.push_back(p.size());
    m += p.rows();
  }
  std::vector<double> y;
  y.reserve(m * n);
  for (const auto& p : parts) y.insert(y.end(), p.values().begin(), p.values().end());
  return Tensor::make({m, n}, std::move(y), parts, [sizes](Node& self) {
    std::size_t off = 0;
    for (std::size_t p = 0; p < sizes.size(); ++p) {
      if (double* g = grad_of(self, p)) {
        for (std::size_t i = 0; i < sizes[p]; ++i) g[i] += self.grad[off + i];
      }
      off += sizes[p];
    }
  });
}

Tensor slice_rows(const Tensor& a, std::size_t begin, std::size_t end) {
  require(begin <= end && end <= a.rows(), "slice_rows: range out of bounds");
  const std::size_t n = a.cols();
  std::vector<double> y(a.values().begin() + static_cast<long>(begin * n),
                        a.values().begin() + static_cast<long>(end * n));
  return Tensor::make({end - begin, n}, std::move(y), {a}, [begin, n](Node& self) {
    if (double* g = grad_of(self, 0)) {
      for (std::size_t i = 0; i < self.grad.size(); ++i) g[begin * n + i] += self.grad[i];
    }
  });
}

Tensor slice_cols(const Tensor& a, std::size_t begin, std::size_t end) {
  require(begin <= end && end <= a.cols(), "slice_cols: range out of bounds");
  const std::size_t m = a.rows(), n = a.cols(), w = end - begin;
  std::vector<double> y(m * w);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < w; ++j) y[i * w + j] = a.values()[i * n + begin + j];
  return Tensor::make({m, w}, std::move(y), {a}, [m, n, w, begin](Node& self) {
    if (double* g = grad_of(self, 0)) {
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < w; ++j) g[i * n + begin + j] += self.grad[i * w + j];
    }
  });
}

Tensor gather_rows(const Tensor& table, std::span<const int> ids) {
  const std::size_t n = table.cols();
  std::vector<double> y(ids.size() * n);
  std::vector<int> idx(ids.begin(), ids.end());
  for (std::size_t r = 0; r < idx.size(); ++r) {
    require(idx[r] >= 0 && static_cast<std::size_t>(idx[r]) < table.rows(), "gather_rows: id out of range");
    std::copy_n(table.values().begin() + static_cast<long>(idx[r]) * static_cast<long>(n), n, y.begin() + static_cast<long>(r * n));
  }
  return Tensor::make({idx.size(), n}, std::move(y), {table}, [n, idx](Node& self) {
    double* g = grad_of(self, 0);
    if (!g) return;
    for (std::size_t r = 0; r < idx.size(); ++r)
      for (std::size_t j = 0; j < n; ++j) g[static_cast<std::size_t>(idx[r]) * n + j] += self.grad[r * n + j];
  });
}

Tensor sum(const Tensor& a) {
  double s = 0.0;
  for (double v : a.values()) s += v;
  return Tensor::make({1, 1}, {s}, {a}, [](Node& self) {
    if (double* g = grad_of(self, 0)) {
      for (std::size_t i = 0; i < self.parents[0]->value.size(); ++i) g[i] += self.grad[0];
    }
  });
}

Tensor mean(const Tensor& a) {
  require(a.size() > 0, "mean: empty tensor");
  return scale(sum(a), 1.0 / static_cast<double>(a.size()));
}

Tensor mean_rows(const Tensor& a) {
  return mean_row_ranges(a, {{0, a.rows()}});
}

Tensor max_rows(const Tensor& a) {
  require(a.rows() > 0, "max_rows: no rows");
  const std::size_t m = a.rows(), n = a.cols();
  std::vector<double> y(n);
  std::vector<std::size_t> arg(n, 0);
  for (std::size_t j = 0; j < n; ++j) {
    y[j] = a.values()[j];
    for (std::size_t i = 1; i < m; ++i) {
      if (a.values()[i * n + j] > y[j]) {
        y[j] = a.values()[i * n + j];
        arg[j] = i;
      }
    }
  }
  return Tensor::make({1, n}, std::move(y), {a}, [n, arg](Node& self) {
    if (double* g = grad_of(self, 0)) {
      for (std::size_t j = 0; j < n; ++j) g[arg[j] * n + j] += self.grad[j];
    }
  });
}

Tensor mean_row_ranges(const Tensor& a, const std::vector<std::pair<std::size_t, std::size_t>>& ranges) {
  const std::size_t n = a.cols();
  std::vector<double> y(ranges.size() * n, 0.0);
  for (std::size_t r = 0; r < ranges.size(); ++r) {
    auto [b, e] = ranges[r];
    require(b < e && e <= a.rows(), "mean_row_ranges: empty or out-of-bounds range");
    const double inv = 1.0 / static_cast<double>(e - b);
    for (std::size_t i = b; i < e; ++i)
      for (std::size_t j = 0; j < n; ++j) y[r * n + j] += a.values()[i * n + j] * inv;
  }
  return Tensor::make({ranges.size(), n}, std::move(y), {a}, [n, ranges](Node& self) {
    double* g = grad_of(self, 0);
    if (!g) return;
    for (std::size_t r = 0; r < ranges.size(); ++r) {
      auto [b, e] = ranges[r];
      const double inv = 1.0 / static_cast<double>(e - b);
      for (std::size_t i = b; i < e; ++i)
        for (std::size_t j = 0; j < n; ++j) g[i * n + j] += self.grad[r * n + j] * inv;
    }
  });
}

Tensor layer_norm_rows(const Tensor& a, const Tensor& gain, const Tensor& bias, double eps) {
  const std::size_t m = a.rows(), n = a.cols();
  require(gain.rows() == 1 && gain.cols() == n && bias.shape() == gain.shape(), "layer_norm_rows: gain/bias must be 1 x cols");
  std::vector<double> y(m * n), xhat(m * n), inv_std(m);
  const auto x = a.values();
  for (std::size_t i = 0; i < m; ++i) {
    double mu = 0.0;
    for (std::size_t j = 0; j < n; ++j) mu += x[i * n + j];
    mu /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t j = 0; j < n; ++j) var += (x[i * n + j] - mu) * (x[i * n + j] - mu);
    var /= static_cast<double>(n);
    inv_std[i] = 1.0 / std::sqrt(var + eps);
    for (std::size_t j = 0; j < n; ++j) {
      xhat[i * n + j] = (x[i * n + j] - mu) * inv_std[i];
      y[i * n + j] = xhat[i * n + j] * gain.values()[j] + bias.values()[j];
    }
  }
  return Tensor::make(a.shape(), std::move(y), {a, gain, bias}, [m, n, xhat, inv_std](Node& self) {
    const double* G = self.grad.data();
    const double* gam = value_of(self, 1);
    if (double* gx = grad_of(self, 0)) {
      std::vector<double> dxhat(n);
      for (std::size_t i = 0; i < m; ++i) {
        double mean_d = 0.0, mean_dx = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
          dxhat[j] = G[i * n + j] * gam[j];
          mean_d += dxhat[j];
          mean_dx += dxhat[j] * xhat[i * n + j];
        }
        mean_d /= static_cast<double>(n);
        mean_dx /= static_cast<double>(n);
        for (std::size_t j = 0; j < n; ++j) {
          gx[i * n + j] += inv_std[i] * (dxhat[j] - mean_d - xhat[i * n + j] * mean_dx);
        }
      }
    }
    if (double* gg = grad_of(self, 1)) {
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) gg[j] += G[i * n + j] * xhat[i * n + j];
    }
    if (double* gb = grad_of(self, 2)) {
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) gb[j] += G[i * n + j];
    }
  });
}

Tensor cross_entropy_rows(const Tensor& logits, std::span<const int> targets) {
  const std::size_t m = logits.rows(), n = logits.cols();
  require(targets.size() == m, "cross_entropy_rows: one target per row");
  std::vector<int> tgt(targets.begin(), targets.end());
  std::vector<double> probs(m * n, 0.0);
  double loss = 0.0;
  std::size_t count = 0;
  const auto x = logits.values();
  for (std::size_t i = 0; i < m; ++i) {
    if (tgt[i] < 0) continue;
    require(static_cast<std::size_t>(tgt[i]) < n, "cross_entropy_rows: target out of range");
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) mx = std::max(mx, x[i * n + j]);
    double z = 0.0;
    for (std::size_t j = 0; j < n; ++j) z += std::exp(x[i * n + j] - mx);
    const double lse = mx + std::log(z);
    loss += lse - x[i * n + static_cast<std::size_t>(tgt[i])];
    for (std::size_t j = 0; j < n; ++j) probs[i * n + j] = std::exp(x[i * n + j] - lse);
    ++count;
  }
  const double inv = count > 0 ? 1.0 / static_cast<double>(count) : 0.0;
  return Tensor::make({1, 1}, {loss * inv}, {logits}, [m, n, tgt, probs, inv](Node& self) {
    double* g = grad_of(self, 0);
    if (!g) return;
    const double up = self.grad[0] * inv;
    for (std::size_t i = 0; i < m; ++i) {
      if (tgt[i] < 0) continue;
      for (std::size_t j = 0; j < n; ++j) g[i * n + j] += up * probs[i * n + j];
      g[i * n + static_cast<std::size_t>(tgt[i])] -= up;
    }
  });
}

Tensor bce_with_logits(const Tensor& logits, std::span<const double> targets) {
  require(targets.size() == logits.size() && !targets.empty(), "bce_with_logits: one target per logit");
  std::vector<double> t(targets.begin(), targets.end());
  double loss = 0.0;
  const auto x = logits.values();
  for (std::size_t i = 0; i < t.size(); ++i) {
    loss += std::max(x[i], 0.0) - x[i] * t[i] + std::log1p(std::exp(-std::abs(x[i])));
  }
  const double inv = 1.0 / static_cast<double>(t.size());
  return Tensor::make({1, 1}, {loss * inv}, {logits}, [t, inv](Node& self) {
    double* g = grad_of(self, 0);
    if (!g) return;
    const double* x = value_of(self, 0);
    for (std::size_t i = 0; i < t.size(); ++i) {
      const double s = x[i] >= 0 ? 1.0 / (1.0 + std::exp(-x[i])) : std::exp(x[i]) / (1.0 + std::exp(x[i]));
      g[i] += self.grad[0] * inv * (s - t[i]);
    }
  });
}

namespace {
double sigm(double x) { return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x)); }
}  // namespace

Tensor lstm_sequence(const Tensor& inputs, const Tensor& weights_x, const Tensor& weights_h, const Tensor& bias) {
  const std::size_t L = inputs.rows(), in = inputs.cols(), h = weights_h.rows(), g4 = 4 * h;
  require(weights_x.rows() == in && weights_x.cols() == g4, "lstm_sequence: weights_x must be in x 4h");
  require(weights_h.cols() == g4, "lstm_sequence: weights_h must be h x 4h");
  require(bias.rows() == 1 && bias.cols() == g4, "lstm_sequence: bias must be 1 x 4h");

  const double* X = inputs.values().data();
  const double* Wx = weights_x.values().data();
  const double* Wh = weights_h.values().data();
  const double* B = bias.values().data();
  // gates[t] holds activated [i, f, g, o]; cells[t] and tanh_c[t] the state.
  std::vector<double> gates(L * g4), cells(L * h), tanh_c(L * h), out(L * h);
  std::vector<double> z(g4);
  for (std::size_t t = 0; t < L; ++t) {
    for (std::size_t k = 0; k < g4; ++k) z[k] = B[k];
    for (std::size_t p = 0; p < in; ++p) {
      const double xv = X[t * in + p];
      if (xv == 0.0) continue;
      for (std::size_t k = 0; k < g4; ++k) z[k] += xv * Wx[p * g4 + k];
    }
    if (t > 0) {
      for (std::size_t p = 0; p < h; ++p) {
        const double hv = out[(t - 1) * h + p];
        for (std::size_t k = 0; k < g4; ++k) z[k] += hv * Wh[p * g4 + k];
      }
    }
    double* gt = gates.data() + t * g4;
    for (std::size_t k = 0; k < h; ++k) {
      gt[k] = sigm(z[k]);
      gt[h + k] = sigm(z[h + k]);
      gt[2 * h + k] = std::tanh(z[2 * h + k]);
      gt[3 * h + k] = sigm(z[3 * h + k]);
      const double c_prev = t > 0 ? cells[(t - 1) * h + k] : 0.0;
      const double c = gt[h + k] * c_prev + gt[k] * gt[2 * h + k];
      cells[t * h + k] = c;
      tanh_c[t * h + k] = std::tanh(c);
      out[t * h + k] = gt[3 * h + k] * tanh_c[t * h + k];
    }
  }

  return Tensor::make({L, h}, out, {inputs, weights_x, weights_h, bias},
                      [L, in, h, g4, gates, cells, tanh_c](Node& self) {
    const double* X = value_of(self, 0);
    const double* Wx = value_of(self, 1);
    const double* Wh = value_of(self, 2);
    double* gX = grad_of(self, 0);
    double* gWx = grad_of(self, 1);
    double* gWh = grad_of(self, 2);
    double* gB = grad_of(self, 3);
    const double* H = self.value.data();
    std::vector<double> dh_next(h, 0.0), dc_next(h, 0.0), dz(g4);
    for (std::size_t t = L; t-- > 0;) {
      const double* gt = gates.data() + t * g4;
      for (std::size_t k = 0; k < h; ++k) {
        const double dh = self.grad[t * h + k] + dh_next[k];
        const double i = gt[k], f = gt[h + k], g = gt[2 * h + k], o = gt[3 * h + k];
        const double tc = tanh_c[t * h + k];
        const double dc = dh * o * (1.0 - tc * tc) + dc_next[k];
        const double c_prev = t > 0 ? cells[(t - 1) * h + k] : 0.0;
        dz[k] = dc * g * i * (1.0 - i);
        dz[h + k] = dc * c_prev * f * (1.0 - f);
        dz[2 * h + k] = dc * i * (1.0 - g * g);
        dz[3 * h + k] = dh * tc * o * (1.0 - o);
        dc_next[k] = dc * f;
      }
      if (gB) {
        for (std::size_t k = 0; k < g4; ++k) gB[k] += dz[k];
      }
      if (gWx) {
        for (std::size_t p = 0; p < in; ++p) {
          const double xv = X[t * in + p];
          if (xv == 0.0) continue;
          for (std::size_t k = 0; k < g4; ++k) gWx[p * g4 + k] += xv * dz[k];
        }
      }
      if (gX) {
        for (std::size_t p = 0; p < in; ++p) {
          double s = 0.0;
          for (std::size_t k = 0; k < g4; ++k) s += Wx[p * g4 + k] * dz[k];
          gX[t * in + p] += s;
        }
      }
      for (std::size_t p = 0; p < h; ++p) {
        double s = 0.0;
        for (std::size_t k = 0; k < g4; ++k) s += Wh[p * g4 + k] * dz[k];
        dh_next[p] = t > 0 ? s : 0.0;
        if (gWh && t > 0) {
          const double hv = H[(t - 1) * h + p];
          for (std::size_t k = 0; k < g4; ++k) gWh[p * g4 + k] += hv * dz[k];
        }
      }
    }
  });
}

}  // namespace hopqg::nn
