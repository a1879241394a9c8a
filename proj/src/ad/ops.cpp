#include "aublend/ad/ops.hpp"

#include <cmath>
#include <numbers>

#include "aublend/error.hpp"

namespace aublend::ad {

namespace {

using Backward = std::function<void(Node&)>;

Tensor record(const char* op, Shape shape, std::vector<double> value, std::initializer_list<Tensor> inputs,
              Backward backward) {
  for (double v : value) {
    if (!std::isfinite(v)) throw NumericError(std::string("non-finite value produced by ") + op);
  }
  auto node = std::make_shared<Node>();
  node->shape = std::move(shape);
  node->value = std::move(value);
  node->op = op;
  if (grad_enabled()) {
    for (const auto& t : inputs) {
      if (t.requires_grad()) {
        node->requires_grad = true;
        break;
      }
    }
  }
  if (node->requires_grad) {
    for (const auto& t : inputs) node->parents.push_back(t.node());
    node->backward = std::move(backward);
  }
  return Tensor(std::move(node));
}

Tensor record_n(const char* op, Shape shape, std::vector<double> value, const std::vector<Tensor>& inputs,
                Backward backward) {
  for (double v : value) {
    if (!std::isfinite(v)) throw NumericError(std::string("non-finite value produced by ") + op);
  }
  auto node = std::make_shared<Node>();
  node->shape = std::move(shape);
  node->value = std::move(value);
  node->op = op;
  if (grad_enabled()) {
    for (const auto& t : inputs) node->requires_grad = node->requires_grad || t.requires_grad();
  }
  if (node->requires_grad) {
    for (const auto& t : inputs) node->parents.push_back(t.node());
    node->backward = std::move(backward);
  }
  return Tensor(std::move(node));
}

// Parent gradient buffer, or nullptr when that parent takes no gradient.
std::vector<double>* pgrad(Node& self, std::size_t i) {
  Node& p = *self.parents[i];
  return p.requires_grad ? &p.grad_buffer() : nullptr;
}

void require_2d(const Tensor& t, const char* op) {
  if (t.shape().size() != 2) {
    throw ShapeError(std::string(op) + ": expected a 2-D tensor, got " + to_string(t.shape()));
  }
}

enum class Bcast { same, row, col, scalar };

Bcast broadcast_kind(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() == b.shape()) return Bcast::same;
  if (b.numel() == 1) return Bcast::scalar;
  if (b.rows() == 1 && b.cols() == a.cols() && b.numel() == a.cols()) return Bcast::row;
  if (b.shape().size() == 2 && b.cols() == 1 && b.rows() == a.rows() && a.shape().size() == 2) return Bcast::col;
  throw ShapeError(std::string(op) + ": cannot broadcast " + to_string(b.shape()) + " onto " +
                   to_string(a.shape()));
}

inline std::size_t bindex(Bcast kind, std::size_t i, std::size_t cols) {
  switch (kind) {
    case Bcast::same:
      return i;
    case Bcast::row:
      return i % cols;
    case Bcast::col:
      return i / cols;
    case Bcast::scalar:
      return 0;
  }
  return 0;
}

template <typename Fwd, typename GradA, typename GradB>
Tensor binary(const char* op, const Tensor& a, const Tensor& b, Fwd fwd, GradA ga, GradB gb) {
  const Bcast kind = broadcast_kind(a, b, op);
  const std::size_t n = a.numel(), cols = a.cols();
  std::vector<double> out(n);
  auto av = a.values();
  auto bv = b.values();
  for (std::size_t i = 0; i < n; ++i) out[i] = fwd(av[i], bv[bindex(kind, i, cols)]);
  return record(op, a.shape(), std::move(out), {a, b}, [kind, cols, ga, gb](Node& self) {
    const auto& av = self.parents[0]->value;
    const auto& bv = self.parents[1]->value;
    const auto& g = self.grad;
    if (auto* da = pgrad(self, 0)) {
      for (std::size_t i = 0; i < g.size(); ++i) (*da)[i] += g[i] * ga(av[i], bv[bindex(kind, i, cols)]);
    }
    if (auto* db = pgrad(self, 1)) {
      for (std::size_t i = 0; i < g.size(); ++i) {
        const std::size_t j = bindex(kind, i, cols);
        (*db)[j] += g[i] * gb(av[i], bv[j]);
      }
    }
  });
}

template <typename Fwd, typename Deriv>
Tensor unary(const char* op, const Tensor& a, Fwd fwd, Deriv deriv) {
  auto av = a.values();
  std::vector<double> out(av.size());
  for (std::size_t i = 0; i < av.size(); ++i) out[i] = fwd(av[i]);
  return record(op, a.shape(), std::move(out), {a}, [deriv](Node& self) {
    const auto& av = self.parents[0]->value;
    if (auto* da = pgrad(self, 0)) {
      for (std::size_t i = 0; i < av.size(); ++i) (*da)[i] += self.grad[i] * deriv(av[i], self.value[i]);
    }
  });
}

// C(n x m) += A(n x k) B(k x m)
void gemm_nn(const double* A, const double* B, double* C, std::size_t n, std::size_t k, std::size_t m) {
  for (std::size_t i = 0; i < n; ++i) {
    double* c = C + i * m;
    for (std::size_t p = 0; p < k; ++p) {
      const double a = A[i * k + p];
      if (a == 0.0) continue;
      const double* b = B + p * m;
      for (std::size_t j = 0; j < m; ++j) c[j] += a * b[j];
    }
  }
}

// C(n x k) += G(n x m) B(k x m)^T
void gemm_nt(const double* G, const double* B, double* C, std::size_t n, std::size_t k, std::size_t m) {
  for (std::size_t i = 0; i < n; ++i) {
    const double* g = G + i * m;
    for (std::size_t p = 0; p < k; ++p) {
      const double* b = B + p * m;
      double acc = 0.0;
      for (std::size_t j = 0; j < m; ++j) acc += g[j] * b[j];
      C[i * k + p] += acc;
    }
  }
}

// C(k x m) += A(n x k)^T G(n x m)
void gemm_tn(const double* A, const double* G, double* C, std::size_t n, std::size_t k, std::size_t m) {
  for (std::size_t i = 0; i < n; ++i) {
    const double* g = G + i * m;
    for (std::size_t p = 0; p < k; ++p) {
      const double a = A[i * k + p];
      if (a == 0.0) continue;
      double* c = C + p * m;
      for (std::size_t j = 0; j < m; ++j) c[j] += a * g[j];
    }
  }
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  return binary(
      "add", a, b, [](double x, double y) { return x + y; }, [](double, double) { return 1.0; },
      [](double, double) { return 1.0; });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  return binary(
      "sub", a, b, [](double x, double y) { return x - y; }, [](double, double) { return 1.0; },
      [](double, double) { return -1.0; });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  return binary(
      "mul", a, b, [](double x, double y) { return x * y; }, [](double, double y) { return y; },
      [](double x, double) { return x; });
}

Tensor scale(const Tensor& a, double factor) {
  return unary(
      "scale", a, [factor](double x) { return x * factor; }, [factor](double, double) { return factor; });
}

Tensor square(const Tensor& a) {
  return unary(
      "square", a, [](double x) { return x * x; }, [](double x, double) { return 2.0 * x; });
}

Tensor abs(const Tensor& a) {
  return unary(
      "abs", a, [](double x) { return std::fabs(x); },
      [](double x, double) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); });
}

Tensor gelu(const Tensor& a) {
  constexpr double inv_sqrt2 = 0.7071067811865475244;
  constexpr double inv_sqrt_2pi = 0.3989422804014326779;
  return unary(
      "gelu", a, [](double x) { return 0.5 * x * (1.0 + std::erf(x * inv_sqrt2)); },
      [](double x, double) {
        return 0.5 * (1.0 + std::erf(x * inv_sqrt2)) + x * inv_sqrt_2pi * std::exp(-0.5 * x * x);
      });
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_2d(a, "matmul");
  require_2d(b, "matmul");
  const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
  if (b.rows() != k) {
    throw ShapeError("matmul: inner dimensions differ, " + to_string(a.shape()) + " x " + to_string(b.shape()));
  }
  std::vector<double> out(n * m, 0.0);
  gemm_nn(a.values().data(), b.values().data(), out.data(), n, k, m);
  return record("matmul", {n, m}, std::move(out), {a, b}, [n, k, m](Node& self) {
    const auto& A = self.parents[0]->value;
    const auto& B = self.parents[1]->value;
    if (auto* da = pgrad(self, 0)) gemm_nt(self.grad.data(), B.data(), da->data(), n, k, m);
    if (auto* db = pgrad(self, 1)) gemm_tn(A.data(), self.grad.data(), db->data(), n, k, m);
  });
}

Tensor transpose(const Tensor& a) {
  require_2d(a, "transpose");
  const std::size_t n = a.rows(), m = a.cols();
  std::vector<double> out(n * m);
  auto av = a.values();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) out[j * n + i] = av[i * m + j];
  return record("transpose", {m, n}, std::move(out), {a}, [n, m](Node& self) {
    if (auto* da = pgrad(self, 0)) {
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) (*da)[i * m + j] += self.grad[j * n + i];
    }
  });
}

Tensor reshape(const Tensor& a, Shape shape) {
  if (shape_numel(shape) != a.numel()) {
    throw ShapeError("reshape: " + to_string(a.shape()) + " -> " + to_string(shape) + " changes element count");
  }
  std::vector<double> out(a.values().begin(), a.values().end());
  return record("reshape", std::move(shape), std::move(out), {a}, [](Node& self) {
    if (auto* da = pgrad(self, 0)) {
      for (std::size_t i = 0; i < self.grad.size(); ++i) (*da)[i] += self.grad[i];
    }
  });
}

Tensor concat(const std::vector<Tensor>& parts, std::size_t axis) {
  if (parts.empty()) throw ShapeError("concat: no inputs");
  if (axis > 1) throw ShapeError("concat: axis must be 0 or 1");
  for (const auto& p : parts) require_2d(p, "concat");
  const std::size_t other = axis == 0 ? parts[0].cols() : parts[0].rows();
  std::size_t total = 0;
  for (const auto& p : parts) {
    const std::size_t o = axis == 0 ? p.cols() : p.rows();
    if (o != other) {
      throw ShapeError("concat: " + to_string(parts[0].shape()) + " and " + to_string(p.shape()) +
                       " disagree off the concat axis");
    }
    total += axis == 0 ? p.rows() : p.cols();
  }
  const std::size_t rows = axis == 0 ? total : other;
  const std::size_t cols = axis == 0 ? other : total;
  std::vector<double> out(rows * cols);
  std::vector<std::size_t> offsets;
  std::size_t off = 0;
  for (const auto& p : parts) {
    offsets.push_back(off);
    auto pv = p.values();
    for (std::size_t i = 0; i < p.rows(); ++i)
      for (std::size_t j = 0; j < p.cols(); ++j) {
        const std::size_t r = axis == 0 ? off + i : i;
        const std::size_t c = axis == 0 ? j : off + j;
        out[r * cols + c] = pv[i * p.cols() + j];
      }
    off += axis == 0 ? p.rows() : p.cols();
  }
  return record_n("concat", {rows, cols}, std::move(out), parts, [axis, cols, offsets](Node& self) {
    for (std::size_t k = 0; k < self.parents.size(); ++k) {
      auto* dp = pgrad(self, k);
      if (!dp) continue;
      const Node& p = *self.parents[k];
      const std::size_t pr = p.shape[0], pc = p.shape[1];
      for (std::size_t i = 0; i < pr; ++i)
        for (std::size_t j = 0; j < pc; ++j) {
          const std::size_t r = axis == 0 ? offsets[k] + i : i;
          const std::size_t c = axis == 0 ? j : offsets[k] + j;
          (*dp)[i * pc + j] += self.grad[r * cols + c];
        }
    }
  });
}

Tensor slice(const Tensor& a, std::size_t axis, std::size_t begin, std::size_t end) {
  require_2d(a, "slice");
  if (axis > 1) throw ShapeError("slice: axis must be 0 or 1");
  const std::size_t extent = axis == 0 ? a.rows() : a.cols();
  if (begin >= end || end > extent) {
    throw ShapeError("slice: range [" + std::to_string(begin) + ", " + std::to_string(end) +
                     ") invalid for shape " + to_string(a.shape()));
  }
  const std::size_t rows = axis == 0 ? end - begin : a.rows();
  const std::size_t cols = axis == 0 ? a.cols() : end - begin;
  const std::size_t src_cols = a.cols();
  std::vector<double> out(rows * cols);
  auto av = a.values();
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) {
      const std::size_t r = axis == 0 ? begin + i : i;
      const std::size_t c = axis == 0 ? j : begin + j;
      out[i * cols + j] = av[r * src_cols + c];
    }
  return record("slice", {rows, cols}, std::move(out), {a}, [=](Node& self) {
    if (auto* da = pgrad(self, 0)) {
      for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) {
          const std::size_t r = axis == 0 ? begin + i : i;
          const std::size_t c = axis == 0 ? j : begin + j;
          (*da)[r * src_cols + c] += self.grad[i * cols + j];
        }
    }
  });
}

Tensor tile_rows(const Tensor& row, std::size_t n) {
  if (row.rows() != 1 || n == 0) {
    throw ShapeError("tile_rows: expected a single row and n > 0, got " + to_string(row.shape()));
  }
  const std::size_t m = row.cols();
  std::vector<double> out(n * m);
  for (std::size_t i = 0; i < n; ++i) std::copy(row.values().begin(), row.values().end(), out.begin() + i * m);
  return record("tile_rows", {n, m}, std::move(out), {row}, [n, m](Node& self) {
    if (auto* da = pgrad(self, 0)) {
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) (*da)[j] += self.grad[i * m + j];
    }
  });
}

Tensor sum(const Tensor& a) {
  double s = 0.0;
  for (double v : a.values()) s += v;
  return record("sum", {1}, {s}, {a}, [](Node& self) {
    if (auto* da = pgrad(self, 0)) {
      for (auto& g : *da) g += self.grad[0];
    }
  });
}

Tensor mean(const Tensor& a) {
  double s = 0.0;
  for (double v : a.values()) s += v;
  const double inv = 1.0 / static_cast<double>(a.numel());
  return record("mean", {1}, {s * inv}, {a}, [inv](Node& self) {
    if (auto* da = pgrad(self, 0)) {
      for (auto& g : *da) g += self.grad[0] * inv;
    }
  });
}

namespace {

Tensor layer_norm_impl(const Tensor& x, const Tensor* gain, const Tensor* bias, double eps) {
  const std::size_t m = x.cols();
  if (m < 2) {
    throw ShapeError("layer_norm: last dimension must be at least 2, got " + to_string(x.shape()));
  }
  if (gain && (gain->numel() != m || bias->numel() != m)) {
    throw ShapeError("layer_norm: gain/bias " + to_string(gain->shape()) + "/" + to_string(bias->shape()) +
                     " do not match last dimension of " + to_string(x.shape()));
  }
  const std::size_t n = x.numel() / m;
  auto xv = x.values();
  std::vector<double> xhat(n * m), rstd(n), out(n * m);
  for (std::size_t i = 0; i < n; ++i) {
    const double* r = xv.data() + i * m;
    double mu = 0.0;
    for (std::size_t j = 0; j < m; ++j) mu += r[j];
    mu /= static_cast<double>(m);
    double var = 0.0;
    for (std::size_t j = 0; j < m; ++j) var += (r[j] - mu) * (r[j] - mu);
    var /= static_cast<double>(m);
    rstd[i] = 1.0 / std::sqrt(var + eps);
    for (std::size_t j = 0; j < m; ++j) {
      xhat[i * m + j] = (r[j] - mu) * rstd[i];
      out[i * m + j] = gain ? xhat[i * m + j] * gain->values()[j] + bias->values()[j] : xhat[i * m + j];
    }
  }
  auto backward = [n, m, xhat = std::move(xhat), rstd = std::move(rstd), affine = gain != nullptr](Node& self) {
    const auto& g = self.grad;
    auto* dx = pgrad(self, 0);
    std::vector<double>* dgain = affine ? pgrad(self, 1) : nullptr;
    std::vector<double>* dbias = affine ? pgrad(self, 2) : nullptr;
    const double* gv = affine ? self.parents[1]->value.data() : nullptr;
    std::vector<double> dxhat(m);
    for (std::size_t i = 0; i < n; ++i) {
      double mean_d = 0.0, mean_dx = 0.0;
      for (std::size_t j = 0; j < m; ++j) {
        const double gij = g[i * m + j];
        dxhat[j] = affine ? gij * gv[j] : gij;
        mean_d += dxhat[j];
        mean_dx += dxhat[j] * xhat[i * m + j];
        if (dgain) (*dgain)[j] += gij * xhat[i * m + j];
        if (dbias) (*dbias)[j] += gij;
      }
      mean_d /= static_cast<double>(m);
      mean_dx /= static_cast<double>(m);
      if (dx) {
        for (std::size_t j = 0; j < m; ++j) {
          (*dx)[i * m + j] += rstd[i] * (dxhat[j] - mean_d - xhat[i * m + j] * mean_dx);
        }
      }
    }
  };
  if (gain) return record("layer_norm", x.shape(), std::move(out), {x, *gain, *bias}, std::move(backward));
  return record("layer_norm", x.shape(), std::move(out), {x}, std::move(backward));
}

}  // namespace

Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias, double eps) {
  return layer_norm_impl(x, &gain, &bias, eps);
}

Tensor layer_norm(const Tensor& x, double eps) { return layer_norm_impl(x, nullptr, nullptr, eps); }

Tensor softmax(const Tensor& x) {
  const std::size_t m = x.cols();
  const std::size_t n = x.numel() / m;
  auto xv = x.values();
  std::vector<double> out(n * m);
  for (std::size_t i = 0; i < n; ++i) {
    const double* r = xv.data() + i * m;
    double mx = r[0];
    for (std::size_t j = 1; j < m; ++j) mx = std::max(mx, r[j]);
    double z = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      out[i * m + j] = std::exp(r[j] - mx);
      z += out[i * m + j];
    }
    for (std::size_t j = 0; j < m; ++j) out[i * m + j] /= z;
  }
  return record("softmax", x.shape(), std::move(out), {x}, [n, m](Node& self) {
    if (auto* dx = pgrad(self, 0)) {
      const auto& y = self.value;
      for (std::size_t i = 0; i < n; ++i) {
        double dot = 0.0;
        for (std::size_t j = 0; j < m; ++j) dot += self.grad[i * m + j] * y[i * m + j];
        for (std::size_t j = 0; j < m; ++j) (*dx)[i * m + j] += y[i * m + j] * (self.grad[i * m + j] - dot);
      }
    }
  });
}

Tensor dilated_conv1d(const Tensor& x, const Tensor& weight, const Tensor& bias, std::size_t kernel,
                      std::size_t dilation) {
  require_2d(x, "dilated_conv1d");
  require_2d(weight, "dilated_conv1d");
  if (kernel == 0 || dilation == 0) throw ConfigError("dilated_conv1d: kernel and dilation must be positive");
  const std::size_t T = x.rows(), cin = x.cols(), cout = weight.cols();
  if (weight.rows() != kernel * cin) {
    throw ShapeError("dilated_conv1d: weight " + to_string(weight.shape()) + " does not match kernel " +
                     std::to_string(kernel) + " x input " + to_string(x.shape()));
  }
  if (bias.numel() != cout) {
    throw ShapeError("dilated_conv1d: bias " + to_string(bias.shape()) + " does not match weight " +
                     to_string(weight.shape()));
  }
  const std::size_t span = (kernel - 1) * dilation + 1;
  if (span > T) {
    throw ConfigError("dilated_conv1d: dilated kernel span " + std::to_string(span) + " exceeds sequence length " +
                      std::to_string(T));
  }
  auto xv = x.values();
  auto wv = weight.values();
  auto bv = bias.values();
  std::vector<double> out(T * cout);
  for (std::size_t t = 0; t < T; ++t) {
    double* o = out.data() + t * cout;
    for (std::size_t j = 0; j < cout; ++j) o[j] = bv[j];
    for (std::size_t k = 0; k < kernel; ++k) {
      const std::size_t lag = (kernel - 1 - k) * dilation;
      if (lag > t) continue;  // causal zero padding
      gemm_nn(xv.data() + (t - lag) * cin, wv.data() + k * cin * cout, o, 1, cin, cout);
    }
  }
  return record("dilated_conv1d", {T, cout}, std::move(out), {x, weight, bias},
                [T, cin, cout, kernel, dilation](Node& self) {
                  const auto& xv = self.parents[0]->value;
                  const auto& wv = self.parents[1]->value;
                  auto* dx = pgrad(self, 0);
                  auto* dw = pgrad(self, 1);
                  auto* db = pgrad(self, 2);
                  for (std::size_t t = 0; t < T; ++t) {
                    const double* g = self.grad.data() + t * cout;
                    if (db)
                      for (std::size_t j = 0; j < cout; ++j) (*db)[j] += g[j];
                    for (std::size_t k = 0; k < kernel; ++k) {
                      const std::size_t lag = (kernel - 1 - k) * dilation;
                      if (lag > t) continue;
                      if (dx) gemm_nt(g, wv.data() + k * cin * cout, dx->data() + (t - lag) * cin, 1, cin, cout);
                      if (dw) gemm_tn(xv.data() + (t - lag) * cin, g, dw->data() + k * cin * cout, 1, cin, cout);
                    }
                  }
                });
}

Tensor stop_gradient(const Tensor& x) {
  std::vector<double> out(x.values().begin(), x.values().end());
  return record("stop_gradient", x.shape(), std::move(out), {x}, [](Node& self) {
    // Materialise a zero gradient so the parent observably receives nothing.
    pgrad(self, 0);
  });
}

Tensor straight_through(const Tensor& z, const Tensor& quantized) {
  if (z.shape() != quantized.shape()) {
    throw ShapeError("straight_through: " + to_string(z.shape()) + " vs " + to_string(quantized.shape()));
  }
  std::vector<double> out(quantized.values().begin(), quantized.values().end());
  return record("straight_through", z.shape(), std::move(out), {z}, [](Node& self) {
    if (auto* dz = pgrad(self, 0)) {
      for (std::size_t i = 0; i < self.grad.size(); ++i) (*dz)[i] += self.grad[i];
    }
  });
}

Tensor gather_rows(const Tensor& table, const std::vector<std::size_t>& indices) {
  require_2d(table, "gather_rows");
  if (indices.empty()) throw ShapeError("gather_rows: no indices");
  const std::size_t d = table.cols();
  std::vector<double> out(indices.size() * d);
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] >= table.rows()) {
      throw ShapeError("gather_rows: index " + std::to_string(indices[i]) + " out of range for " +
                       to_string(table.shape()));
    }
    std::copy_n(table.values().begin() + indices[i] * d, d, out.begin() + i * d);
  }
  return record("gather_rows", {indices.size(), d}, std::move(out), {table}, [indices, d](Node& self) {
    if (auto* dt = pgrad(self, 0)) {
      for (std::size_t i = 0; i < indices.size(); ++i)
        for (std::size_t j = 0; j < d; ++j) (*dt)[indices[i] * d + j] += self.grad[i * d + j];
    }
  });
}

Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias) { return add(matmul(x, weight), bias); }

Tensor mhsa(const Tensor& x, const MhsaParams& p, std::size_t heads) {
  require_2d(x, "mhsa");
  const std::size_t d = x.cols();
  if (heads == 0 || d % heads != 0) {
    throw ConfigError("mhsa: model width " + std::to_string(d) + " is not divisible by " + std::to_string(heads) +
                      " heads");
  }
  const std::size_t dh = d / heads;
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(dh));
  Tensor q = linear(x, p.wq, p.bq);
  Tensor k = linear(x, p.wk, p.bk);
  Tensor v = linear(x, p.wv, p.bv);
  std::vector<Tensor> outs;
  outs.reserve(heads);
  for (std::size_t h = 0; h < heads; ++h) {
    Tensor qh = slice(q, 1, h * dh, (h + 1) * dh);
    Tensor kh = slice(k, 1, h * dh, (h + 1) * dh);
    Tensor vh = slice(v, 1, h * dh, (h + 1) * dh);
    Tensor attn = softmax(scale(matmul(qh, transpose(kh)), inv_sqrt));
    outs.push_back(matmul(attn, vh));
  }
  Tensor merged = heads == 1 ? outs[0] : concat(outs, 1);
  return linear(merged, p.wo, p.bo);
}

}  // namespace aublend::ad
