#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

namespace md2ga {

namespace detail {

inline size_t numel(const std::vector<int>& shape) {
  size_t n = 1;
  for (int d : shape) n *= static_cast<size_t>(d);
  return n;
}

inline std::string shape_str(const std::vector<int>& shape) {
  std::string s = "(";
  for (size_t i = 0; i < shape.size(); ++i) {
    if (i) s += "x";
    s += std::to_string(shape[i]);
  }
  return s + ")";
}

// Four-way accumulators so -O3 vectorizes the reductions without a
// reassociation license; the summation order is fixed, so results are
// reproducible run to run.
inline double dot(const double* a, const double* b, size_t n) {
  double s0 = 0, s1 = 0, s2 = 0, s3 = 0;
  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 += a[i] * b[i];
    s1 += a[i + 1] * b[i + 1];
    s2 += a[i + 2] * b[i + 2];
    s3 += a[i + 3] * b[i + 3];
  }
  for (; i < n; ++i) s0 += a[i] * b[i];
  return (s0 + s1) + (s2 + s3);
}

inline void axpy(double* y, double a, const double* x, size_t n) {
  for (size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

struct TensorNode {
  std::vector<int> shape;
  std::vector<double> values;
  std::vector<double> grad;  // allocated iff requires_grad
  bool requires_grad = false;
  std::vector<std::shared_ptr<TensorNode>> parents;
  std::function<void(TensorNode&)> backward_fn;  // empty for leaves
};

}  // namespace detail

// Dense row-major tensor of doubles with a recorded-tape reverse mode.
// A Tensor is a cheap handle; ops build new nodes that keep their operands
// alive, and backward() replays the recorded graph in reverse topological
// order. Leaf gradients accumulate across backward() calls until zeroed.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(std::vector<int> shape, bool requires_grad = false) {
    auto node = std::make_shared<detail::TensorNode>();
    node->values.assign(detail::numel(shape), 0.0);
    node->shape = std::move(shape);
    node->requires_grad = requires_grad;
    if (requires_grad) node->grad.assign(node->values.size(), 0.0);
    return Tensor(std::move(node));
  }

  static Tensor from_values(std::vector<int> shape, std::vector<double> values,
                            bool requires_grad = false) {
    if (detail::numel(shape) != values.size()) {
      throw std::invalid_argument("tensor: shape " + detail::shape_str(shape) +
                                  " does not match " + std::to_string(values.size()) +
                                  " values");
    }
    auto node = std::make_shared<detail::TensorNode>();
    node->shape = std::move(shape);
    node->values = std::move(values);
    node->requires_grad = requires_grad;
    if (requires_grad) node->grad.assign(node->values.size(), 0.0);
    return Tensor(std::move(node));
  }

  static Tensor scalar(double v, bool requires_grad = false) {
    return from_values({1}, {v}, requires_grad);
  }

  // Low-level hook for fused ops defined outside this header. `backward`
  // receives the finished node and must add into parents' grads.
  static Tensor from_op(std::vector<int> shape, std::vector<double> values,
                        std::vector<Tensor> parents,
                        std::function<void(detail::TensorNode&)> backward) {
    auto node = std::make_shared<detail::TensorNode>();
    node->shape = std::move(shape);
    node->values = std::move(values);
    for (auto& p : parents) {
      node->requires_grad = node->requires_grad || p.requires_grad();
      node->parents.push_back(p.node_);
    }
    if (node->requires_grad) {
      node->grad.assign(node->values.size(), 0.0);
      node->backward_fn = std::move(backward);
    }
    return Tensor(std::move(node));
  }

  bool defined() const { return node_ != nullptr; }
  const std::vector<int>& shape() const { return node_->shape; }
  size_t size() const { return node_->values.size(); }
  int rank() const { return static_cast<int>(node_->shape.size()); }
  int dim(int i) const { return node_->shape[static_cast<size_t>(i)]; }

  // 2-D helpers
  int rows() const { return node_->shape[0]; }
  int cols() const { return node_->shape[1]; }

  std::span<const double> values() const { return node_->values; }
  std::span<double> values_mut() { return node_->values; }  // leaves only
  double operator[](size_t i) const { return node_->values[i]; }

  double item() const {
    if (size() != 1)
      throw std::invalid_argument("item: tensor " + detail::shape_str(shape()) +
                                  " is not scalar");
    return node_->values[0];
  }

  bool requires_grad() const { return node_->requires_grad; }
  std::span<const double> grad() const { return node_->grad; }
  std::span<double> grad_mut() { return node_->grad; }
  void zero_grad() { std::fill(node_->grad.begin(), node_->grad.end(), 0.0); }

  detail::TensorNode* node() const { return node_.get(); }

  friend void backward(const Tensor& loss);

 private:
  explicit Tensor(std::shared_ptr<detail::TensorNode> node) : node_(std::move(node)) {}
  std::shared_ptr<detail::TensorNode> node_;
};

namespace detail {

inline std::vector<TensorNode*> topo_order(TensorNode* root) {
  std::vector<TensorNode*> order;
  std::unordered_set<TensorNode*> seen;
  // iterative post-order DFS; parents end up before their consumers
  std::vector<std::pair<TensorNode*, size_t>> stack{{root, 0}};
  seen.insert(root);
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      TensorNode* p = node->parents[next++].get();
      if (seen.insert(p).second) stack.emplace_back(p, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }
  return order;
}

}  // namespace detail

// Propagates d(loss)/d(node) through the recorded graph. Interior gradients
// are reset on every call; leaf gradients accumulate, so calling twice
// without zeroing doubles them.
inline void backward(const Tensor& loss) {
  if (loss.size() != 1) {
    throw std::invalid_argument("backward: loss must be scalar, got " +
                                detail::shape_str(loss.shape()));
  }
  detail::TensorNode* root = loss.node();
  if (!root->requires_grad) return;
  auto order = detail::topo_order(root);
  for (detail::TensorNode* n : order) {
    if (n->backward_fn && n->requires_grad)
      std::fill(n->grad.begin(), n->grad.end(), 0.0);
  }
  root->grad[0] += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    detail::TensorNode* n = *it;
    if (n->backward_fn && n->requires_grad) n->backward_fn(*n);
  }
}

// ---------------------------------------------------------------------------
// Primitive ops
// ---------------------------------------------------------------------------

inline Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2) {
    throw std::invalid_argument("matmul: expected rank-2 operands, got " +
                                detail::shape_str(a.shape()) + " and " +
                                detail::shape_str(b.shape()));
  }
  if (a.cols() != b.rows()) {
    throw std::invalid_argument("matmul: inner dimensions disagree: " +
                                detail::shape_str(a.shape()) + " vs " +
                                detail::shape_str(b.shape()));
  }
  const int m = a.rows(), k = a.cols(), n = b.cols();
  std::vector<double> out(static_cast<size_t>(m) * n, 0.0);
  {
    const double* av = a.values().data();
    const double* bv = b.values().data();
    for (int i = 0; i < m; ++i) {
      double* ci = out.data() + static_cast<size_t>(i) * n;
      const double* ai = av + static_cast<size_t>(i) * k;
      for (int p = 0; p < k; ++p)
        detail::axpy(ci, ai[p], bv + static_cast<size_t>(p) * n, static_cast<size_t>(n));
    }
  }
  return Tensor::from_op(
      {m, n}, std::move(out), {a, b}, [m, k, n](detail::TensorNode& self) {
        auto& pa = *self.parents[0];
        auto& pb = *self.parents[1];
        const double* g = self.grad.data();
        if (pa.requires_grad) {
          // dA[i,j] += dot(dC row i, B row j)
          double* da = pa.grad.data();
          const double* bv = pb.values.data();
          for (int i = 0; i < m; ++i)
            for (int j = 0; j < k; ++j)
              da[static_cast<size_t>(i) * k + j] +=
                  detail::dot(g + static_cast<size_t>(i) * n,
                              bv + static_cast<size_t>(j) * n, static_cast<size_t>(n));
        }
        if (pb.requires_grad) {
          // dB row j += A[i,j] * dC row i
          double* db = pb.grad.data();
          const double* av = pa.values.data();
          for (int i = 0; i < m; ++i) {
            const double* gi = g + static_cast<size_t>(i) * n;
            const double* ai = av + static_cast<size_t>(i) * k;
            for (int j = 0; j < k; ++j)
              detail::axpy(db + static_cast<size_t>(j) * n, ai[j], gi,
                           static_cast<size_t>(n));
          }
        }
      });
}

namespace detail {

inline void check_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw std::invalid_argument(std::string(op) + ": shape mismatch: " +
                                shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  }
}

}  // namespace detail

inline Tensor add(const Tensor& a, const Tensor& b) {
  detail::check_same_shape(a, b, "add");
  std::vector<double> out(a.size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = a[i] + b[i];
  return Tensor::from_op(a.shape(), std::move(out), {a, b},
                         [](detail::TensorNode& self) {
                           for (int p = 0; p < 2; ++p) {
                             auto& par = *self.parents[static_cast<size_t>(p)];
                             if (par.requires_grad)
                               detail::axpy(par.grad.data(), 1.0, self.grad.data(),
                                            self.grad.size());
                           }
                         });
}

inline Tensor sub(const Tensor& a, const Tensor& b) {
  detail::check_same_shape(a, b, "sub");
  std::vector<double> out(a.size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = a[i] - b[i];
  return Tensor::from_op(a.shape(), std::move(out), {a, b},
                         [](detail::TensorNode& self) {
                           auto& pa = *self.parents[0];
                           auto& pb = *self.parents[1];
                           if (pa.requires_grad)
                             detail::axpy(pa.grad.data(), 1.0, self.grad.data(),
                                          self.grad.size());
                           if (pb.requires_grad)
                             detail::axpy(pb.grad.data(), -1.0, self.grad.data(),
                                          self.grad.size());
                         });
}

inline Tensor mul(const Tensor& a, const Tensor& b) {
  detail::check_same_shape(a, b, "mul");
  std::vector<double> out(a.size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = a[i] * b[i];
  return Tensor::from_op(a.shape(), std::move(out), {a, b},
                         [](detail::TensorNode& self) {
                           auto& pa = *self.parents[0];
                           auto& pb = *self.parents[1];
                           if (pa.requires_grad)
                             for (size_t i = 0; i < self.grad.size(); ++i)
                               pa.grad[i] += self.grad[i] * pb.values[i];
                           if (pb.requires_grad)
                             for (size_t i = 0; i < self.grad.size(); ++i)
                               pb.grad[i] += self.grad[i] * pa.values[i];
                         });
}

inline Tensor scale(const Tensor& x, double c) {
  std::vector<double> out(x.size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = x[i] * c;
  return Tensor::from_op(x.shape(), std::move(out), {x},
                         [c](detail::TensorNode& self) {
                           auto& p = *self.parents[0];
                           if (p.requires_grad)
                             detail::axpy(p.grad.data(), c, self.grad.data(),
                                          self.grad.size());
                         });
}

// x: (m x n), bias: (n) or (1 x n), added to every row
inline Tensor add_row_bias(const Tensor& x, const Tensor& bias) {
  const int m = x.rows(), n = x.cols();
  if (static_cast<int>(bias.size()) != n) {
    throw std::invalid_argument("add_row_bias: bias " + detail::shape_str(bias.shape()) +
                                " does not match columns of " +
                                detail::shape_str(x.shape()));
  }
  std::vector<double> out(x.size());
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j)
      out[static_cast<size_t>(i) * n + j] = x[static_cast<size_t>(i) * n + j] + bias[static_cast<size_t>(j)];
  return Tensor::from_op(x.shape(), std::move(out), {x, bias},
                         [m, n](detail::TensorNode& self) {
                           auto& px = *self.parents[0];
                           auto& pb = *self.parents[1];
                           if (px.requires_grad)
                             detail::axpy(px.grad.data(), 1.0, self.grad.data(),
                                          self.grad.size());
                           if (pb.requires_grad)
                             for (int i = 0; i < m; ++i)
                               for (int j = 0; j < n; ++j)
                                 pb.grad[static_cast<size_t>(j)] +=
                                     self.grad[static_cast<size_t>(i) * n + j];
                         });
}

inline Tensor relu(const Tensor& x) {
  std::vector<double> out(x.size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = x[i] > 0.0 ? x[i] : 0.0;
  return Tensor::from_op(x.shape(), std::move(out), {x},
                         [](detail::TensorNode& self) {
                           auto& p = *self.parents[0];
                           if (!p.requires_grad) return;
                           for (size_t i = 0; i < self.grad.size(); ++i)
                             if (p.values[i] > 0.0) p.grad[i] += self.grad[i];
                         });
}

// Max-subtracted exponentials normalized along `axis`; every slice sums to 1.
inline Tensor softmax(const Tensor& x, int axis) {
  if (axis < 0 || axis >= x.rank()) {
    throw std::invalid_argument("softmax: axis " + std::to_string(axis) +
                                " out of range for " + detail::shape_str(x.shape()));
  }
  const auto& shape = x.shape();
  size_t outer = 1, inner = 1;
  for (int i = 0; i < axis; ++i) outer *= static_cast<size_t>(shape[static_cast<size_t>(i)]);
  for (int i = axis + 1; i < x.rank(); ++i) inner *= static_cast<size_t>(shape[static_cast<size_t>(i)]);
  const size_t len = static_cast<size_t>(shape[static_cast<size_t>(axis)]);

  std::vector<double> out(x.size());
  const double* v = x.values().data();
  for (size_t o = 0; o < outer; ++o)
    for (size_t in = 0; in < inner; ++in) {
      const size_t base = o * len * inner + in;
      double mx = v[base];
      for (size_t i = 1; i < len; ++i) mx = std::max(mx, v[base + i * inner]);
      double sum = 0.0;
      for (size_t i = 0; i < len; ++i) {
        const double e = std::exp(v[base + i * inner] - mx);
        out[base + i * inner] = e;
        sum += e;
      }
      for (size_t i = 0; i < len; ++i) out[base + i * inner] /= sum;
    }
  return Tensor::from_op(
      shape, std::move(out), {x}, [outer, inner, len](detail::TensorNode& self) {
        auto& p = *self.parents[0];
        if (!p.requires_grad) return;
        const double* s = self.values.data();
        const double* g = self.grad.data();
        for (size_t o = 0; o < outer; ++o)
          for (size_t in = 0; in < inner; ++in) {
            const size_t base = o * len * inner + in;
            double gs = 0.0;
            for (size_t i = 0; i < len; ++i) gs += g[base + i * inner] * s[base + i * inner];
            for (size_t i = 0; i < len; ++i) {
              const size_t idx = base + i * inner;
              p.grad[idx] += s[idx] * (g[idx] - gs);
            }
          }
      });
}

inline Tensor transpose(const Tensor& x) {
  if (x.rank() != 2)
    throw std::invalid_argument("transpose: expected rank-2, got " +
                                detail::shape_str(x.shape()));
  const int m = x.rows(), n = x.cols();
  std::vector<double> out(x.size());
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j)
      out[static_cast<size_t>(j) * m + i] = x[static_cast<size_t>(i) * n + j];
  return Tensor::from_op({n, m}, std::move(out), {x},
                         [m, n](detail::TensorNode& self) {
                           auto& p = *self.parents[0];
                           if (!p.requires_grad) return;
                           for (int i = 0; i < m; ++i)
                             for (int j = 0; j < n; ++j)
                               p.grad[static_cast<size_t>(i) * n + j] +=
                                   self.grad[static_cast<size_t>(j) * m + i];
                         });
}

inline Tensor reshape(const Tensor& x, std::vector<int> shape) {
  if (detail::numel(shape) != x.size()) {
    throw std::invalid_argument("reshape: cannot view " + detail::shape_str(x.shape()) +
                                " as " + detail::shape_str(shape));
  }
  std::vector<double> out(x.values().begin(), x.values().end());
  return Tensor::from_op(std::move(shape), std::move(out), {x},
                         [](detail::TensorNode& self) {
                           auto& p = *self.parents[0];
                           if (p.requires_grad)
                             detail::axpy(p.grad.data(), 1.0, self.grad.data(),
                                          self.grad.size());
                         });
}

inline Tensor sum(const Tensor& x) {
  double s0 = 0, s1 = 0, s2 = 0, s3 = 0;
  const double* v = x.values().data();
  size_t i = 0;
  for (; i + 4 <= x.size(); i += 4) {
    s0 += v[i]; s1 += v[i + 1]; s2 += v[i + 2]; s3 += v[i + 3];
  }
  for (; i < x.size(); ++i) s0 += v[i];
  return Tensor::from_op({1}, {(s0 + s1) + (s2 + s3)}, {x},
                         [](detail::TensorNode& self) {
                           auto& p = *self.parents[0];
                           if (!p.requires_grad) return;
                           const double g = self.grad[0];
                           for (size_t j = 0; j < p.grad.size(); ++j) p.grad[j] += g;
                         });
}

// s * sum((pred - target)^2), as one node
inline Tensor sse_scaled(const Tensor& pred, const Tensor& target, double s) {
  detail::check_same_shape(pred, target, "sse_scaled");
  double acc = 0.0;
  for (size_t i = 0; i < pred.size(); ++i) {
    const double d = pred[i] - target[i];
    acc += d * d;
  }
  return Tensor::from_op({1}, {acc * s}, {pred, target},
                         [s](detail::TensorNode& self) {
                           auto& pp = *self.parents[0];
                           auto& pt = *self.parents[1];
                           const double g = 2.0 * s * self.grad[0];
                           for (size_t i = 0; i < pp.values.size(); ++i) {
                             const double d = pp.values[i] - pt.values[i];
                             if (pp.requires_grad) pp.grad[i] += g * d;
                             if (pt.requires_grad) pt.grad[i] -= g * d;
                           }
                         });
}

}  // namespace md2ga
