#include "autodiff.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <unordered_set>

#include "error.hpp"
#include "kernels.hpp"

namespace fckan {

namespace {

std::atomic<std::uint64_t> next_node_id{1};
thread_local bool recording = true;

template <typename T>
void require_same_shape(const char* op, const Variable<T>& a, const Variable<T>& b) {
  if (a.shape() != b.shape()) {
    fail(ErrorKind::kDimension, std::string(op) + ": shape mismatch " + to_string(a.shape()) +
                                    " vs " + to_string(b.shape()));
  }
}

bool is_scalar(Shape s) { return s.rows == 1 && s.cols == 1; }

// Resolves the output shape of a binary element-wise op.
template <typename T>
Shape binary_shape(const char* op, const Variable<T>& a, const Variable<T>& b) {
  if (a.shape() == b.shape()) return a.shape();
  if (is_scalar(a.shape())) return b.shape();
  if (is_scalar(b.shape())) return a.shape();
  require_same_shape(op, a, b);
  return a.shape();
}

// Adds `g` into `target`; a 1×1 target receives the sum of `g`.
template <typename T>
void accumulate(Node<T>& target, const Tensor<T>& g) {
  if (!target.requires_grad) return;
  Tensor<T>& acc = target.grad_ref();
  if (acc.shape() == g.shape()) {
    for (std::size_t i = 0; i < g.size(); ++i) acc[i] += g[i];
  } else {
    T total = 0;
    for (T v : g.data()) total += v;
    acc[0] += total;
  }
}

template <typename T>
T broadcast_at(const Tensor<T>& t, std::size_t i) {
  return t.size() == 1 ? t[0] : t[i];
}

template <typename T, typename F>
Tensor<T> map_binary(Shape shape, const Tensor<T>& a, const Tensor<T>& b, F f) {
  Tensor<T> out(shape.rows, shape.cols);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(broadcast_at(a, i), broadcast_at(b, i));
  return out;
}

template <typename T, typename F>
Tensor<T> map_unary(const Tensor<T>& a, F f) {
  Tensor<T> out(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = f(a[i]);
  return out;
}

}  // namespace

NoGradGuard::NoGradGuard() : previous_(recording) { recording = false; }
NoGradGuard::~NoGradGuard() { recording = previous_; }
bool grad_enabled() noexcept { return recording; }

template <typename T>
Tensor<T>& Node<T>::grad_ref() {
  if (grad.shape() != value.shape() || grad.size() != value.size()) {
    grad = Tensor<T>(value.rows(), value.cols());
  }
  return grad;
}

template <typename T>
Variable<T>::Variable(Tensor<T> value, bool requires_grad) : node_(std::make_shared<Node<T>>()) {
  node_->value = std::move(value);
  node_->requires_grad = requires_grad;
  node_->id = next_node_id.fetch_add(1, std::memory_order_relaxed);
  node_->op = "leaf";
}

template <typename T>
Variable<T> Variable<T>::record(std::string op, Tensor<T> value, std::vector<Variable> parents,
                                std::function<void(Node<T>&)> backward) {
  if (!value.all_finite()) {
    fail(ErrorKind::kNumeric, op + ": non-finite value in forward result " +
                                  to_string(value.shape()));
  }
  Variable out;
  out.node_ = std::make_shared<Node<T>>();
  out.node_->value = std::move(value);
  out.node_->op = std::move(op);
  out.node_->id = next_node_id.fetch_add(1, std::memory_order_relaxed);
  const bool needs_grad = recording &&
      std::any_of(parents.begin(), parents.end(), [](const Variable& p) { return p.requires_grad(); });
  out.node_->requires_grad = needs_grad;
  if (needs_grad) {
    out.node_->parents.reserve(parents.size());
    for (auto& p : parents) out.node_->parents.push_back(p.node_);
    out.node_->backward = std::move(backward);
  }
  return out;
}

template <typename T>
const Tensor<T>& Variable<T>::grad() const {
  return node_->grad_ref();
}

template <typename T>
void Variable<T>::zero_grad() {
  node_->grad_ref().fill(T(0));
}

template <typename T>
std::vector<std::shared_ptr<Node<T>>> tape_of(const Variable<T>& root) {
  std::vector<std::shared_ptr<Node<T>>> nodes;
  if (!root.defined() || !root.requires_grad()) return nodes;
  std::unordered_set<const Node<T>*> seen;
  std::vector<std::shared_ptr<Node<T>>> stack{root.node()};
  seen.insert(root.node().get());
  while (!stack.empty()) {
    auto node = std::move(stack.back());
    stack.pop_back();
    for (const auto& p : node->parents) {
      if (p->requires_grad && seen.insert(p.get()).second) stack.push_back(p);
    }
    nodes.push_back(std::move(node));
  }
  std::sort(nodes.begin(), nodes.end(), [](const auto& a, const auto& b) { return a->id < b->id; });
  return nodes;
}

template <typename T>
void backward(const Variable<T>& loss) {
  if (loss.shape() != Shape{1, 1}) {
    fail(ErrorKind::kDimension, "backward: loss must be 1x1, got " + to_string(loss.shape()));
  }
  auto nodes = tape_of(loss);
  for (auto& n : nodes) {
    if (n->backward) n->grad = Tensor<T>();
  }
  if (nodes.empty()) return;
  loss.node()->grad_ref()[0] += T(1);
  for (auto it = nodes.rbegin(); it != nodes.rend(); ++it) {
    Node<T>& n = **it;
    if (n.backward && !n.grad.empty()) n.backward(n);
  }
}

// --- linear algebra ------------------------------------------------------

template <typename T>
Variable<T> matmul(const Variable<T>& a, const Variable<T>& b) {
  if (a.cols() != b.rows()) {
    fail(ErrorKind::kDimension, "matmul: inner dimensions disagree for " + to_string(a.shape()) +
                                    " and " + to_string(b.shape()));
  }
  Tensor<T> out(a.rows(), b.cols());
  gemm(Trans::kNo, Trans::kNo, T(1), a.value(), b.value(), T(0), out);
  return Variable<T>::record("matmul", std::move(out), {a, b}, [](Node<T>& self) {
    Node<T>& pa = *self.parents[0];
    Node<T>& pb = *self.parents[1];
    if (pa.requires_grad) gemm(Trans::kNo, Trans::kYes, T(1), self.grad, pb.value, T(1), pa.grad_ref());
    if (pb.requires_grad) gemm(Trans::kYes, Trans::kNo, T(1), pa.value, self.grad, T(1), pb.grad_ref());
  });
}

template <typename T>
Variable<T> linear(const Variable<T>& x, const Variable<T>& weight) {
  if (x.cols() != weight.cols()) {
    fail(ErrorKind::kDimension, "linear: input " + to_string(x.shape()) +
                                    " does not match weight " + to_string(weight.shape()));
  }
  Tensor<T> out(x.rows(), weight.rows());
  gemm(Trans::kNo, Trans::kYes, T(1), x.value(), weight.value(), T(0), out);
  return Variable<T>::record("linear", std::move(out), {x, weight}, [](Node<T>& self) {
    Node<T>& px = *self.parents[0];
    Node<T>& pw = *self.parents[1];
    if (px.requires_grad) gemm(Trans::kNo, Trans::kNo, T(1), self.grad, pw.value, T(1), px.grad_ref());
    if (pw.requires_grad) gemm(Trans::kYes, Trans::kNo, T(1), self.grad, px.value, T(1), pw.grad_ref());
  });
}

template <typename T>
Variable<T> add_bias(const Variable<T>& x, const Variable<T>& bias) {
  if (bias.rows() != 1 || bias.cols() != x.cols()) {
    fail(ErrorKind::kDimension, "add_bias: bias " + to_string(bias.shape()) +
                                    " does not match input " + to_string(x.shape()));
  }
  Tensor<T> out = x.value();
  for (std::size_t r = 0; r < out.rows(); ++r) {
    auto row = out.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) row[c] += bias.value()[c];
  }
  return Variable<T>::record("add_bias", std::move(out), {x, bias}, [](Node<T>& self) {
    accumulate(*self.parents[0], self.grad);
    Node<T>& pb = *self.parents[1];
    if (!pb.requires_grad) return;
    Tensor<T>& gb = pb.grad_ref();
    for (std::size_t r = 0; r < self.grad.rows(); ++r) {
      auto row = self.grad.row(r);
      for (std::size_t c = 0; c < row.size(); ++c) gb[c] += row[c];
    }
  });
}

// --- element-wise --------------------------------------------------------

template <typename T>
Variable<T> add(const Variable<T>& a, const Variable<T>& b) {
  Shape s = binary_shape("add", a, b);
  auto out = map_binary(s, a.value(), b.value(), [](T x, T y) { return x + y; });
  return Variable<T>::record("add", std::move(out), {a, b}, [](Node<T>& self) {
    accumulate(*self.parents[0], self.grad);
    accumulate(*self.parents[1], self.grad);
  });
}

template <typename T>
Variable<T> sub(const Variable<T>& a, const Variable<T>& b) {
  Shape s = binary_shape("sub", a, b);
  auto out = map_binary(s, a.value(), b.value(), [](T x, T y) { return x - y; });
  return Variable<T>::record("sub", std::move(out), {a, b}, [](Node<T>& self) {
    accumulate(*self.parents[0], self.grad);
    if (self.parents[1]->requires_grad) {
      accumulate(*self.parents[1], map_unary(self.grad, [](T g) { return -g; }));
    }
  });
}

template <typename T>
Variable<T> mul(const Variable<T>& a, const Variable<T>& b) {
  Shape s = binary_shape("mul", a, b);
  auto out = map_binary(s, a.value(), b.value(), [](T x, T y) { return x * y; });
  return Variable<T>::record("mul", std::move(out), {a, b}, [](Node<T>& self) {
    Node<T>& pa = *self.parents[0];
    Node<T>& pb = *self.parents[1];
    const Shape s = self.value.shape();
    if (pa.requires_grad) {
      accumulate(pa, map_binary(s, self.grad, pb.value, [](T g, T y) { return g * y; }));
    }
    if (pb.requires_grad) {
      accumulate(pb, map_binary(s, self.grad, pa.value, [](T g, T x) { return g * x; }));
    }
  });
}

namespace {

template <typename T, typename Pick>
Variable<T> extremum(const char* op, const Variable<T>& a, const Variable<T>& b, Pick first_wins) {
  Shape s = binary_shape(op, a, b);
  auto out = map_binary(s, a.value(), b.value(),
                        [&](T x, T y) { return first_wins(x, y) ? x : y; });
  return Variable<T>::record(op, std::move(out), {a, b}, [first_wins](Node<T>& self) {
    Node<T>& pa = *self.parents[0];
    Node<T>& pb = *self.parents[1];
    const Shape s = self.value.shape();
    Tensor<T> ga(s.rows, s.cols), gb(s.rows, s.cols);
    for (std::size_t i = 0; i < self.grad.size(); ++i) {
      if (first_wins(broadcast_at(pa.value, i), broadcast_at(pb.value, i))) {
        ga[i] = self.grad[i];
      } else {
        gb[i] = self.grad[i];
      }
    }
    accumulate(pa, ga);
    accumulate(pb, gb);
  });
}

}  // namespace

template <typename T>
Variable<T> min_ew(const Variable<T>& a, const Variable<T>& b) {
  return extremum("min_ew", a, b, [](T x, T y) { return x <= y; });
}

template <typename T>
Variable<T> max_ew(const Variable<T>& a, const Variable<T>& b) {
  return extremum("max_ew", a, b, [](T x, T y) { return x >= y; });
}

template <typename T>
Variable<T> scalar_scale(const Variable<T>& x, T factor) {
  auto out = map_unary(x.value(), [factor](T v) { return v * factor; });
  return Variable<T>::record("scalar_scale", std::move(out), {x}, [factor](Node<T>& self) {
    accumulate(*self.parents[0], map_unary(self.grad, [factor](T g) { return g * factor; }));
  });
}

template <typename T>
Variable<T> scalar_divide(const Variable<T>& x, T divisor) {
  if (divisor == T(0)) fail(ErrorKind::kNumeric, "scalar_divide: division by zero");
  auto out = map_unary(x.value(), [divisor](T v) { return v / divisor; });
  return Variable<T>::record("scalar_divide", std::move(out), {x}, [divisor](Node<T>& self) {
    accumulate(*self.parents[0], map_unary(self.grad, [divisor](T g) { return g / divisor; }));
  });
}

template <typename T>
Variable<T> silu(const Variable<T>& x) {
  Tensor<T> out(x.rows(), x.cols());
  kernels::silu_forward<T>(x.value().data(), out.data());
  return Variable<T>::record("silu", std::move(out), {x}, [](Node<T>& self) {
    Node<T>& px = *self.parents[0];
    Tensor<T> g(px.value.rows(), px.value.cols());
    kernels::silu_backward<T>(px.value.data(), self.grad.data(), g.data());
    accumulate(px, g);
  });
}

template <typename T>
Variable<T> tanh(const Variable<T>& x) {
  auto out = map_unary(x.value(), [](T v) { return std::tanh(v); });
  return Variable<T>::record("tanh", std::move(out), {x}, [](Node<T>& self) {
    accumulate(*self.parents[0], map_binary(self.value.shape(), self.grad, self.value,
                                            [](T g, T y) { return g * (T(1) - y * y); }));
  });
}

template <typename T>
Variable<T> exp(const Variable<T>& x) {
  auto out = map_unary(x.value(), [](T v) { return std::exp(v); });
  return Variable<T>::record("exp", std::move(out), {x}, [](Node<T>& self) {
    accumulate(*self.parents[0], map_binary(self.value.shape(), self.grad, self.value,
                                            [](T g, T y) { return g * y; }));
  });
}

template <typename T>
Variable<T> square(const Variable<T>& x) {
  auto out = map_unary(x.value(), [](T v) { return v * v; });
  return Variable<T>::record("square", std::move(out), {x}, [](Node<T>& self) {
    Node<T>& px = *self.parents[0];
    accumulate(px, map_binary(self.value.shape(), self.grad, px.value,
                              [](T g, T v) { return T(2) * v * g; }));
  });
}

// --- structural ----------------------------------------------------------

template <typename T>
Variable<T> concat_cols(std::span<const Variable<T>> parts) {
  if (parts.empty()) fail(ErrorKind::kDimension, "concat_cols: no operands");
  const std::size_t rows = parts[0].rows();
  std::size_t cols = 0;
  for (const auto& p : parts) {
    if (p.rows() != rows) {
      fail(ErrorKind::kDimension, "concat_cols: row mismatch " + to_string(parts[0].shape()) +
                                      " vs " + to_string(p.shape()));
    }
    cols += p.cols();
  }
  Tensor<T> out(rows, cols);
  std::vector<std::size_t> offsets;
  std::size_t offset = 0;
  for (const auto& p : parts) {
    offsets.push_back(offset);
    for (std::size_t r = 0; r < rows; ++r) {
      auto src = p.value().row(r);
      std::copy(src.begin(), src.end(), out.row(r).begin() + static_cast<std::ptrdiff_t>(offset));
    }
    offset += p.cols();
  }
  std::vector<Variable<T>> parents(parts.begin(), parts.end());
  return Variable<T>::record("concat_cols", std::move(out), std::move(parents),
                             [offsets](Node<T>& self) {
    for (std::size_t k = 0; k < self.parents.size(); ++k) {
      Node<T>& p = *self.parents[k];
      if (!p.requires_grad) continue;
      Tensor<T>& g = p.grad_ref();
      for (std::size_t r = 0; r < g.rows(); ++r) {
        auto src = self.grad.row(r).subspan(offsets[k], g.cols());
        auto dst = g.row(r);
        for (std::size_t c = 0; c < dst.size(); ++c) dst[c] += src[c];
      }
    }
  });
}

template <typename T>
Variable<T> slice_cols(const Variable<T>& x, std::size_t begin, std::size_t count) {
  if (begin + count > x.cols()) {
    fail(ErrorKind::kIndex, "slice_cols: [" + std::to_string(begin) + ", " +
                                std::to_string(begin + count) + ") outside " + to_string(x.shape()));
  }
  Tensor<T> out(x.rows(), count);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    auto src = x.value().row(r).subspan(begin, count);
    std::copy(src.begin(), src.end(), out.row(r).begin());
  }
  return Variable<T>::record("slice_cols", std::move(out), {x}, [begin](Node<T>& self) {
    Tensor<T>& g = self.parents[0]->grad_ref();
    for (std::size_t r = 0; r < self.grad.rows(); ++r) {
      auto src = self.grad.row(r);
      auto dst = g.row(r).subspan(begin, src.size());
      for (std::size_t c = 0; c < src.size(); ++c) dst[c] += src[c];
    }
  });
}

template <typename T>
Variable<T> sum(const Variable<T>& x) {
  T total = 0;
  for (T v : x.value().data()) total += v;
  return Variable<T>::record("sum", Tensor<T>::scalar(total), {x}, [](Node<T>& self) {
    Tensor<T>& g = self.parents[0]->grad_ref();
    const T up = self.grad[0];
    for (auto& v : g.data()) v += up;
  });
}

// --- normalization and loss ----------------------------------------------

template <typename T>
Variable<T> layer_norm(const Variable<T>& x, const Variable<T>& gamma, const Variable<T>& beta,
                       T eps) {
  const std::size_t m = x.rows();
  const std::size_t n = x.cols();
  if (n == 0) fail(ErrorKind::kDimension, "layer_norm: zero-width input");
  if (gamma.shape() != Shape{1, n} || beta.shape() != Shape{1, n}) {
    fail(ErrorKind::kDimension, "layer_norm: gamma " + to_string(gamma.shape()) + " / beta " +
                                    to_string(beta.shape()) + " do not match input " +
                                    to_string(x.shape()));
  }
  Tensor<T> normalized(m, n);
  std::vector<T> inv_std(m);
  Tensor<T> out(m, n);
  for (std::size_t r = 0; r < m; ++r) {
    auto row = x.value().row(r);
    T mean = 0;
    for (T v : row) mean += v;
    mean /= static_cast<T>(n);
    T var = 0;
    for (T v : row) var += (v - mean) * (v - mean);
    var /= static_cast<T>(n);
    inv_std[r] = T(1) / std::sqrt(var + eps);
    for (std::size_t c = 0; c < n; ++c) {
      normalized(r, c) = (row[c] - mean) * inv_std[r];
      out(r, c) = gamma.value()[c] * normalized(r, c) + beta.value()[c];
    }
  }
  return Variable<T>::record(
      "layer_norm", std::move(out), {x, gamma, beta},
      [normalized = std::move(normalized), inv_std = std::move(inv_std)](Node<T>& self) {
        Node<T>& px = *self.parents[0];
        Node<T>& pg = *self.parents[1];
        Node<T>& pb = *self.parents[2];
        const std::size_t m = self.grad.rows();
        const std::size_t n = self.grad.cols();
        if (pg.requires_grad || pb.requires_grad) {
          Tensor<T>& gg = pg.grad_ref();
          Tensor<T>& gb = pb.grad_ref();
          for (std::size_t r = 0; r < m; ++r) {
            for (std::size_t c = 0; c < n; ++c) {
              gg[c] += self.grad(r, c) * normalized(r, c);
              gb[c] += self.grad(r, c);
            }
          }
        }
        if (!px.requires_grad) return;
        Tensor<T>& gx = px.grad_ref();
        std::vector<T> dxhat(n);
        for (std::size_t r = 0; r < m; ++r) {
          T mean_d = 0;
          T mean_dx = 0;
          for (std::size_t c = 0; c < n; ++c) {
            dxhat[c] = self.grad(r, c) * pg.value[c];
            mean_d += dxhat[c];
            mean_dx += dxhat[c] * normalized(r, c);
          }
          mean_d /= static_cast<T>(n);
          mean_dx /= static_cast<T>(n);
          for (std::size_t c = 0; c < n; ++c) {
            gx(r, c) += inv_std[r] * (dxhat[c] - mean_d - normalized(r, c) * mean_dx);
          }
        }
      });
}

template <typename T>
Variable<T> softmax_cross_entropy(const Variable<T>& logits, std::span<const int> labels) {
  const std::size_t m = logits.rows();
  const std::size_t c = logits.cols();
  if (labels.size() != m) {
    fail(ErrorKind::kDimension, "softmax_cross_entropy: " + std::to_string(labels.size()) +
                                    " labels for logits " + to_string(logits.shape()));
  }
  if (m == 0) fail(ErrorKind::kDimension, "softmax_cross_entropy: empty batch");
  Tensor<T> probs(m, c);
  T total = 0;
  for (std::size_t r = 0; r < m; ++r) {
    if (labels[r] < 0 || static_cast<std::size_t>(labels[r]) >= c) {
      fail(ErrorKind::kIndex, "softmax_cross_entropy: label " + std::to_string(labels[r]) +
                                  " outside [0, " + std::to_string(c) + ")");
    }
    auto row = logits.value().row(r);
    const T peak = *std::max_element(row.begin(), row.end());
    T denom = 0;
    for (std::size_t k = 0; k < c; ++k) {
      probs(r, k) = std::exp(row[k] - peak);
      denom += probs(r, k);
    }
    for (std::size_t k = 0; k < c; ++k) probs(r, k) /= denom;
    total += std::log(denom) - (row[static_cast<std::size_t>(labels[r])] - peak);
  }
  std::vector<int> saved(labels.begin(), labels.end());
  return Variable<T>::record(
      "softmax_cross_entropy", Tensor<T>::scalar(total / static_cast<T>(m)), {logits},
      [probs = std::move(probs), saved = std::move(saved)](Node<T>& self) {
        Tensor<T>& g = self.parents[0]->grad_ref();
        const T scale = self.grad[0] / static_cast<T>(probs.rows());
        for (std::size_t r = 0; r < probs.rows(); ++r) {
          for (std::size_t k = 0; k < probs.cols(); ++k) {
            T target = static_cast<int>(k) == saved[r] ? T(1) : T(0);
            g(r, k) += scale * (probs(r, k) - target);
          }
        }
      });
}

template <typename T>
Variable<T> group_scale(const Variable<T>& weight, const Variable<T>& scaler, std::size_t group) {
  if (group == 0 || scaler.rows() != weight.rows() || scaler.cols() * group != weight.cols()) {
    fail(ErrorKind::kDimension, "group_scale: weight " + to_string(weight.shape()) +
                                    " incompatible with scaler " + to_string(scaler.shape()) +
                                    " and group " + std::to_string(group));
  }
  Tensor<T> out(weight.rows(), weight.cols());
  for (std::size_t o = 0; o < weight.rows(); ++o) {
    for (std::size_t j = 0; j < weight.cols(); ++j) {
      out(o, j) = weight.value()(o, j) * scaler.value()(o, j / group);
    }
  }
  return Variable<T>::record("group_scale", std::move(out), {weight, scaler},
                             [group](Node<T>& self) {
    Node<T>& pw = *self.parents[0];
    Node<T>& ps = *self.parents[1];
    for (std::size_t o = 0; o < self.grad.rows(); ++o) {
      for (std::size_t j = 0; j < self.grad.cols(); ++j) {
        const T g = self.grad(o, j);
        if (pw.requires_grad) pw.grad_ref()(o, j) += g * ps.value(o, j / group);
        if (ps.requires_grad) ps.grad_ref()(o, j / group) += g * pw.value(o, j);
      }
    }
  });
}

#define FCKAN_INSTANTIATE(T)                                                                   \
  template struct Node<T>;                                                                     \
  template class Variable<T>;                                                                  \
  template void backward(const Variable<T>&);                                                  \
  template std::vector<std::shared_ptr<Node<T>>> tape_of(const Variable<T>&);                  \
  template Variable<T> matmul(const Variable<T>&, const Variable<T>&);                         \
  template Variable<T> linear(const Variable<T>&, const Variable<T>&);                         \
  template Variable<T> add_bias(const Variable<T>&, const Variable<T>&);                       \
  template Variable<T> add(const Variable<T>&, const Variable<T>&);                            \
  template Variable<T> sub(const Variable<T>&, const Variable<T>&);                            \
  template Variable<T> mul(const Variable<T>&, const Variable<T>&);                            \
  template Variable<T> min_ew(const Variable<T>&, const Variable<T>&);                         \
  template Variable<T> max_ew(const Variable<T>&, const Variable<T>&);                         \
  template Variable<T> scalar_scale(const Variable<T>&, T);                                    \
  template Variable<T> scalar_divide(const Variable<T>&, T);                                   \
  template Variable<T> silu(const Variable<T>&);                                               \
  template Variable<T> tanh(const Variable<T>&);                                               \
  template Variable<T> exp(const Variable<T>&);                                                \
  template Variable<T> square(const Variable<T>&);                                             \
  template Variable<T> concat_cols(std::span<const Variable<T>>);                              \
  template Variable<T> slice_cols(const Variable<T>&, std::size_t, std::size_t);               \
  template Variable<T> sum(const Variable<T>&);                                                \
  template Variable<T> layer_norm(const Variable<T>&, const Variable<T>&, const Variable<T>&, \
                                  T);                                                          \
  template Variable<T> softmax_cross_entropy(const Variable<T>&, std::span<const int>);        \
  template Variable<T> group_scale(const Variable<T>&, const Variable<T>&, std::size_t);

FCKAN_INSTANTIATE(float)
FCKAN_INSTANTIATE(double)

#undef FCKAN_INSTANTIATE

}  // namespace fckan
