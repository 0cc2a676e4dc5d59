#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "tensor.hpp"

namespace fckan {

// One recorded operation (or a leaf). Parents always carry smaller ids than
// their children, so sorting by id gives a topological order of the tape.
template <typename T>
struct Node {
  Tensor<T> value;
  Tensor<T> grad;  // empty until something flows into it
  bool requires_grad = false;
  std::uint64_t id = 0;
  std::string op;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward;

  Tensor<T>& grad_ref();
};

template <typename T>
class Variable {
 public:
  Variable() = default;
  explicit Variable(Tensor<T> value, bool requires_grad = false);

  // Records an op node. The node requires grad iff any parent does; `backward`
  // is dropped otherwise. Non-finite forward values raise a numeric error.
  static Variable record(std::string op, Tensor<T> value, std::vector<Variable> parents,
                         std::function<void(Node<T>&)> backward);

  bool defined() const noexcept { return node_ != nullptr; }
  const Tensor<T>& value() const { return node_->value; }
  Tensor<T>& mutable_value() { return node_->value; }
  // Gradient of the last backward pass; zeros if nothing reached this node.
  const Tensor<T>& grad() const;
  Tensor<T>& mutable_grad() { return node_->grad_ref(); }
  void zero_grad();

  bool requires_grad() const noexcept { return node_->requires_grad; }
  std::uint64_t id() const noexcept { return node_->id; }
  Shape shape() const noexcept { return node_->value.shape(); }
  std::size_t rows() const noexcept { return node_->value.rows(); }
  std::size_t cols() const noexcept { return node_->value.cols(); }

  const std::shared_ptr<Node<T>>& node() const noexcept { return node_; }

 private:
  std::shared_ptr<Node<T>> node_;
};

// Recording is on by default. While a guard is alive, ops on this thread
// produce constants (no parents, no backward closure).
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};
bool grad_enabled() noexcept;

// Reverse sweep from a 1×1 loss. Interior gradients are reset first; leaf
// gradients accumulate, so callers clear parameters between steps.
template <typename T>
void backward(const Variable<T>& loss);

// Nodes reachable from `root` that carry gradients, in recording order.
template <typename T>
std::vector<std::shared_ptr<Node<T>>> tape_of(const Variable<T>& root);

// --- differentiable primitives -------------------------------------------

template <typename T> Variable<T> matmul(const Variable<T>& a, const Variable<T>& b);
// x·Wᵀ, the layout every linear map in the library uses (W is out×in).
template <typename T> Variable<T> linear(const Variable<T>& x, const Variable<T>& weight);
// x + b with b a 1×cols row repeated over the batch.
template <typename T> Variable<T> add_bias(const Variable<T>& x, const Variable<T>& bias);

// Binary element-wise ops need equal shapes; a 1×1 operand broadcasts.
template <typename T> Variable<T> add(const Variable<T>& a, const Variable<T>& b);
template <typename T> Variable<T> sub(const Variable<T>& a, const Variable<T>& b);
template <typename T> Variable<T> mul(const Variable<T>& a, const Variable<T>& b);
// On exact ties the gradient goes to `a`.
template <typename T> Variable<T> min_ew(const Variable<T>& a, const Variable<T>& b);
template <typename T> Variable<T> max_ew(const Variable<T>& a, const Variable<T>& b);

template <typename T> Variable<T> scalar_scale(const Variable<T>& x, T factor);
template <typename T> Variable<T> scalar_divide(const Variable<T>& x, T divisor);

template <typename T> Variable<T> silu(const Variable<T>& x);
template <typename T> Variable<T> tanh(const Variable<T>& x);
template <typename T> Variable<T> exp(const Variable<T>& x);
template <typename T> Variable<T> square(const Variable<T>& x);

template <typename T> Variable<T> concat_cols(std::span<const Variable<T>> parts);
template <typename T>
Variable<T> slice_cols(const Variable<T>& x, std::size_t begin, std::size_t count);

template <typename T> Variable<T> sum(const Variable<T>& x);

// Per-row standardization, then gamma ⊙ x̂ + beta (gamma, beta are 1×n).
template <typename T>
Variable<T> layer_norm(const Variable<T>& x, const Variable<T>& gamma, const Variable<T>& beta,
                       T eps = T(1e-5));

// Mean over rows of -log softmax(logits)[label].
template <typename T>
Variable<T> softmax_cross_entropy(const Variable<T>& logits, std::span<const int> labels);

// W[o, i·group + g] · S[o, i]: per-(out, in) scale over groups of columns.
template <typename T>
Variable<T> group_scale(const Variable<T>& weight, const Variable<T>& scaler, std::size_t group);

}  // namespace fckan
