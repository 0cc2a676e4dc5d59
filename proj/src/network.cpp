#include "network.hpp"

#include "error.hpp"

namespace fckan {

namespace {

template <typename T>
void require_equal_shapes(std::span<const Variable<T>> outputs) {
  if (outputs.empty()) fail(ErrorKind::kDimension, "combine: no branch outputs");
  for (const auto& o : outputs) {
    if (o.shape() != outputs[0].shape()) {
      fail(ErrorKind::kDimension, "combine: branch outputs differ in shape, " +
                                      to_string(outputs[0].shape()) + " vs " + to_string(o.shape()));
    }
  }
}

template <typename T, typename Op>
Variable<T> fold(std::span<const Variable<T>> outputs, Op op) {
  Variable<T> acc = outputs[0];
  for (std::size_t i = 1; i < outputs.size(); ++i) acc = op(acc, outputs[i]);
  return acc;
}

template <typename T>
Variable<T> affine_loop(const Variable<T>& c, const Variable<T>& w, const Variable<T>& b) {
  const std::size_t m = c.rows();
  const std::size_t k = c.cols();
  const std::size_t out = w.rows();
  if (w.cols() != k || b.shape() != Shape{1, out}) {
    fail(ErrorKind::kDimension, "concat_linear: input " + to_string(c.shape()) + " with head " +
                                    to_string(w.shape()) + " and bias " + to_string(b.shape()));
  }
  Tensor<T> y(m, out);
  for (std::size_t r = 0; r < m; ++r) {
    for (std::size_t j = 0; j < out; ++j) {
      T acc = b.value()[j];
      for (std::size_t q = 0; q < k; ++q) acc += w.value()(j, q) * c.value()(r, q);
      y(r, j) = acc;
    }
  }
  return Variable<T>::record("concat_linear", std::move(y), {c, w, b}, [](Node<T>& self) {
    Node<T>& pc = *self.parents[0];
    Node<T>& pw = *self.parents[1];
    Node<T>& pb = *self.parents[2];
    const std::size_t m = pc.value.rows();
    const std::size_t k = pc.value.cols();
    const std::size_t out = pw.value.rows();
    for (std::size_t r = 0; r < m; ++r) {
      for (std::size_t j = 0; j < out; ++j) {
        const T g = self.grad(r, j);
        if (pb.requires_grad) pb.grad_ref()[j] += g;
        for (std::size_t q = 0; q < k; ++q) {
          if (pw.requires_grad) pw.grad_ref()(j, q) += g * pc.value(r, q);
          if (pc.requires_grad) pc.grad_ref()(r, q) += g * pw.value(j, q);
        }
      }
    }
  });
}

}  // namespace

template <typename T>
Variable<T> concat_linear(std::span<const Variable<T>> outputs, const Variable<T>& weight,
                          const Variable<T>& bias) {
  require_equal_shapes(outputs);
  return affine_loop(concat_cols(outputs), weight, bias);
}

template <typename T>
Variable<T> quadratic_pair(const Variable<T>& a, const Variable<T>& b) {
  if (a.shape() != b.shape()) {
    fail(ErrorKind::kDimension, "quadratic_pair: shape mismatch " + to_string(a.shape()) + " vs " +
                                    to_string(b.shape()));
  }
  return add(add(add(add(a, b), mul(a, b)), square(a)), square(b));
}

template <typename T>
Variable<T> combine(std::span<const Variable<T>> outputs, CombineMethod method,
                    const Variable<T>* head_weight, const Variable<T>* head_bias) {
  require_equal_shapes(outputs);
  auto sum_all = [&] { return fold(outputs, [](auto& a, auto& b) { return add(a, b); }); };
  auto prod_all = [&] { return fold(outputs, [](auto& a, auto& b) { return mul(a, b); }); };
  auto quadratic = [&](const Variable<T>& sum) {
    Variable<T> acc = add(sum, prod_all());
    for (const auto& o : outputs) acc = add(acc, square(o));
    return acc;
  };
  switch (method) {
    case CombineMethod::kSum:
      return sum_all();
    case CombineMethod::kProduct:
      return prod_all();
    case CombineMethod::kSumProduct:
      return add(sum_all(), prod_all());
    case CombineMethod::kQuadratic:
      return quadratic(sum_all());
    case CombineMethod::kCubic: {
      Variable<T> sum = sum_all();
      return mul(quadratic(sum), sum);
    }
    case CombineMethod::kConcat:
      return concat_cols(outputs);
    case CombineMethod::kConcatLinear:
      if (head_weight == nullptr || head_bias == nullptr || !head_weight->defined() ||
          !head_bias->defined()) {
        fail(ErrorKind::kConfig, "combine: concat_linear needs a head weight and bias");
      }
      return concat_linear(outputs, *head_weight, *head_bias);
    case CombineMethod::kMin:
      return fold(outputs, [](auto& a, auto& b) { return min_ew(a, b); });
    case CombineMethod::kMax:
      return fold(outputs, [](auto& a, auto& b) { return max_ew(a, b); });
    case CombineMethod::kAverage:
      return scalar_divide(sum_all(), static_cast<T>(outputs.size()));
  }
  fail(ErrorKind::kConfig, "combine: unknown method");
}

template <typename T>
Tensor<T> concat_readout(const Tensor<T>& wide, std::size_t classes) {
  if (classes == 0 || wide.cols() % classes != 0) {
    fail(ErrorKind::kDimension, "concat_readout: width " + std::to_string(wide.cols()) +
                                    " is not a multiple of " + std::to_string(classes));
  }
  Tensor<T> out(wide.rows(), classes);
  for (std::size_t r = 0; r < wide.rows(); ++r) {
    for (std::size_t s = 0; s < wide.cols(); s += classes) {
      for (std::size_t c = 0; c < classes; ++c) out(r, c) += wide(r, s + c);
    }
  }
  return out;
}

// --- Model -------------------------------------------------------------------

template <typename T>
Model<T>::Model(NetworkSpec spec, std::uint64_t seed) : spec_(std::move(spec)) {
  spec_.validate();
  Rng rng(seed);
  const auto& w = spec_.widths;
  if (is_fckan()) {
    for (FunctionKind f : spec_.functions) {
      auto& stack = stacks_.emplace_back();
      for (std::size_t l = 0; l + 1 < w.size(); ++l) {
        stack.push_back(make_branch_layer<T>(f, w[l], w[l + 1], spec_, rng));
      }
    }
    if (spec_.combine == CombineMethod::kConcatLinear) {
      const std::size_t c = num_classes();
      const std::size_t fan_in = stacks_.size() * c;
      head_weight_ = Variable<T>(kaiming_uniform<T>(c, fan_in, fan_in, rng), true);
      head_bias_ = Variable<T>(kaiming_uniform<T>(1, c, fan_in, rng), true);
    }
  } else {
    auto& stack = stacks_.emplace_back();
    for (std::size_t l = 0; l + 1 < w.size(); ++l) {
      stack.push_back(make_layer<T>(spec_.model, w[l], w[l + 1], spec_, rng));
    }
  }
}

template <typename T>
std::size_t Model<T>::output_width() const noexcept {
  if (is_fckan() && spec_.combine == CombineMethod::kConcat) return stacks_.size() * num_classes();
  return num_classes();
}

template <typename T>
std::string Model<T>::branch_name(std::size_t i) const {
  return is_fckan() ? std::string(name_of(spec_.functions.at(i))) : std::string();
}

template <typename T>
std::vector<Variable<T>> Model<T>::branch_outputs(const Variable<T>& x) const {
  if (x.cols() != spec_.widths.front()) {
    fail(ErrorKind::kDimension, "model expects " + std::to_string(spec_.widths.front()) +
                                    " input columns, got " + to_string(x.shape()));
  }
  std::vector<Variable<T>> outs;
  outs.reserve(stacks_.size());
  for (const auto& stack : stacks_) {
    Variable<T> h = x;
    for (const auto& layer : stack) h = layer->forward(h);
    outs.push_back(std::move(h));
  }
  return outs;
}

template <typename T>
Variable<T> Model<T>::forward(const Variable<T>& x) const {
  auto outs = branch_outputs(x);
  if (!is_fckan()) return outs.front();
  return combine<T>(outs, spec_.combine, &head_weight_, &head_bias_);
}

template <typename T>
Tensor<T> Model<T>::readout(const Tensor<T>& output) const {
  if (is_fckan() && spec_.combine == CombineMethod::kConcat) {
    return concat_readout(output, num_classes());
  }
  return output;
}

template <typename T>
Tensor<T> Model<T>::predict(const Tensor<T>& x) const {
  NoGradGuard guard;
  return readout(forward(Variable<T>(x)).value());
}

template <typename T>
std::vector<NamedParameter<T>> Model<T>::parameters() const {
  std::vector<NamedParameter<T>> out;
  for (std::size_t b = 0; b < stacks_.size(); ++b) {
    const std::string prefix = is_fckan() ? branch_name(b) + ".layers." : "layers.";
    for (std::size_t l = 0; l < stacks_[b].size(); ++l) {
      for (const auto& p : stacks_[b][l]->parameters()) {
        out.push_back({prefix + std::to_string(l) + "." + p.name, p.var, p.counted});
      }
    }
  }
  if (head_weight_.defined()) {
    out.push_back({"head.weight", head_weight_, true});
    out.push_back({"head.bias", head_bias_, true});
  }
  return out;
}

template <typename T>
Census Model<T>::census() const {
  Census c;
  for (std::size_t b = 0; b < stacks_.size(); ++b) {
    const std::string prefix = is_fckan() ? branch_name(b) + ".layers." : "layers.";
    for (std::size_t l = 0; l < stacks_[b].size(); ++l) {
      for (auto e : stacks_[b][l]->census()) {
        e.path = prefix + std::to_string(l) + "." + e.path;
        c.entries.push_back(std::move(e));
      }
    }
  }
  if (head_weight_.defined()) {
    c.entries.push_back({"head.weight", head_weight_.shape(), head_weight_.value().size(), true, true});
    c.entries.push_back({"head.bias", head_bias_.shape(), head_bias_.value().size(), true, true});
  }
  for (const auto& e : c.entries) {
    if (e.trainable) c.trainable_total += e.count;
    if (e.trainable && e.counted) c.counted_total += e.count;
    if (!e.trainable) c.buffer_total += e.count;
  }
  return c;
}

#define FCKAN_INSTANTIATE(T)                                                                  \
  template Variable<T> combine(std::span<const Variable<T>>, CombineMethod, const Variable<T>*, \
                               const Variable<T>*);                                           \
  template Variable<T> quadratic_pair(const Variable<T>&, const Variable<T>&);                \
  template Variable<T> concat_linear(std::span<const Variable<T>>, const Variable<T>&,        \
                                     const Variable<T>&);                                     \
  template Tensor<T> concat_readout(const Tensor<T>&, std::size_t);                           \
  template class Model<T>;

FCKAN_INSTANTIATE(float)
FCKAN_INSTANTIATE(double)

#undef FCKAN_INSTANTIATE

}  // namespace fckan
