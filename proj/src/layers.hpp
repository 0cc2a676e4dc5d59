#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <vector>

#include "autodiff.hpp"
#include "basis.hpp"
#include "network_spec.hpp"
#include "rng.hpp"

namespace fckan {

template <typename T>
struct NamedParameter {
  std::string name;
  Variable<T> var;
  // false for trainable scalars that the reference totals leave out
  bool counted = true;
};

struct CensusEntry {
  std::string path;
  Shape shape;
  std::size_t count = 0;
  bool trainable = true;
  bool counted = true;
};

// U(−1/√fan_in, 1/√fan_in) drawn in row-major order. Values come from the
// double stream, so float and double models start from the same numbers.
template <typename T>
Tensor<T> kaiming_uniform(std::size_t rows, std::size_t cols, std::size_t fan_in, Rng& rng);

template <typename T>
class Layer {
 public:
  Layer(std::size_t in, std::size_t out) : in_(in), out_(out) {}
  virtual ~Layer() = default;
  Layer(const Layer&) = delete;
  Layer& operator=(const Layer&) = delete;

  virtual Variable<T> forward(const Variable<T>& x) const = 0;
  virtual std::string kind() const = 0;

  std::size_t in() const noexcept { return in_; }
  std::size_t out() const noexcept { return out_; }
  const std::vector<NamedParameter<T>>& parameters() const noexcept { return params_; }
  std::vector<NamedParameter<T>>& parameters() noexcept { return params_; }
  // Trainable parameters first, then fixed buffers.
  std::vector<CensusEntry> census() const;

 protected:
  Variable<T> add_parameter(std::string name, Tensor<T> init, bool counted = true);
  void add_buffer(std::string name, Shape shape);
  void check_input(const Variable<T>& x) const;

 private:
  std::size_t in_;
  std::size_t out_;
  std::vector<NamedParameter<T>> params_;
  std::vector<CensusEntry> buffers_;
};

// silu → linear, preceded by layer norm. Bias-free.
template <typename T>
class MlpLayer final : public Layer<T> {
 public:
  MlpLayer(std::size_t in, std::size_t out, double eps, Rng& rng);
  Variable<T> forward(const Variable<T>& x) const override;
  std::string kind() const override { return "mlp"; }

 private:
  Variable<T> gamma_, beta_, weight_;
  T eps_;
};

// base_weight·silu(x) + (spline_weight ⊙ scaler)·B(x). No normalization.
template <typename T>
class EfficientKanLayer final : public Layer<T> {
 public:
  EfficientKanLayer(std::size_t in, std::size_t out, const BSplineConfig& cfg, Rng& rng);
  Variable<T> forward(const Variable<T>& x) const override;
  std::string kind() const override { return "efficientkan"; }

  const Variable<T>& base_weight() const { return base_weight_; }
  const Variable<T>& spline_weight() const { return spline_weight_; }
  const Variable<T>& spline_scaler() const { return spline_scaler_; }

 private:
  BSplineConfig cfg_;
  Variable<T> base_weight_, spline_weight_, spline_scaler_;
};

// Ws·φ_RBF(LN(x)) + (Wb·silu(x) + b).
template <typename T>
class FastKanLayer final : public Layer<T> {
 public:
  FastKanLayer(std::size_t in, std::size_t out, const RBFConfig& cfg, double eps, Rng& rng);
  Variable<T> forward(const Variable<T>& x) const override;
  std::string kind() const override { return "fastkan"; }

  Variable<T> spline_path(const Variable<T>& x) const;
  Variable<T> base_path(const Variable<T>& x) const;

 private:
  RBFConfig cfg_;
  Variable<T> gamma_, beta_, spline_weight_, base_weight_, base_bias_;
  T eps_;
};

// W·φ_RSWAF(LN(x)) with a trainable inverse width shared by all centers.
template <typename T>
class FasterKanLayer final : public Layer<T> {
 public:
  FasterKanLayer(std::size_t in, std::size_t out, const RSWAFConfig& cfg, double eps, Rng& rng);
  Variable<T> forward(const Variable<T>& x) const override;
  std::string kind() const override { return "fasterkan"; }

  const Variable<T>& inv_denominator() const { return inv_denominator_; }

 private:
  RSWAFConfig cfg_;
  Variable<T> gamma_, beta_, inv_denominator_, weight_;
  T eps_;
};

// Wb·silu(LN(x)) + Ws·(B(LN(x)) + φ_RBF(LN(x))), one Ws for both expansions.
template <typename T>
class BsrbfLayer final : public Layer<T> {
 public:
  BsrbfLayer(std::size_t in, std::size_t out, const BSplineConfig& bs, const RBFConfig& rbf,
             double eps, Rng& rng);
  Variable<T> forward(const Variable<T>& x) const override;
  std::string kind() const override { return "bsrbf"; }

  Variable<T> normalized(const Variable<T>& x) const;
  const Variable<T>& base_weight() const { return base_weight_; }
  const Variable<T>& spline_weight() const { return spline_weight_; }
  const BSplineConfig& bspline_config() const { return bs_; }
  const RBFConfig& rbf_config() const { return rbf_; }

 private:
  BSplineConfig bs_;
  RBFConfig rbf_;  // num_grids forced to G + k
  Variable<T> gamma_, beta_, base_weight_, spline_weight_;
  T eps_;
};

// FC-KAN branch layer over one basis family without a base path: LN, then
// the expansion, then a bias-free linear map.
template <typename T>
class SplineBranchLayer final : public Layer<T> {
 public:
  SplineBranchLayer(FunctionKind basis, std::size_t in, std::size_t out, const NetworkSpec& spec,
                    Rng& rng);
  Variable<T> forward(const Variable<T>& x) const override;
  std::string kind() const override;

 private:
  FunctionKind basis_;
  BSplineConfig bs_;
  RBFConfig rbf_;
  Variable<T> gamma_, beta_, weight_;
  T eps_;
};

// Σ_i w·ψ((x − t)/s) per (out, in) pair, then layer norm over the outputs.
template <typename T>
class DogLayer final : public Layer<T> {
 public:
  DogLayer(std::size_t in, std::size_t out, double eps, Rng& rng);
  Variable<T> forward(const Variable<T>& x) const override;
  std::string kind() const override { return "dog"; }

  const Variable<T>& scale() const { return scale_; }
  const Variable<T>& translation() const { return translation_; }
  const Variable<T>& weight() const { return weight_; }
  const Variable<T>& gamma() const { return gamma_; }
  const Variable<T>& beta() const { return beta_; }

 private:
  Variable<T> scale_, translation_, weight_, gamma_, beta_;
  T eps_;
};

// Layer of a single-stack reference model.
template <typename T>
std::unique_ptr<Layer<T>> make_layer(ModelKind kind, std::size_t in, std::size_t out,
                                     const NetworkSpec& spec, Rng& rng);
// Layer of one FC-KAN branch.
template <typename T>
std::unique_ptr<Layer<T>> make_branch_layer(FunctionKind kind, std::size_t in, std::size_t out,
                                            const NetworkSpec& spec, Rng& rng);

}  // namespace fckan
