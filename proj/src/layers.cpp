#include "layers.hpp"

#include <cmath>

#include "error.hpp"

namespace fckan {

template <typename T>
Tensor<T> kaiming_uniform(std::size_t rows, std::size_t cols, std::size_t fan_in, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  Tensor<T> out(rows, cols);
  for (T& v : out.data()) v = static_cast<T>(rng.uniform(-bound, bound));
  return out;
}

template <typename T>
std::vector<CensusEntry> Layer<T>::census() const {
  std::vector<CensusEntry> out;
  for (const auto& p : params_) {
    out.push_back({p.name, p.var.shape(), p.var.value().size(), true, p.counted});
  }
  out.insert(out.end(), buffers_.begin(), buffers_.end());
  return out;
}

template <typename T>
Variable<T> Layer<T>::add_parameter(std::string name, Tensor<T> init, bool counted) {
  Variable<T> v(std::move(init), true);
  params_.push_back({std::move(name), v, counted});
  return v;
}

template <typename T>
void Layer<T>::add_buffer(std::string name, Shape shape) {
  buffers_.push_back({std::move(name), shape, shape.rows * shape.cols, false, false});
}

template <typename T>
void Layer<T>::check_input(const Variable<T>& x) const {
  if (x.cols() != in_) {
    fail(ErrorKind::kDimension, kind() + " layer expects " + std::to_string(in_) +
                                    " input columns, got " + to_string(x.shape()));
  }
}

namespace {

template <typename T>
Tensor<T> ones(std::size_t n) {
  return Tensor<T>(1, n, T(1));
}

template <typename T>
Tensor<T> zeros(std::size_t rows, std::size_t cols) {
  return Tensor<T>(rows, cols);
}

}  // namespace

// --- MLP ---------------------------------------------------------------------

template <typename T>
MlpLayer<T>::MlpLayer(std::size_t in, std::size_t out, double eps, Rng& rng)
    : Layer<T>(in, out), eps_(static_cast<T>(eps)) {
  gamma_ = this->add_parameter("norm.gamma", ones<T>(in));
  beta_ = this->add_parameter("norm.beta", zeros<T>(1, in));
  weight_ = this->add_parameter("weight", kaiming_uniform<T>(out, in, in, rng));
}

template <typename T>
Variable<T> MlpLayer<T>::forward(const Variable<T>& x) const {
  this->check_input(x);
  return linear(silu(layer_norm(x, gamma_, beta_, eps_)), weight_);
}

// --- EfficientKAN ------------------------------------------------------------

template <typename T>
EfficientKanLayer<T>::EfficientKanLayer(std::size_t in, std::size_t out, const BSplineConfig& cfg,
                                        Rng& rng)
    : Layer<T>(in, out), cfg_(cfg) {
  cfg_.validate();
  const std::size_t k = cfg_.num_bases();
  base_weight_ = this->add_parameter("base_weight", kaiming_uniform<T>(out, in, in, rng));
  spline_weight_ =
      this->add_parameter("spline_weight", kaiming_uniform<T>(out, in * k, in * k, rng));
  spline_scaler_ = this->add_parameter("spline_scaler", kaiming_uniform<T>(out, in, in, rng));
  this->add_buffer("knots", {1, cfg_.knots().size()});
}

template <typename T>
Variable<T> EfficientKanLayer<T>::forward(const Variable<T>& x) const {
  this->check_input(x);
  Variable<T> base = linear(silu(x), base_weight_);
  Variable<T> scaled = group_scale(spline_weight_, spline_scaler_, cfg_.num_bases());
  return add(base, linear(bspline_basis(x, cfg_), scaled));
}

// --- FastKAN -----------------------------------------------------------------

template <typename T>
FastKanLayer<T>::FastKanLayer(std::size_t in, std::size_t out, const RBFConfig& cfg, double eps,
                              Rng& rng)
    : Layer<T>(in, out), cfg_(cfg), eps_(static_cast<T>(eps)) {
  cfg_.validate();
  const std::size_t n = cfg_.num_grids;
  gamma_ = this->add_parameter("norm.gamma", ones<T>(in));
  beta_ = this->add_parameter("norm.beta", zeros<T>(1, in));
  spline_weight_ =
      this->add_parameter("spline_weight", kaiming_uniform<T>(out, in * n, in * n, rng));
  base_weight_ = this->add_parameter("base_weight", kaiming_uniform<T>(out, in, in, rng));
  base_bias_ = this->add_parameter("base_bias", kaiming_uniform<T>(1, out, in, rng));
  this->add_buffer("centers", {1, n});
}

template <typename T>
Variable<T> FastKanLayer<T>::spline_path(const Variable<T>& x) const {
  this->check_input(x);
  return linear(rbf_basis(layer_norm(x, gamma_, beta_, eps_), cfg_), spline_weight_);
}

template <typename T>
Variable<T> FastKanLayer<T>::base_path(const Variable<T>& x) const {
  this->check_input(x);
  return add_bias(linear(silu(x), base_weight_), base_bias_);
}

template <typename T>
Variable<T> FastKanLayer<T>::forward(const Variable<T>& x) const {
  return add(spline_path(x), base_path(x));
}

// --- FasterKAN ---------------------------------------------------------------

template <typename T>
FasterKanLayer<T>::FasterKanLayer(std::size_t in, std::size_t out, const RSWAFConfig& cfg,
                                  double eps, Rng& rng)
    : Layer<T>(in, out), cfg_(cfg), eps_(static_cast<T>(eps)) {
  cfg_.validate();
  const std::size_t n = cfg_.num_grids;
  gamma_ = this->add_parameter("norm.gamma", ones<T>(in));
  beta_ = this->add_parameter("norm.beta", zeros<T>(1, in));
  inv_denominator_ = this->add_parameter(
      "inv_denominator", Tensor<T>::scalar(static_cast<T>(cfg_.initial_inv_denominator())), false);
  weight_ = this->add_parameter("weight", kaiming_uniform<T>(out, in * n, in * n, rng));
  this->add_buffer("centers", {1, n});
}

template <typename T>
Variable<T> FasterKanLayer<T>::forward(const Variable<T>& x) const {
  this->check_input(x);
  return linear(rswaf_basis(layer_norm(x, gamma_, beta_, eps_), cfg_, inv_denominator_), weight_);
}

// --- BSRBF -------------------------------------------------------------------

template <typename T>
BsrbfLayer<T>::BsrbfLayer(std::size_t in, std::size_t out, const BSplineConfig& bs,
                          const RBFConfig& rbf, double eps, Rng& rng)
    : Layer<T>(in, out), bs_(bs), rbf_(rbf), eps_(static_cast<T>(eps)) {
  bs_.validate();
  rbf_.num_grids = bs_.num_bases();
  rbf_.validate();
  const std::size_t k = bs_.num_bases();
  gamma_ = this->add_parameter("norm.gamma", ones<T>(in));
  beta_ = this->add_parameter("norm.beta", zeros<T>(1, in));
  base_weight_ = this->add_parameter("base_weight", kaiming_uniform<T>(out, in, in, rng));
  spline_weight_ =
      this->add_parameter("spline_weight", kaiming_uniform<T>(out, in * k, in * k, rng));
  this->add_buffer("knots", {1, bs_.knots().size()});
  this->add_buffer("centers", {1, k});
}

template <typename T>
Variable<T> BsrbfLayer<T>::normalized(const Variable<T>& x) const {
  this->check_input(x);
  return layer_norm(x, gamma_, beta_, eps_);
}

template <typename T>
Variable<T> BsrbfLayer<T>::forward(const Variable<T>& x) const {
  Variable<T> xn = normalized(x);
  Variable<T> base = linear(silu(xn), base_weight_);
  Variable<T> expansion = add(bspline_basis(xn, bs_), rbf_basis(xn, rbf_));
  return add(base, linear(expansion, spline_weight_));
}

// --- FC-KAN branch layers ----------------------------------------------------

template <typename T>
SplineBranchLayer<T>::SplineBranchLayer(FunctionKind basis, std::size_t in, std::size_t out,
                                        const NetworkSpec& spec, Rng& rng)
    : Layer<T>(in, out),
      basis_(basis),
      bs_(spec.bspline),
      rbf_(spec.rbf),
      eps_(static_cast<T>(spec.layer_norm_eps)) {
  if (basis != FunctionKind::kBS && basis != FunctionKind::kRBF) {
    fail(ErrorKind::kConfig, "spline branch layer takes bs or rbf");
  }
  const bool is_bs = basis == FunctionKind::kBS;
  const std::size_t k = is_bs ? bs_.num_bases() : rbf_.num_grids;
  gamma_ = this->add_parameter("norm.gamma", ones<T>(in));
  beta_ = this->add_parameter("norm.beta", zeros<T>(1, in));
  weight_ = this->add_parameter("spline_weight", kaiming_uniform<T>(out, in * k, in * k, rng));
  if (is_bs) {
    this->add_buffer("knots", {1, bs_.knots().size()});
  } else {
    this->add_buffer("centers", {1, k});
  }
}

template <typename T>
std::string SplineBranchLayer<T>::kind() const {
  return std::string(name_of(basis_));
}

template <typename T>
Variable<T> SplineBranchLayer<T>::forward(const Variable<T>& x) const {
  this->check_input(x);
  Variable<T> xn = layer_norm(x, gamma_, beta_, eps_);
  Variable<T> expanded = basis_ == FunctionKind::kBS ? bspline_basis(xn, bs_) : rbf_basis(xn, rbf_);
  return linear(expanded, weight_);
}

template <typename T>
DogLayer<T>::DogLayer(std::size_t in, std::size_t out, double eps, Rng& rng)
    : Layer<T>(in, out), eps_(static_cast<T>(eps)) {
  scale_ = this->add_parameter("scale", Tensor<T>(out, in, T(1)));
  translation_ = this->add_parameter("translation", zeros<T>(out, in));
  weight_ = this->add_parameter("weight", kaiming_uniform<T>(out, in, in, rng));
  gamma_ = this->add_parameter("norm.gamma", ones<T>(out));
  beta_ = this->add_parameter("norm.beta", zeros<T>(1, out));
}

template <typename T>
Variable<T> DogLayer<T>::forward(const Variable<T>& x) const {
  this->check_input(x);
  return layer_norm(dog_linear(x, scale_, translation_, weight_), gamma_, beta_, eps_);
}

// --- factories ---------------------------------------------------------------

template <typename T>
std::unique_ptr<Layer<T>> make_layer(ModelKind kind, std::size_t in, std::size_t out,
                                     const NetworkSpec& spec, Rng& rng) {
  const double eps = spec.layer_norm_eps;
  switch (kind) {
    case ModelKind::kMlp:
      return std::make_unique<MlpLayer<T>>(in, out, eps, rng);
    case ModelKind::kEfficientKan:
      return std::make_unique<EfficientKanLayer<T>>(in, out, spec.bspline, rng);
    case ModelKind::kFastKan:
      return std::make_unique<FastKanLayer<T>>(in, out, spec.rbf, eps, rng);
    case ModelKind::kFasterKan:
      return std::make_unique<FasterKanLayer<T>>(in, out, spec.rswaf, eps, rng);
    case ModelKind::kBsrbf:
      return std::make_unique<BsrbfLayer<T>>(in, out, spec.bspline, spec.rbf, eps, rng);
    case ModelKind::kFcKan:
      break;
  }
  fail(ErrorKind::kConfig, "make_layer: FC-KAN layers are built per branch");
}

template <typename T>
std::unique_ptr<Layer<T>> make_branch_layer(FunctionKind kind, std::size_t in, std::size_t out,
                                            const NetworkSpec& spec, Rng& rng) {
  switch (kind) {
    case FunctionKind::kBS:
    case FunctionKind::kRBF:
      return std::make_unique<SplineBranchLayer<T>>(kind, in, out, spec, rng);
    case FunctionKind::kDoG:
      return std::make_unique<DogLayer<T>>(in, out, spec.layer_norm_eps, rng);
    case FunctionKind::kBase:
      return std::make_unique<MlpLayer<T>>(in, out, spec.layer_norm_eps, rng);
  }
  fail(ErrorKind::kConfig, "make_branch_layer: unknown function kind");
}

#define FCKAN_INSTANTIATE(T)                                                                  \
  template Tensor<T> kaiming_uniform<T>(std::size_t, std::size_t, std::size_t, Rng&);         \
  template class Layer<T>;                                                                    \
  template class MlpLayer<T>;                                                                 \
  template class EfficientKanLayer<T>;                                                        \
  template class FastKanLayer<T>;                                                             \
  template class FasterKanLayer<T>;                                                           \
  template class BsrbfLayer<T>;                                                               \
  template class SplineBranchLayer<T>;                                                        \
  template class DogLayer<T>;                                                                 \
  template std::unique_ptr<Layer<T>> make_layer<T>(ModelKind, std::size_t, std::size_t,       \
                                                   const NetworkSpec&, Rng&);                 \
  template std::unique_ptr<Layer<T>> make_branch_layer<T>(FunctionKind, std::size_t,          \
                                                          std::size_t, const NetworkSpec&, Rng&);

FCKAN_INSTANTIATE(float)
FCKAN_INSTANTIATE(double)

#undef FCKAN_INSTANTIATE

}  // namespace fckan
