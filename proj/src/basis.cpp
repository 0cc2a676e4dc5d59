#include "basis.hpp"

#include <cmath>

#include "error.hpp"
#include "kernels.hpp"

namespace fckan {

void BSplineConfig::validate() const {
  if (grid_size < 1 || spline_order < 1 || !(lo < hi)) {
    fail(ErrorKind::kParameter, "B-spline config needs grid_size >= 1, spline_order >= 1 and lo < hi");
  }
}

std::vector<double> BSplineConfig::knots() const {
  const std::size_t count = grid_size + 2 * spline_order + 1;
  std::vector<double> t(count);
  const double h = step();
  for (std::size_t j = 0; j < count; ++j) {
    t[j] = lo + (static_cast<double>(j) - static_cast<double>(spline_order)) * h;
  }
  return t;
}

namespace {

std::vector<double> even_centers(std::size_t n, double lo, double hi) {
  std::vector<double> c(n);
  if (n == 1) {
    c[0] = 0.5 * (lo + hi);
    return c;
  }
  for (std::size_t i = 0; i < n; ++i) {
    c[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  }
  return c;
}

void validate_centers(const char* what, std::size_t n, double lo, double hi) {
  if (n < 2 || !(lo < hi)) {
    fail(ErrorKind::kParameter, std::string(what) + " config needs num_grids >= 2 and lo < hi");
  }
}

}  // namespace

void RBFConfig::validate() const {
  validate_centers("RBF", num_grids, lo, hi);
  if (width < 0.0) fail(ErrorKind::kParameter, "RBF width must be positive");
}

std::vector<double> RBFConfig::centers() const { return even_centers(num_grids, lo, hi); }

double RBFConfig::h() const {
  return width > 0.0 ? width : (hi - lo) / static_cast<double>(num_grids - 1);
}

void RSWAFConfig::validate() const { validate_centers("RSWAF", num_grids, lo, hi); }

std::vector<double> RSWAFConfig::centers() const { return even_centers(num_grids, lo, hi); }

double RSWAFConfig::initial_inv_denominator() const {
  return static_cast<double>(num_grids - 1) / (hi - lo);
}

namespace {

// Cox–de Boor over the extended knot vector. `scratch` holds one entry per
// knot interval; `derivs` may be null.
template <typename T>
void bspline_eval(T x, const std::vector<T>& t, std::size_t order, std::vector<T>& scratch,
                  T* values, T* derivs) {
  const std::size_t intervals = t.size() - 1;
  std::vector<T>& b = scratch;
  for (std::size_t i = 0; i < intervals; ++i) b[i] = (t[i] <= x && x < t[i + 1]) ? T(1) : T(0);
  for (std::size_t p = 1; p <= order; ++p) {
    if (p == order && derivs != nullptr) {
      const std::size_t n = intervals - order;
      const T k = static_cast<T>(order);
      for (std::size_t i = 0; i < n; ++i) {
        derivs[i] = k * (b[i] / (t[i + order] - t[i]) -
                         b[i + 1] / (t[i + order + 1] - t[i + 1]));
      }
    }
    const std::size_t n = intervals - p;
    for (std::size_t i = 0; i < n; ++i) {
      b[i] = (x - t[i]) / (t[i + p] - t[i]) * b[i] +
             (t[i + p + 1] - x) / (t[i + p + 1] - t[i + 1]) * b[i + 1];
    }
  }
  const std::size_t n = intervals - order;
  for (std::size_t i = 0; i < n; ++i) values[i] = b[i];
}

template <typename T>
std::vector<T> as(const std::vector<double>& v) {
  return std::vector<T>(v.begin(), v.end());
}

}  // namespace

std::vector<double> bspline_values(double x, const BSplineConfig& cfg) {
  cfg.validate();
  const auto knots = cfg.knots();
  std::vector<double> scratch(knots.size() - 1);
  std::vector<double> out(cfg.num_bases());
  bspline_eval(x, knots, cfg.spline_order, scratch, out.data(), static_cast<double*>(nullptr));
  return out;
}

template <typename T>
Variable<T> bspline_basis(const Variable<T>& x, const BSplineConfig& cfg) {
  cfg.validate();
  const auto knots = as<T>(cfg.knots());
  const std::size_t nb = cfg.num_bases();
  const std::size_t m = x.rows();
  const std::size_t n = x.cols();
  const bool need_derivs = x.requires_grad();
  Tensor<T> out(m, n * nb);
  Tensor<T> derivs = need_derivs ? Tensor<T>(m, n * nb) : Tensor<T>();
  std::vector<T> scratch(knots.size() - 1);
  for (std::size_t r = 0; r < m; ++r) {
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t at = r * n * nb + i * nb;
      bspline_eval(x.value()(r, i), knots, cfg.spline_order, scratch, out.data().data() + at,
                   need_derivs ? derivs.data().data() + at : nullptr);
    }
  }
  return Variable<T>::record("bspline_basis", std::move(out), {x},
                             [derivs = std::move(derivs), nb](Node<T>& self) {
    Tensor<T>& gx = self.parents[0]->grad_ref();
    for (std::size_t r = 0; r < gx.rows(); ++r) {
      for (std::size_t i = 0; i < gx.cols(); ++i) {
        const std::size_t at = r * gx.cols() * nb + i * nb;
        T acc = 0;
        for (std::size_t b = 0; b < nb; ++b) acc += self.grad[at + b] * derivs[at + b];
        gx(r, i) += acc;
      }
    }
  });
}

template <typename T>
Variable<T> rbf_basis(const Variable<T>& x, const RBFConfig& cfg) {
  cfg.validate();
  auto centers = as<T>(cfg.centers());
  const T inv_width = static_cast<T>(1.0 / cfg.h());
  Tensor<T> out(x.rows(), x.cols() * centers.size());
  kernels::rbf_forward<T>(x.value().data(), centers, inv_width, out.data());
  Tensor<T> phi = x.requires_grad() ? out : Tensor<T>();
  return Variable<T>::record(
      "rbf_basis", std::move(out), {x},
      [centers = std::move(centers), inv_width, phi = std::move(phi)](Node<T>& self) {
        Node<T>& px = *self.parents[0];
        kernels::rbf_backward<T>(px.value.data(), centers, inv_width, phi.data(),
                                 self.grad.data(), px.grad_ref().data());
      });
}

template <typename T>
Variable<T> rswaf_basis(const Variable<T>& x, const RSWAFConfig& cfg,
                        const Variable<T>& inv_denominator) {
  cfg.validate();
  if (inv_denominator.shape() != Shape{1, 1}) {
    fail(ErrorKind::kDimension, "rswaf_basis: inv_denominator must be 1x1, got " +
                                    to_string(inv_denominator.shape()));
  }
  auto centers = as<T>(cfg.centers());
  const T inv = inv_denominator.value()[0];
  Tensor<T> out(x.rows(), x.cols() * centers.size());
  kernels::rswaf_forward<T>(x.value().data(), centers, inv, out.data());
  return Variable<T>::record("rswaf_basis", std::move(out), {x, inv_denominator},
                             [centers = std::move(centers), inv](Node<T>& self) {
    Node<T>& px = *self.parents[0];
    Node<T>& pinv = *self.parents[1];
    std::span<T> gx = px.requires_grad ? px.grad_ref().data() : std::span<T>();
    const T g_inv = kernels::rswaf_backward<T>(px.value.data(), centers, inv, self.grad.data(), gx);
    if (pinv.requires_grad) pinv.grad_ref()[0] += g_inv;
  });
}

namespace {

template <typename T>
void check_operand(const char* op, const Variable<T>& x, const Variable<T>& p) {
  if (p.shape() != x.shape() && p.shape() != Shape{1, 1}) {
    fail(ErrorKind::kDimension, std::string(op) + ": parameter " + to_string(p.shape()) +
                                    " does not match input " + to_string(x.shape()));
  }
}

template <typename T>
T at(const Tensor<T>& t, std::size_t i) {
  return t.size() == 1 ? t[0] : t[i];
}

}  // namespace

template <typename T>
Variable<T> dog_basis(const Variable<T>& x, const Variable<T>& scale,
                      const Variable<T>& translation) {
  check_operand("dog_basis", x, scale);
  check_operand("dog_basis", x, translation);
  for (T s : scale.value().data()) {
    if (!(s > T(0))) fail(ErrorKind::kParameter, "dog_basis: scale must be positive");
  }
  Tensor<T> out(x.rows(), x.cols());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const T z = (x.value()[i] - at(translation.value(), i)) / at(scale.value(), i);
    out[i] = z * std::exp(T(-0.5) * z * z);
  }
  return Variable<T>::record("dog_basis", std::move(out), {x, scale, translation},
                             [](Node<T>& self) {
    Node<T>& px = *self.parents[0];
    Node<T>& ps = *self.parents[1];
    Node<T>& pt = *self.parents[2];
    for (std::size_t i = 0; i < self.grad.size(); ++i) {
      const T s = at(ps.value, i);
      const T z = (px.value[i] - at(pt.value, i)) / s;
      const T dz = self.grad[i] * (T(1) - z * z) * std::exp(T(-0.5) * z * z) / s;
      if (px.requires_grad) px.grad_ref()[i] += dz;
      if (pt.requires_grad) pt.grad_ref()[pt.value.size() == 1 ? 0 : i] -= dz;
      if (ps.requires_grad) ps.grad_ref()[ps.value.size() == 1 ? 0 : i] -= dz * z;
    }
  });
}

template <typename T>
Variable<T> dog_linear(const Variable<T>& x, const Variable<T>& scale,
                       const Variable<T>& translation, const Variable<T>& weight) {
  const Shape pair{weight.rows(), x.cols()};
  if (weight.cols() != x.cols() || scale.shape() != pair || translation.shape() != pair) {
    fail(ErrorKind::kDimension, "dog_linear: input " + to_string(x.shape()) + " with weight " +
                                    to_string(weight.shape()) + ", scale " +
                                    to_string(scale.shape()) + ", translation " +
                                    to_string(translation.shape()));
  }
  const kernels::DogShape shape{x.rows(), x.cols(), weight.rows()};
  Tensor<T> out(x.rows(), weight.rows());
  kernels::dog_linear_forward<T>(shape, x.value().data().data(), scale.value().data().data(),
                                 translation.value().data().data(), weight.value().data().data(),
                                 out.data().data());
  return Variable<T>::record("dog_linear", std::move(out), {x, scale, translation, weight},
                             [shape](Node<T>& self) {
    Node<T>& px = *self.parents[0];
    Node<T>& ps = *self.parents[1];
    Node<T>& pt = *self.parents[2];
    Node<T>& pw = *self.parents[3];
    auto grad_ptr = [](Node<T>& n) { return n.requires_grad ? n.grad_ref().data().data() : nullptr; };
    kernels::dog_linear_backward<T>(shape, px.value.data().data(), ps.value.data().data(),
                                    pt.value.data().data(), pw.value.data().data(),
                                    self.grad.data().data(), grad_ptr(px), grad_ptr(ps),
                                    grad_ptr(pt), grad_ptr(pw));
  });
}

#define FCKAN_INSTANTIATE(T)                                                                  \
  template Variable<T> bspline_basis(const Variable<T>&, const BSplineConfig&);               \
  template Variable<T> rbf_basis(const Variable<T>&, const RBFConfig&);                       \
  template Variable<T> rswaf_basis(const Variable<T>&, const RSWAFConfig&, const Variable<T>&); \
  template Variable<T> dog_basis(const Variable<T>&, const Variable<T>&, const Variable<T>&); \
  template Variable<T> dog_linear(const Variable<T>&, const Variable<T>&, const Variable<T>&,  \
                                  const Variable<T>&);

FCKAN_INSTANTIATE(float)
FCKAN_INSTANTIATE(double)

#undef FCKAN_INSTANTIATE

}  // namespace fckan
