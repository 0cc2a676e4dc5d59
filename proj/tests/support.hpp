#pragma once

// Shared by the unit tests and the acceptance binary: random fixtures,
// central-difference gradient checks and scalar-loop reference versions of
// the bases and output combinations.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "autodiff.hpp"
#include "basis.hpp"
#include "layers.hpp"
#include "network.hpp"
#include "rng.hpp"

namespace fckan::testing {

template <typename T = double>
inline Tensor<T> random_tensor(std::size_t rows, std::size_t cols, Rng& rng, double lo = -1.0,
                               double hi = 1.0) {
  Tensor<T> t(rows, cols);
  for (auto& v : t.data()) v = static_cast<T>(rng.uniform(lo, hi));
  return t;
}

inline std::size_t pick(Rng& rng, std::size_t lo, std::size_t hi) {
  return lo + static_cast<std::size_t>(rng.below(hi - lo + 1));
}

// ---------------------------------------------------------------------------
// Finite differences

struct GradCheck {
  double max_error = 0.0;  // worst per-coordinate relative error
  std::size_t coordinates = 0;
};

inline constexpr double kFdStep = 1e-5;
inline constexpr double kFdFloor = 1e-3;

// |a − n| / max(|a|, |n|, floor)
inline double relative_error(double analytic, double numeric) {
  const double scale = std::max({std::fabs(analytic), std::fabs(numeric), kFdFloor});
  return std::fabs(analytic - numeric) / scale;
}

// Compares reverse-mode gradients of the scalar `loss()` with respect to each
// leaf against central differences, one coordinate at a time.
inline GradCheck check_gradients(std::vector<Variable<double>> leaves,
                                 const std::function<Variable<double>()>& loss) {
  for (auto& leaf : leaves) leaf.zero_grad();
  backward(loss());
  std::vector<Tensor<double>> analytic;
  for (const auto& leaf : leaves) analytic.push_back(leaf.grad());

  auto value = [&] {
    NoGradGuard guard;
    return loss().value().item();
  };
  GradCheck out;
  for (std::size_t l = 0; l < leaves.size(); ++l) {
    Tensor<double>& v = leaves[l].mutable_value();
    for (std::size_t i = 0; i < v.size(); ++i) {
      const double saved = v[i];
      v[i] = saved + kFdStep;
      const double up = value();
      v[i] = saved - kFdStep;
      const double down = value();
      v[i] = saved;
      const double numeric = (up - down) / (2.0 * kFdStep);
      out.max_error = std::max(out.max_error, relative_error(analytic[l][i], numeric));
      ++out.coordinates;
    }
  }
  return out;
}

// Σ y ⊙ R for a fixed random R, so every output entry gets its own weight.
inline Variable<double> weighted_sum(const Variable<double>& y, const Tensor<double>& weights) {
  return sum(mul(y, Variable<double>(weights)));
}

inline Variable<double> leaf(Tensor<double> value) { return Variable<double>(std::move(value), true); }

// ---------------------------------------------------------------------------
// Layer cases

inline const std::vector<std::string>& layer_case_kinds() {
  static const std::vector<std::string> kinds{"mlp",       "efficientkan", "fastkan",
                                              "fasterkan", "bsrbf",        "branch_bs",
                                              "branch_rbf", "dog"};
  return kinds;
}

inline std::unique_ptr<Layer<double>> random_layer(const std::string& kind, std::size_t in,
                                                   std::size_t out, Rng& rng) {
  NetworkSpec spec;
  // Order ≥ 2 keeps the splines C¹, so central differences stay accurate.
  spec.bspline.grid_size = pick(rng, 1, 5);
  spec.bspline.spline_order = pick(rng, 2, 3);
  spec.rbf.num_grids = pick(rng, 2, 8);
  spec.rswaf.num_grids = pick(rng, 2, 8);
  Rng init(rng.next());
  if (kind == "mlp") return make_layer<double>(ModelKind::kMlp, in, out, spec, init);
  if (kind == "efficientkan") return make_layer<double>(ModelKind::kEfficientKan, in, out, spec, init);
  if (kind == "fastkan") return make_layer<double>(ModelKind::kFastKan, in, out, spec, init);
  if (kind == "fasterkan") return make_layer<double>(ModelKind::kFasterKan, in, out, spec, init);
  if (kind == "bsrbf") return make_layer<double>(ModelKind::kBsrbf, in, out, spec, init);
  if (kind == "branch_bs") return make_branch_layer<double>(FunctionKind::kBS, in, out, spec, init);
  if (kind == "branch_rbf") return make_branch_layer<double>(FunctionKind::kRBF, in, out, spec, init);
  return make_branch_layer<double>(FunctionKind::kDoG, in, out, spec, init);
}

// One random instance: input and every parameter perturbed off their
// initial values, all checked.
inline GradCheck layer_case(const std::string& kind, Rng& rng) {
  const std::size_t in = pick(rng, 2, 5), out = pick(rng, 1, 3), batch = pick(rng, 1, 3);
  auto layer = random_layer(kind, in, out, rng);
  std::vector<Variable<double>> leaves{leaf(random_tensor(batch, in, rng, -1.5, 1.5))};
  for (auto& p : layer->parameters()) {
    Tensor<double>& v = p.var.mutable_value();
    const bool positive = p.name == "scale" || p.name == "inv_denominator";
    for (auto& x : v.data()) x = positive ? rng.uniform(0.6, 1.8) : x + rng.uniform(-0.3, 0.3);
    leaves.push_back(p.var);
  }
  const Tensor<double> weights = random_tensor(batch, out, rng);
  const Variable<double> x = leaves[0];
  return check_gradients(leaves, [&] { return weighted_sum(layer->forward(x), weights); });
}

// ---------------------------------------------------------------------------
// Basis cases

inline const std::vector<std::string>& basis_case_kinds() {
  static const std::vector<std::string> kinds{"bspline", "rbf", "rswaf", "dog", "dog_linear"};
  return kinds;
}

inline GradCheck basis_case(const std::string& kind, Rng& rng) {
  const std::size_t rows = pick(rng, 1, 3), cols = pick(rng, 1, 4);
  Tensor<double> xv = random_tensor(rows, cols, rng, -1.5, 1.5);
  if (kind == "bspline") {
    BSplineConfig cfg{pick(rng, 1, 8), pick(rng, 1, 3), -1.0, 1.0};
    // Order 1 is only C⁰ at the knots; keep samples clear of them.
    const auto knots = cfg.knots();
    for (auto& v : xv.data()) {
      for (double t : knots) {
        if (std::fabs(v - t) < 1e-3) v = t + 2e-3;
      }
    }
    const std::size_t width = cols * cfg.num_bases();
    const Tensor<double> w = random_tensor(rows, width, rng);
    Variable<double> x = leaf(xv);
    return check_gradients({x}, [&] { return weighted_sum(bspline_basis(x, cfg), w); });
  }
  if (kind == "rbf") {
    RBFConfig cfg;
    cfg.num_grids = pick(rng, 2, 8);
    if (rng.below(2) == 1) cfg.width = rng.uniform(0.2, 1.5);
    const Tensor<double> w = random_tensor(rows, cols * cfg.num_grids, rng);
    Variable<double> x = leaf(xv);
    return check_gradients({x}, [&] { return weighted_sum(rbf_basis(x, cfg), w); });
  }
  if (kind == "rswaf") {
    RSWAFConfig cfg;
    cfg.num_grids = pick(rng, 2, 8);
    const Tensor<double> w = random_tensor(rows, cols * cfg.num_grids, rng);
    Variable<double> x = leaf(xv);
    Variable<double> inv = leaf(Tensor<double>::scalar(rng.uniform(0.5, 2.5)));
    return check_gradients({x, inv}, [&] { return weighted_sum(rswaf_basis(x, cfg, inv), w); });
  }
  if (kind == "dog") {
    const bool broadcast = rng.below(2) == 1;
    const std::size_t pr = broadcast ? 1 : rows, pc = broadcast ? 1 : cols;
    Variable<double> x = leaf(xv);
    Variable<double> s = leaf(random_tensor(pr, pc, rng, 0.5, 2.0));
    Variable<double> t = leaf(random_tensor(pr, pc, rng, -0.5, 0.5));
    const Tensor<double> w = random_tensor(rows, cols, rng);
    return check_gradients({x, s, t}, [&] { return weighted_sum(dog_basis(x, s, t), w); });
  }
  const std::size_t out = pick(rng, 1, 3);
  Variable<double> x = leaf(xv);
  Variable<double> s = leaf(random_tensor(out, cols, rng, 0.5, 2.0));
  Variable<double> t = leaf(random_tensor(out, cols, rng, -0.5, 0.5));
  Variable<double> wt = leaf(random_tensor(out, cols, rng));
  const Tensor<double> w = random_tensor(rows, out, rng);
  return check_gradients({x, s, t, wt}, [&] { return weighted_sum(dog_linear(x, s, t, wt), w); });
}

// ---------------------------------------------------------------------------
// Combination cases and the scalar-loop reference

// Branch outputs whose entries differ pairwise by at least `gap`, so min/max
// stay differentiable under the finite-difference step.
inline std::vector<Tensor<double>> separated_outputs(std::size_t n, std::size_t rows,
                                                     std::size_t cols, Rng& rng, double gap) {
  std::vector<Tensor<double>> o(n, Tensor<double>(rows, cols));
  for (std::size_t i = 0; i < rows * cols; ++i) {
    for (;;) {
      bool ok = true;
      for (std::size_t a = 0; a < n; ++a) o[a][i] = rng.uniform(-1.5, 1.5);
      for (std::size_t a = 0; a < n && ok; ++a) {
        for (std::size_t b = a + 1; b < n && ok; ++b) ok = std::fabs(o[a][i] - o[b][i]) >= gap;
      }
      if (ok) break;
    }
  }
  return o;
}

inline GradCheck combine_case(CombineMethod method, Rng& rng) {
  const std::size_t n = pick(rng, 2, 3), rows = pick(rng, 1, 3), cols = pick(rng, 1, 4);
  std::vector<Variable<double>> leaves;
  for (auto& t : separated_outputs(n, rows, cols, rng, 1e-3)) leaves.push_back(leaf(std::move(t)));
  Variable<double> hw, hb;
  if (method == CombineMethod::kConcatLinear) {
    hw = leaf(random_tensor(cols, n * cols, rng));
    hb = leaf(random_tensor(1, cols, rng));
  }
  const std::size_t width = method == CombineMethod::kConcat ? n * cols : cols;
  const Tensor<double> w = random_tensor(rows, width, rng);
  std::vector<Variable<double>> outputs(leaves.begin(), leaves.end());
  if (hw.defined()) {
    leaves.push_back(hw);
    leaves.push_back(hb);
  }
  return check_gradients(leaves, [&] {
    return weighted_sum(combine<double>(outputs, method, hw.defined() ? &hw : nullptr,
                                        hb.defined() ? &hb : nullptr),
                        w);
  });
}

inline GradCheck quadratic_pair_case(Rng& rng) {
  const std::size_t rows = pick(rng, 1, 3), cols = pick(rng, 1, 4);
  Variable<double> a = leaf(random_tensor(rows, cols, rng, -1.5, 1.5));
  Variable<double> b = leaf(random_tensor(rows, cols, rng, -1.5, 1.5));
  const Tensor<double> w = random_tensor(rows, cols, rng);
  return check_gradients({a, b}, [&] { return weighted_sum(quadratic_pair(a, b), w); });
}

// Element-by-element evaluation of each combination, left to right.
template <typename T>
Tensor<T> reference_combine(const std::vector<Tensor<T>>& o, CombineMethod method,
                            const Tensor<T>* weight = nullptr, const Tensor<T>* bias = nullptr) {
  const std::size_t n = o.size(), rows = o[0].rows(), cols = o[0].cols();
  if (method == CombineMethod::kConcat || method == CombineMethod::kConcatLinear) {
    Tensor<T> cat(rows, n * cols);
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t c = 0; c < cols; ++c) cat(r, i * cols + c) = o[i](r, c);
      }
    }
    if (method == CombineMethod::kConcat) return cat;
    Tensor<T> y(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t j = 0; j < cols; ++j) {
        T acc = (*bias)(0, j);
        for (std::size_t k = 0; k < n * cols; ++k) acc = acc + (*weight)(j, k) * cat(r, k);
        y(r, j) = acc;
      }
    }
    return y;
  }
  Tensor<T> y(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      T s = o[0](r, c), p = o[0](r, c), lo = o[0](r, c), hi = o[0](r, c);
      for (std::size_t i = 1; i < n; ++i) {
        const T v = o[i](r, c);
        s = s + v;
        p = p * v;
        lo = v < lo ? v : lo;
        hi = v > hi ? v : hi;
      }
      T q = s + p;
      for (std::size_t i = 0; i < n; ++i) q = q + o[i](r, c) * o[i](r, c);
      T out{};
      switch (method) {
        case CombineMethod::kSum: out = s; break;
        case CombineMethod::kProduct: out = p; break;
        case CombineMethod::kSumProduct: out = s + p; break;
        case CombineMethod::kQuadratic: out = q; break;
        case CombineMethod::kCubic: out = q * s; break;
        case CombineMethod::kMin: out = lo; break;
        case CombineMethod::kMax: out = hi; break;
        case CombineMethod::kAverage: out = s / static_cast<T>(n); break;
        default: break;
      }
      y(r, c) = out;
    }
  }
  return y;
}

// ---------------------------------------------------------------------------
// Bases

// Recursive Cox–de Boor on the uniform extended grid.
inline double reference_bspline(std::size_t i, std::size_t k, double x,
                                const std::vector<double>& t) {
  if (k == 0) return (t[i] <= x && x < t[i + 1]) ? 1.0 : 0.0;
  const double left = (x - t[i]) / (t[i + k] - t[i]) * reference_bspline(i, k - 1, x, t);
  const double right =
      (t[i + k + 1] - x) / (t[i + k + 1] - t[i + 1]) * reference_bspline(i + 1, k - 1, x, t);
  return left + right;
}

inline std::vector<double> reference_knots(const BSplineConfig& cfg) {
  std::vector<double> t;
  const double h = (cfg.hi - cfg.lo) / static_cast<double>(cfg.grid_size);
  const long k = static_cast<long>(cfg.spline_order);
  for (long j = -k; j <= static_cast<long>(cfg.grid_size) + k; ++j) {
    t.push_back(cfg.lo + static_cast<double>(j) * h);
  }
  return t;
}

}  // namespace fckan::testing
