#pragma once

#include <cstddef>
#include <vector>

#include "autodiff.hpp"
#include "tensor.hpp"

namespace fckan {

// Uniform B-spline grid: G intervals over [lo, hi], degree k, extended by k
// knots on each side, giving G + k basis functions per input scalar.
struct BSplineConfig {
  std::size_t grid_size = 5;
  std::size_t spline_order = 3;
  double lo = -1.0;
  double hi = 1.0;

  void validate() const;
  std::size_t num_bases() const { return grid_size + spline_order; }
  double step() const { return (hi - lo) / static_cast<double>(grid_size); }
  // G + 2k + 1 knots.
  std::vector<double> knots() const;
};

// Evenly spaced Gaussian centers; width h = (hi − lo)/(N − 1) unless set.
struct RBFConfig {
  std::size_t num_grids = 8;
  double lo = -2.0;
  double hi = 2.0;
  double width = 0.0;  // 0 selects the default spacing

  void validate() const;
  std::vector<double> centers() const;
  double h() const;
};

struct RSWAFConfig {
  std::size_t num_grids = 8;
  double lo = -2.0;
  double hi = 2.0;

  void validate() const;
  std::vector<double> centers() const;
  // Initial inverse width 1/h with h the center spacing.
  double initial_inv_denominator() const;
};

// Values of all G + k bases at x.
std::vector<double> bspline_values(double x, const BSplineConfig& cfg);

// Flattened expansions: column i·K + b is basis b of input column i.
template <typename T>
Variable<T> bspline_basis(const Variable<T>& x, const BSplineConfig& cfg);
template <typename T>
Variable<T> rbf_basis(const Variable<T>& x, const RBFConfig& cfg);
// inv_denominator is a trainable 1×1 variable.
template <typename T>
Variable<T> rswaf_basis(const Variable<T>& x, const RSWAFConfig& cfg,
                        const Variable<T>& inv_denominator);

// ψ((x − t)/s) element-wise with ψ(z) = z·e^(−z²/2). s and t match x's shape
// or are 1×1. Non-positive scale entries are rejected.
template <typename T>
Variable<T> dog_basis(const Variable<T>& x, const Variable<T>& scale,
                      const Variable<T>& translation);

// Wavelet layer map: out[b, j] = Σ_i w[j, i]·ψ((x[b, i] − t[j, i]) / s[j, i]).
// scale, translation and weight are all out×in.
template <typename T>
Variable<T> dog_linear(const Variable<T>& x, const Variable<T>& scale,
                       const Variable<T>& translation, const Variable<T>& weight);

}  // namespace fckan
