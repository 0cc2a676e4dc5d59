#pragma once

#include <cstddef>
#include <span>

// Exp/tanh-heavy inner loops. kernels.cpp is built with vectorized libm
// (fast-math), so it must not be used for finiteness checks; callers check.
namespace fckan::kernels {

template <typename T>
void silu_forward(std::span<const T> x, std::span<T> y);
// gx = g · σ(x)(1 + x(1 − σ(x)))
template <typename T>
void silu_backward(std::span<const T> x, std::span<const T> g, std::span<T> gx);

// out[i·N + c] = exp(−((x_i − center_c)·inv_width)² / 2)
template <typename T>
void rbf_forward(std::span<const T> x, std::span<const T> centers, T inv_width, std::span<T> out);
template <typename T>
void rbf_backward(std::span<const T> x, std::span<const T> centers, T inv_width,
                  std::span<const T> phi, std::span<const T> g, std::span<T> gx);

// out[i·N + c] = 1 − tanh²((x_i − center_c)·inv_denominator)
template <typename T>
void rswaf_forward(std::span<const T> x, std::span<const T> centers, T inv_denominator,
                   std::span<T> out);
// Accumulates into gx (may be empty) and returns d/d(inv_denominator).
template <typename T>
T rswaf_backward(std::span<const T> x, std::span<const T> centers, T inv_denominator,
                 std::span<const T> g, std::span<T> gx);

struct DogShape {
  std::size_t batch;
  std::size_t in;
  std::size_t out;
};

// out[b, j] = Σ_i w[j, i] · ψ((x[b, i] − t[j, i]) / s[j, i]),  ψ(z) = z·e^(−z²/2)
template <typename T>
void dog_linear_forward(DogShape shape, const T* x, const T* scale, const T* translation,
                        const T* weight, T* out);
// Accumulating backward; any gradient pointer may be null.
template <typename T>
void dog_linear_backward(DogShape shape, const T* x, const T* scale, const T* translation,
                         const T* weight, const T* g, T* gx, T* gscale, T* gtranslation,
                         T* gweight);

}  // namespace fckan::kernels
