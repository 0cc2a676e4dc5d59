#include "kernels.hpp"

#include <cmath>
#include <vector>

namespace fckan::kernels {

namespace {

// Logistic function without overflow for large |x|.
template <typename T>
inline T sigmoid(T x) {
  const T e = std::exp(-std::fabs(x));
  const T r = T(1) / (T(1) + e);
  return x >= T(0) ? r : e * r;
}

}  // namespace

template <typename T>
void silu_forward(std::span<const T> x, std::span<T> y) {
  const std::size_t n = x.size();
  for (std::size_t i = 0; i < n; ++i) y[i] = x[i] * sigmoid(x[i]);
}

template <typename T>
void silu_backward(std::span<const T> x, std::span<const T> g, std::span<T> gx) {
  const std::size_t n = x.size();
  for (std::size_t i = 0; i < n; ++i) {
    const T sig = sigmoid(x[i]);
    gx[i] = g[i] * sig * (T(1) + x[i] * (T(1) - sig));
  }
}

template <typename T>
void rbf_forward(std::span<const T> x, std::span<const T> centers, T inv_width, std::span<T> out) {
  const std::size_t n = centers.size();
  for (std::size_t i = 0; i < x.size(); ++i) {
    T* o = out.data() + i * n;
    const T xi = x[i];
    for (std::size_t c = 0; c < n; ++c) {
      const T r = (xi - centers[c]) * inv_width;
      o[c] = std::exp(T(-0.5) * r * r);
    }
  }
}

template <typename T>
void rbf_backward(std::span<const T> x, std::span<const T> centers, T inv_width,
                  std::span<const T> phi, std::span<const T> g, std::span<T> gx) {
  const std::size_t n = centers.size();
  const T inv_sq = inv_width * inv_width;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const T* p = phi.data() + i * n;
    const T* gi = g.data() + i * n;
    T acc = 0;
    for (std::size_t c = 0; c < n; ++c) acc -= gi[c] * p[c] * (x[i] - centers[c]) * inv_sq;
    gx[i] += acc;
  }
}

template <typename T>
void rswaf_forward(std::span<const T> x, std::span<const T> centers, T inv_denominator,
                   std::span<T> out) {
  const std::size_t n = centers.size();
  for (std::size_t i = 0; i < x.size(); ++i) {
    T* o = out.data() + i * n;
    for (std::size_t c = 0; c < n; ++c) {
      const T t = std::tanh((x[i] - centers[c]) * inv_denominator);
      o[c] = T(1) - t * t;
    }
  }
}

template <typename T>
T rswaf_backward(std::span<const T> x, std::span<const T> centers, T inv_denominator,
                 std::span<const T> g, std::span<T> gx) {
  const std::size_t n = centers.size();
  T g_inv = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const T* gi = g.data() + i * n;
    T acc = 0;
    for (std::size_t c = 0; c < n; ++c) {
      const T d = x[i] - centers[c];
      const T t = std::tanh(d * inv_denominator);
      // d/du (1 − tanh²u) = −2 tanh u (1 − tanh²u)
      const T dphi = T(-2) * t * (T(1) - t * t) * gi[c];
      acc += dphi * inv_denominator;
      g_inv += dphi * d;
    }
    if (!gx.empty()) gx[i] += acc;
  }
  return g_inv;
}

template <typename T>
void dog_linear_forward(DogShape shape, const T* x, const T* scale, const T* translation,
                        const T* weight, T* out) {
  const std::size_t in = shape.in;
  for (std::size_t b = 0; b < shape.batch; ++b) {
    const T* xb = x + b * in;
    for (std::size_t j = 0; j < shape.out; ++j) {
      const T* s = scale + j * in;
      const T* t = translation + j * in;
      const T* w = weight + j * in;
      T acc = 0;
      for (std::size_t i = 0; i < in; ++i) {
        const T z = (xb[i] - t[i]) / s[i];
        acc += w[i] * z * std::exp(T(-0.5) * z * z);
      }
      out[b * shape.out + j] = acc;
    }
  }
}

namespace {

// One (output, sample) row; restrict-qualified so the loop vectorizes.
template <typename T, bool kInputGrad>
void dog_backward_row(std::size_t in, T up, const T* __restrict__ xb, const T* __restrict__ s,
                      const T* __restrict__ t, const T* __restrict__ w, T* __restrict__ gxb,
                      T* __restrict__ gs, T* __restrict__ gt, T* __restrict__ gw) {
  for (std::size_t i = 0; i < in; ++i) {
    const T inv = T(1) / s[i];
    const T z = (xb[i] - t[i]) * inv;
    const T e = std::exp(T(-0.5) * z * z);
    gw[i] += up * z * e;
    const T dz = up * w[i] * (T(1) - z * z) * e * inv;
    gt[i] -= dz;
    gs[i] -= dz * z;
    if constexpr (kInputGrad) gxb[i] += dz;
  }
}

template <typename T, bool kInputGrad>
void dog_backward_impl(DogShape shape, const T* x, const T* scale, const T* translation,
                       const T* weight, const T* g, T* gx, T* gscale, T* gtranslation,
                       T* gweight) {
  const std::size_t in = shape.in;
  for (std::size_t j = 0; j < shape.out; ++j) {
    for (std::size_t b = 0; b < shape.batch; ++b) {
      const T up = g[b * shape.out + j];
      if (up == T(0)) continue;
      dog_backward_row<T, kInputGrad>(in, up, x + b * in, scale + j * in, translation + j * in,
                                      weight + j * in, kInputGrad ? gx + b * in : nullptr,
                                      gscale + j * in, gtranslation + j * in, gweight + j * in);
    }
  }
}

}  // namespace

template <typename T>
void dog_linear_backward(DogShape shape, const T* x, const T* scale, const T* translation,
                         const T* weight, const T* g, T* gx, T* gscale, T* gtranslation,
                         T* gweight) {
  const std::size_t pair_count = shape.in * shape.out;
  std::vector<T> scratch_s, scratch_t, scratch_w;
  if (gscale == nullptr) {
    scratch_s.assign(pair_count, T(0));
    gscale = scratch_s.data();
  }
  if (gtranslation == nullptr) {
    scratch_t.assign(pair_count, T(0));
    gtranslation = scratch_t.data();
  }
  if (gweight == nullptr) {
    scratch_w.assign(pair_count, T(0));
    gweight = scratch_w.data();
  }
  if (gx != nullptr) {
    dog_backward_impl<T, true>(shape, x, scale, translation, weight, g, gx, gscale, gtranslation,
                               gweight);
  } else {
    dog_backward_impl<T, false>(shape, x, scale, translation, weight, g, gx, gscale,
                                gtranslation, gweight);
  }
}

#define FCKAN_INSTANTIATE(T)                                                                    \
  template void silu_forward<T>(std::span<const T>, std::span<T>);                              \
  template void silu_backward<T>(std::span<const T>, std::span<const T>, std::span<T>);         \
  template void rbf_forward<T>(std::span<const T>, std::span<const T>, T, std::span<T>);        \
  template void rbf_backward<T>(std::span<const T>, std::span<const T>, T, std::span<const T>,  \
                                std::span<const T>, std::span<T>);                              \
  template void rswaf_forward<T>(std::span<const T>, std::span<const T>, T, std::span<T>);      \
  template T rswaf_backward<T>(std::span<const T>, std::span<const T>, T, std::span<const T>,   \
                               std::span<T>);                                                   \
  template void dog_linear_forward<T>(DogShape, const T*, const T*, const T*, const T*, T*);    \
  template void dog_linear_backward<T>(DogShape, const T*, const T*, const T*, const T*,        \
                                       const T*, T*, T*, T*, T*);

FCKAN_INSTANTIATE(float)
FCKAN_INSTANTIATE(double)

#undef FCKAN_INSTANTIATE

}  // namespace fckan::kernels
