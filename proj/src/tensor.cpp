#include "tensor.hpp"

#include <cblas.h>

#include <algorithm>
#include <cmath>

#include "error.hpp"

namespace fckan {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kDimension: return "dimension error";
    case ErrorKind::kIndex: return "index error";
    case ErrorKind::kParameter: return "parameter error";
    case ErrorKind::kConfig: return "configuration error";
    case ErrorKind::kParse: return "parse error";
    case ErrorKind::kNumeric: return "numeric error";
    case ErrorKind::kIo: return "I/O error";
  }
  return "error";
}

void fail(ErrorKind kind, const std::string& message) { throw Error(kind, message); }

std::string to_string(const Shape& shape) {
  return std::to_string(shape.rows) + "x" + std::to_string(shape.cols);
}

template <typename T>
Tensor<T>::Tensor(std::size_t rows, std::size_t cols, T fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

template <typename T>
Tensor<T>::Tensor(std::size_t rows, std::size_t cols, std::vector<T> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    fail(ErrorKind::kDimension, "tensor data length " + std::to_string(data_.size()) +
                                    " does not match shape " + to_string(Shape{rows, cols}));
  }
}

template <typename T>
Tensor<T> Tensor<T>::from_rows(std::initializer_list<std::initializer_list<T>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r == 0 ? 0 : rows.begin()->size();
  std::vector<T> data;
  data.reserve(r * c);
  for (const auto& row : rows) {
    if (row.size() != c) fail(ErrorKind::kDimension, "ragged row in tensor literal");
    data.insert(data.end(), row.begin(), row.end());
  }
  return Tensor(r, c, std::move(data));
}

template <typename T>
T Tensor<T>::item() const {
  if (rows_ != 1 || cols_ != 1) {
    fail(ErrorKind::kDimension, "item() on non-scalar tensor " + to_string(shape()));
  }
  return data_[0];
}

template <typename T>
void Tensor<T>::fill(T value) {
  std::fill(data_.begin(), data_.end(), value);
}

template <typename T>
bool Tensor<T>::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](T v) { return std::isfinite(v); });
}

namespace {

// Library-wide init: OpenBLAS is pinned to one thread so that reductions
// happen in a fixed order and results are reproducible run to run.
struct BlasInit {
  BlasInit() { openblas_set_num_threads(1); }
};
const BlasInit blas_init;

CBLAS_TRANSPOSE to_cblas(Trans t) { return t == Trans::kYes ? CblasTrans : CblasNoTrans; }

void blas_gemm(CBLAS_TRANSPOSE ta, CBLAS_TRANSPOSE tb, int m, int n, int k, float alpha,
               const float* a, int lda, const float* b, int ldb, float beta, float* c, int ldc) {
  cblas_sgemm(CblasRowMajor, ta, tb, m, n, k, alpha, a, lda, b, ldb, beta, c, ldc);
}

void blas_gemm(CBLAS_TRANSPOSE ta, CBLAS_TRANSPOSE tb, int m, int n, int k, double alpha,
               const double* a, int lda, const double* b, int ldb, double beta, double* c,
               int ldc) {
  cblas_dgemm(CblasRowMajor, ta, tb, m, n, k, alpha, a, lda, b, ldb, beta, c, ldc);
}

}  // namespace

template <typename T>
void gemm(Trans trans_a, Trans trans_b, T alpha, const Tensor<T>& a, const Tensor<T>& b, T beta,
          Tensor<T>& c) {
  const std::size_t m = trans_a == Trans::kYes ? a.cols() : a.rows();
  const std::size_t k = trans_a == Trans::kYes ? a.rows() : a.cols();
  const std::size_t kb = trans_b == Trans::kYes ? b.cols() : b.rows();
  const std::size_t n = trans_b == Trans::kYes ? b.rows() : b.cols();
  if (k != kb || c.rows() != m || c.cols() != n) {
    fail(ErrorKind::kDimension, "gemm: incompatible shapes " + to_string(a.shape()) + " and " +
                                    to_string(b.shape()) + " into " + to_string(c.shape()));
  }
  if (m == 0 || n == 0) return;
  if (k == 0) {
    for (auto& v : c.data()) v *= beta;
    return;
  }
  blas_gemm(to_cblas(trans_a), to_cblas(trans_b), static_cast<int>(m), static_cast<int>(n),
            static_cast<int>(k), alpha, a.data().data(), static_cast<int>(a.cols()),
            b.data().data(), static_cast<int>(b.cols()), beta, c.data().data(),
            static_cast<int>(c.cols()));
}

template <typename T>
Tensor<T> gather_rows(const Tensor<T>& source, std::span<const std::size_t> index) {
  Tensor<T> out(index.size(), source.cols());
  for (std::size_t i = 0; i < index.size(); ++i) {
    if (index[i] >= source.rows()) {
      fail(ErrorKind::kIndex, "gather_rows: row " + std::to_string(index[i]) + " out of " +
                                  std::to_string(source.rows()));
    }
    auto src = source.row(index[i]);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return out;
}

template class Tensor<float>;
template class Tensor<double>;
template void gemm<float>(Trans, Trans, float, const Tensor<float>&, const Tensor<float>&, float,
                          Tensor<float>&);
template void gemm<double>(Trans, Trans, double, const Tensor<double>&, const Tensor<double>&,
                           double, Tensor<double>&);
template Tensor<float> gather_rows(const Tensor<float>&, std::span<const std::size_t>);
template Tensor<double> gather_rows(const Tensor<double>&, std::span<const std::size_t>);

}  // namespace fckan
