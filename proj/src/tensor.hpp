#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

namespace fckan {

struct Shape {
  std::size_t rows = 0;
  std::size_t cols = 0;

  friend bool operator==(const Shape&, const Shape&) = default;
};

std::string to_string(const Shape& shape);

// Dense row-major 2-D array. Vectors are 1×n; scalars are 1×1.
template <typename T>
class Tensor {
  static_assert(std::is_floating_point_v<T>);

 public:
  using value_type = T;

  Tensor() = default;
  Tensor(std::size_t rows, std::size_t cols, T fill = T(0));
  Tensor(std::size_t rows, std::size_t cols, std::vector<T> data);

  static Tensor from_rows(std::initializer_list<std::initializer_list<T>> rows);
  static Tensor scalar(T value) { return Tensor(1, 1, value); }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  Shape shape() const noexcept { return {rows_, cols_}; }
  bool empty() const noexcept { return data_.empty(); }

  T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const T& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  std::span<T> data() noexcept { return data_; }
  std::span<const T> data() const noexcept { return data_; }
  std::span<T> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const T> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  // Scalar value of a 1×1 tensor.
  T item() const;

  void fill(T value);
  bool all_finite() const noexcept;

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

enum class Trans { kNo, kYes };

// C = alpha * op(A) * op(B) + beta * C. Shapes are checked; C must be presized.
template <typename T>
void gemm(Trans trans_a, Trans trans_b, T alpha, const Tensor<T>& a, const Tensor<T>& b, T beta,
          Tensor<T>& c);

// Rows `index[i]` of `source`, in order.
template <typename T>
Tensor<T> gather_rows(const Tensor<T>& source, std::span<const std::size_t> index);

template <typename To, typename From>
Tensor<To> tensor_cast(const Tensor<From>& source) {
  std::vector<To> out(source.data().begin(), source.data().end());
  return Tensor<To>(source.rows(), source.cols(), std::move(out));
}

}  // namespace fckan
