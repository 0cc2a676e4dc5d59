#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "tensor.hpp"

namespace fckan {

// Row-wise argmax; ties go to the lowest column.
template <typename T>
std::vector<int> argmax_rows(const Tensor<T>& scores);

// counts[truth * classes + predicted]
struct ConfusionMatrix {
  std::size_t classes = 0;
  std::vector<std::size_t> counts;

  std::size_t at(std::size_t truth, std::size_t predicted) const {
    return counts[truth * classes + predicted];
  }
  std::size_t support(std::size_t truth) const;
  // Misclassified samples whose true class is `truth`.
  std::size_t errors(std::size_t truth) const;
  std::size_t total() const;
  std::size_t off_diagonal() const;
};

ConfusionMatrix confusion_matrix(std::span<const int> predicted, std::span<const int> labels,
                                 std::size_t classes);

struct ClassificationMetrics {
  double accuracy = 0.0;  // percent
  double macro_f1 = 0.0;  // in [0, 1]
  std::vector<double> per_class_f1;
};

// Classes with no support contribute F1 = 0 to the macro average.
ClassificationMetrics classification_metrics(const ConfusionMatrix& cm);
ClassificationMetrics classification_metrics(std::span<const int> predicted,
                                             std::span<const int> labels, std::size_t classes);

}  // namespace fckan
