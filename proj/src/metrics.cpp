#include "metrics.hpp"

#include <string>

#include "error.hpp"

namespace fckan {

template <typename T>
std::vector<int> argmax_rows(const Tensor<T>& scores) {
  if (scores.cols() == 0) fail(ErrorKind::kDimension, "argmax_rows: zero columns");
  std::vector<int> out(scores.rows());
  for (std::size_t r = 0; r < scores.rows(); ++r) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < scores.cols(); ++c) {
      if (scores(r, c) > scores(r, best)) best = c;
    }
    out[r] = static_cast<int>(best);
  }
  return out;
}

template std::vector<int> argmax_rows(const Tensor<float>&);
template std::vector<int> argmax_rows(const Tensor<double>&);

std::size_t ConfusionMatrix::support(std::size_t truth) const {
  std::size_t s = 0;
  for (std::size_t p = 0; p < classes; ++p) s += at(truth, p);
  return s;
}

std::size_t ConfusionMatrix::errors(std::size_t truth) const {
  return support(truth) - at(truth, truth);
}

std::size_t ConfusionMatrix::total() const {
  std::size_t s = 0;
  for (std::size_t c : counts) s += c;
  return s;
}

std::size_t ConfusionMatrix::off_diagonal() const {
  std::size_t s = total();
  for (std::size_t c = 0; c < classes; ++c) s -= at(c, c);
  return s;
}

ConfusionMatrix confusion_matrix(std::span<const int> predicted, std::span<const int> labels,
                                 std::size_t classes) {
  if (predicted.size() != labels.size()) {
    fail(ErrorKind::kDimension, "confusion_matrix: " + std::to_string(predicted.size()) +
                                    " predictions for " + std::to_string(labels.size()) + " labels");
  }
  ConfusionMatrix cm{classes, std::vector<std::size_t>(classes * classes, 0)};
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int t = labels[i];
    const int p = predicted[i];
    if (t < 0 || static_cast<std::size_t>(t) >= classes || p < 0 ||
        static_cast<std::size_t>(p) >= classes) {
      fail(ErrorKind::kIndex, "confusion_matrix: class index out of range at sample " +
                                  std::to_string(i));
    }
    ++cm.counts[static_cast<std::size_t>(t) * classes + static_cast<std::size_t>(p)];
  }
  return cm;
}

ClassificationMetrics classification_metrics(const ConfusionMatrix& cm) {
  const std::size_t n = cm.total();
  if (n == 0) fail(ErrorKind::kDimension, "classification_metrics: empty input");
  ClassificationMetrics m;
  std::size_t correct = 0;
  double f1_sum = 0.0;
  for (std::size_t c = 0; c < cm.classes; ++c) {
    const std::size_t tp = cm.at(c, c);
    correct += tp;
    std::size_t predicted = 0;
    for (std::size_t t = 0; t < cm.classes; ++t) predicted += cm.at(t, c);
    const std::size_t support = cm.support(c);
    // 2·tp / (predicted + support) is F1 without forming precision and recall.
    const double f1 = (support == 0 || tp == 0)
                          ? 0.0
                          : 2.0 * static_cast<double>(tp) /
                                static_cast<double>(predicted + support);
    m.per_class_f1.push_back(f1);
    f1_sum += f1;
  }
  m.accuracy = 100.0 * static_cast<double>(correct) / static_cast<double>(n);
  m.macro_f1 = cm.classes == 0 ? 0.0 : f1_sum / static_cast<double>(cm.classes);
  return m;
}

ClassificationMetrics classification_metrics(std::span<const int> predicted,
                                             std::span<const int> labels, std::size_t classes) {
  return classification_metrics(confusion_matrix(predicted, labels, classes));
}

}  // namespace fckan
