#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "layers.hpp"
#include "network_spec.hpp"

namespace fckan {

// Fuses equal-shaped branch outputs, left to right:
//   sum      ((o1 + o2) + o3) …        product  ((o1 ⊙ o2) ⊙ o3) …
//   sum_product = sum + product        quadratic = sum_product + o1² + o2² + …
//   cubic = quadratic ⊙ sum            average = sum / n
//   min/max chained element-wise       concat = [o1 | o2 | …]
//   concat_linear: see concat_linear()
// head_weight / head_bias are required for concat_linear and ignored otherwise.
template <typename T>
Variable<T> combine(std::span<const Variable<T>> outputs, CombineMethod method,
                    const Variable<T>* head_weight = nullptr, const Variable<T>* head_bias = nullptr);

// a + b + a⊙b + a⊙a + b⊙b, in that order; equals combine({a, b}, quadratic).
template <typename T>
Variable<T> quadratic_pair(const Variable<T>& a, const Variable<T>& b);

// y[r, j] = b[j] + Σ_k W[j, k]·c[r, k], c = [o1 | o2 | …], summed in increasing
// k starting from the bias. W is out × (n·out), b is 1 × out.
template <typename T>
Variable<T> concat_linear(std::span<const Variable<T>> outputs, const Variable<T>& weight,
                          const Variable<T>& bias);

// Class scores from a concat output: the n slices of width `classes` summed.
template <typename T>
Tensor<T> concat_readout(const Tensor<T>& wide, std::size_t classes);

struct Census {
  std::vector<CensusEntry> entries;
  std::size_t counted_total = 0;    // what the reference totals count
  std::size_t trainable_total = 0;  // everything the optimizer updates
  std::size_t buffer_total = 0;     // fixed grids and centers
};

// A single-stack reference model or an FC-KAN network, built from a spec.
// Parameters are initialized in construction order from one seeded stream.
template <typename T>
class Model {
 public:
  using value_type = T;

  Model(NetworkSpec spec, std::uint64_t seed);

  const NetworkSpec& spec() const noexcept { return spec_; }
  bool is_fckan() const noexcept { return spec_.model == ModelKind::kFcKan; }

  // Training output. For concat this is n·classes wide.
  Variable<T> forward(const Variable<T>& x) const;
  // One output per branch (a single entry for reference models).
  std::vector<Variable<T>> branch_outputs(const Variable<T>& x) const;
  // classes-wide scores without recording a tape.
  Tensor<T> predict(const Tensor<T>& x) const;
  // Maps a forward() output to classes-wide scores.
  Tensor<T> readout(const Tensor<T>& output) const;

  std::size_t num_classes() const noexcept { return spec_.num_classes(); }
  std::size_t output_width() const noexcept;

  std::size_t num_branches() const noexcept { return stacks_.size(); }
  const std::vector<std::unique_ptr<Layer<T>>>& stack(std::size_t i) const { return stacks_.at(i); }
  std::string branch_name(std::size_t i) const;

  // Full dotted paths, e.g. "dog.layers.0.weight" or "layers.1.base_weight".
  std::vector<NamedParameter<T>> parameters() const;
  Census census() const;

 private:
  NetworkSpec spec_;
  std::vector<std::vector<std::unique_ptr<Layer<T>>>> stacks_;
  Variable<T> head_weight_, head_bias_;
};

}  // namespace fckan
