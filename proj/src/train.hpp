#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "data.hpp"
#include "keyvalue.hpp"
#include "metrics.hpp"
#include "network.hpp"

namespace fckan {

struct TrainingConfig {
  std::size_t batch_size = 64;
  double learning_rate = 1e-3;
  double weight_decay = 1e-4;
  double gamma = 0.8;  // per-epoch multiplicative decay
  std::size_t epochs = 25;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};

  void validate() const;
  void apply(const KeyValues& kv);
  std::string to_text() const;
};

// lr₀ · γ^epoch, epoch counted from 0.
double lr_schedule(const TrainingConfig& cfg, std::size_t epoch);

struct AdamWState {
  std::size_t step = 0;
  std::vector<Tensor<double>> m;  // kept in double for both precisions
  std::vector<Tensor<double>> v;
};

// One decoupled-decay Adam step on a single tensor, t ≥ 1:
//   θ ← θ(1 − lr·wd);  m ← β1 m + (1−β1) g;  v ← β2 v + (1−β2) g²
//   θ ← θ − lr · (m / (1−β1ᵗ)) / (√(v / (1−β2ᵗ)) + ε)
template <typename T>
void adamw_update(Tensor<T>& param, const Tensor<T>& grad, Tensor<double>& m, Tensor<double>& v,
                  const TrainingConfig& cfg, double lr, std::size_t t);

template <typename T>
class AdamW {
 public:
  AdamW(std::vector<Variable<T>> params, TrainingConfig cfg);
  void zero_grad();
  // Non-finite gradients raise a numeric error naming the parameter index.
  void step(double lr);
  std::size_t steps() const noexcept { return state_.step; }

 private:
  std::vector<Variable<T>> params_;
  TrainingConfig cfg_;
  AdamWState state_;
};

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double learning_rate = 0.0;
  double train_loss = 0.0;
  double train_accuracy = 0.0;
  double val_loss = 0.0;
  double val_accuracy = 0.0;
  double val_macro_f1 = 0.0;
};

struct RunRecord {
  std::string label;
  std::string dataset;
  std::string precision;  // "f32" or "f64"
  std::uint64_t seed = 0;
  std::size_t train_samples = 0;
  std::size_t val_samples = 0;
  std::size_t parameter_count = 0;   // reference accounting
  std::size_t trainable_count = 0;
  std::vector<EpochRecord> epochs;
  double wall_seconds = 0.0;
  std::string config_text;
  std::string config_hash;

  const EpochRecord& last() const { return epochs.back(); }
  // Wall time is left out when `with_wall_time` is false so records from
  // separate runs can be compared byte for byte.
  std::string to_json(bool with_wall_time = true) const;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

// Full loop: per-epoch shuffle from the seed, mini-batches, AdamW, LR decay,
// validation after every epoch. Numeric failures carry epoch/batch context.
template <typename T>
RunRecord train_model(Model<T>& model, const Dataset& train, const Dataset& val,
                      const TrainingConfig& cfg, std::uint64_t seed,
                      const EpochCallback& on_epoch = {});

struct Evaluation {
  double loss = 0.0;
  std::vector<int> predicted;
  ConfusionMatrix confusion;
  ClassificationMetrics metrics;
};

template <typename T>
Evaluation evaluate(const Model<T>& model, const Dataset& ds, std::size_t batch_size = 1000);

}  // namespace fckan
