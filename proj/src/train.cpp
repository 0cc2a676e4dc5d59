#include "train.hpp"

#include <chrono>
#include <cmath>
#include <numeric>
#include <sstream>

#include "error.hpp"
#include "json.hpp"
#include "rng.hpp"

namespace fckan {

void TrainingConfig::validate() const {
  auto require = [](bool ok, const char* field, const char* what) {
    if (!ok) fail(ErrorKind::kConfig, std::string("field '") + field + "': " + what);
  };
  require(batch_size > 0, "batch_size", "must be positive");
  require(learning_rate > 0.0, "learning_rate", "must be positive");
  require(weight_decay >= 0.0, "weight_decay", "must be non-negative");
  require(gamma > 0.0 && gamma <= 1.0, "gamma", "must lie in (0, 1]");
  require(epochs > 0, "epochs", "must be positive");
  require(beta1 >= 0.0 && beta1 < 1.0, "beta1", "must lie in [0, 1)");
  require(beta2 >= 0.0 && beta2 < 1.0, "beta2", "must lie in [0, 1)");
  require(adam_eps > 0.0, "adam_eps", "must be positive");
  require(!seeds.empty(), "seeds", "need at least one seed");
}

void TrainingConfig::apply(const KeyValues& kv) {
  auto count = [](const std::string& key, const std::string& value) {
    const long long v = parse_int(key, value);
    if (v <= 0) fail(ErrorKind::kConfig, "field '" + key + "': must be positive");
    return static_cast<std::size_t>(v);
  };
  for (const auto& [key, value] : kv) {
    if (key == "batch_size") {
      batch_size = count(key, value);
    } else if (key == "learning_rate" || key == "lr") {
      learning_rate = parse_double(key, value);
    } else if (key == "weight_decay") {
      weight_decay = parse_double(key, value);
    } else if (key == "gamma") {
      gamma = parse_double(key, value);
    } else if (key == "epochs") {
      epochs = count(key, value);
    } else if (key == "beta1") {
      beta1 = parse_double(key, value);
    } else if (key == "beta2") {
      beta2 = parse_double(key, value);
    } else if (key == "adam_eps") {
      adam_eps = parse_double(key, value);
    } else if (key == "seeds") {
      seeds.clear();
      for (std::size_t s : parse_size_list(key, value)) seeds.push_back(s);
    }
  }
}

std::string TrainingConfig::to_text() const {
  std::ostringstream os;
  os << "batch_size = " << batch_size << '\n';
  os << "learning_rate = " << format_double(learning_rate) << '\n';
  os << "weight_decay = " << format_double(weight_decay) << '\n';
  os << "gamma = " << format_double(gamma) << '\n';
  os << "epochs = " << epochs << '\n';
  os << "beta1 = " << format_double(beta1) << '\n';
  os << "beta2 = " << format_double(beta2) << '\n';
  os << "adam_eps = " << format_double(adam_eps) << '\n';
  os << "seeds = ";
  for (std::size_t i = 0; i < seeds.size(); ++i) os << (i ? "," : "") << seeds[i];
  os << '\n';
  return os.str();
}

double lr_schedule(const TrainingConfig& cfg, std::size_t epoch) {
  return cfg.learning_rate * std::pow(cfg.gamma, static_cast<double>(epoch));
}

template <typename T>
void adamw_update(Tensor<T>& param, const Tensor<T>& grad, Tensor<double>& m, Tensor<double>& v,
                  const TrainingConfig& cfg, double lr, std::size_t t) {
  if (t == 0) fail(ErrorKind::kParameter, "adamw_update: step index starts at 1");
  if (grad.shape() != param.shape() || m.shape() != param.shape() || v.shape() != param.shape()) {
    fail(ErrorKind::kDimension, "adamw_update: state shapes differ from parameter " +
                                    to_string(param.shape()));
  }
  const double decay = 1.0 - lr * cfg.weight_decay;
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));
  T* p = param.data().data();
  const T* gp = grad.data().data();
  double* mp = m.data().data();
  double* vp = v.data().data();
  const std::size_t n = param.size();
  const double b1 = cfg.beta1;
  const double b2 = cfg.beta2;
  const double eps = cfg.adam_eps;
  for (std::size_t i = 0; i < n; ++i) {
    const double g = static_cast<double>(gp[i]);
    const double mi = b1 * mp[i] + (1.0 - b1) * g;
    const double vi = b2 * vp[i] + (1.0 - b2) * g * g;
    mp[i] = mi;
    vp[i] = vi;
    const double theta = static_cast<double>(p[i]) * decay;
    p[i] = static_cast<T>(theta - lr * (mi / c1) / (std::sqrt(vi / c2) + eps));
  }
}

template <typename T>
AdamW<T>::AdamW(std::vector<Variable<T>> params, TrainingConfig cfg)
    : params_(std::move(params)), cfg_(std::move(cfg)) {
  for (const auto& p : params_) {
    state_.m.emplace_back(p.rows(), p.cols());
    state_.v.emplace_back(p.rows(), p.cols());
  }
}

template <typename T>
void AdamW<T>::zero_grad() {
  for (auto& p : params_) p.zero_grad();
}

template <typename T>
void AdamW<T>::step(double lr) {
  ++state_.step;
  for (std::size_t i = 0; i < params_.size(); ++i) {
    auto& p = params_[i];
    const Tensor<T>& g = p.grad();
    if (!g.all_finite()) {
      fail(ErrorKind::kNumeric, "non-finite gradient in parameter " + std::to_string(i) +
                                    " at optimizer step " + std::to_string(state_.step));
    }
    adamw_update(p.mutable_value(), g, state_.m[i], state_.v[i], cfg_, lr, state_.step);
  }
}

std::string RunRecord::to_json(bool with_wall_time) const {
  nlohmann::ordered_json j;
  j["label"] = label;
  j["dataset"] = dataset;
  j["precision"] = precision;
  j["seed"] = seed;
  j["train_samples"] = train_samples;
  j["val_samples"] = val_samples;
  j["parameter_count"] = parameter_count;
  j["trainable_count"] = trainable_count;
  auto& arr = j["epochs"] = nlohmann::ordered_json::array();
  for (const auto& e : epochs) {
    arr.push_back({{"epoch", e.epoch},
                   {"learning_rate", e.learning_rate},
                   {"train_loss", e.train_loss},
                   {"train_accuracy", e.train_accuracy},
                   {"val_loss", e.val_loss},
                   {"val_accuracy", e.val_accuracy},
                   {"val_macro_f1", e.val_macro_f1}});
  }
  if (with_wall_time) j["wall_seconds"] = wall_seconds;
  j["config_hash"] = config_hash;
  j["config"] = config_text;
  return j.dump(2);
}

template <typename T>
Evaluation evaluate(const Model<T>& model, const Dataset& ds, std::size_t batch_size) {
  if (ds.size() == 0) fail(ErrorKind::kDimension, "evaluate: empty dataset");
  NoGradGuard guard;
  Evaluation out;
  out.predicted.reserve(ds.size());
  double loss_sum = 0.0;
  std::vector<std::size_t> index;
  for (std::size_t begin = 0; begin < ds.size(); begin += batch_size) {
    const std::size_t end = std::min(ds.size(), begin + batch_size);
    index.resize(end - begin);
    std::iota(index.begin(), index.end(), begin);
    const auto labels = ds.labels_at(index);
    Variable<T> output = model.forward(Variable<T>(ds.batch<T>(index)));
    loss_sum += static_cast<double>(softmax_cross_entropy<T>(output, labels).value().item()) *
                static_cast<double>(index.size());
    for (int p : argmax_rows(model.readout(output.value()))) out.predicted.push_back(p);
  }
  out.loss = loss_sum / static_cast<double>(ds.size());
  out.confusion = confusion_matrix(out.predicted, ds.labels, model.num_classes());
  out.metrics = classification_metrics(out.confusion);
  return out;
}

namespace {

constexpr std::uint64_t kShuffleStream = 0x9E3779B97F4A7C15ULL;

}  // namespace

template <typename T>
RunRecord train_model(Model<T>& model, const Dataset& train, const Dataset& val,
                      const TrainingConfig& cfg, std::uint64_t seed, const EpochCallback& on_epoch) {
  cfg.validate();
  if (train.size() == 0 || val.size() == 0) fail(ErrorKind::kDimension, "train_model: empty dataset");
  if (train.features != model.spec().widths.front()) {
    fail(ErrorKind::kDimension, "train_model: dataset has " + std::to_string(train.features) +
                                    " features, model expects " +
                                    std::to_string(model.spec().widths.front()));
  }
  const auto start = std::chrono::steady_clock::now();
  RunRecord record;
  record.dataset = train.name;
  record.precision = sizeof(T) == 4 ? "f32" : "f64";
  record.seed = seed;
  record.train_samples = train.size();
  record.val_samples = val.size();
  const Census census = model.census();
  record.parameter_count = census.counted_total;
  record.trainable_count = census.trainable_total;
  record.config_text = model.spec().to_text() + cfg.to_text();
  record.config_hash = hex64(fnv1a(record.config_text));

  std::vector<Variable<T>> params;
  for (const auto& p : model.parameters()) params.push_back(p.var);
  AdamW<T> optimizer(params, cfg);
  Rng shuffle_rng(seed ^ kShuffleStream);
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (std::size_t i = order.size() - 1; i > 0; --i) {
      std::swap(order[i], order[shuffle_rng.below(i + 1)]);
    }
    const double lr = lr_schedule(cfg, epoch);
    double loss_sum = 0.0;
    std::size_t correct = 0;
    std::size_t batch_no = 0;
    for (std::size_t begin = 0; begin < order.size(); begin += cfg.batch_size, ++batch_no) {
      const std::size_t end = std::min(order.size(), begin + cfg.batch_size);
      const std::span<const std::size_t> index(order.data() + begin, end - begin);
      const auto labels = train.labels_at(index);
      try {
        Variable<T> output = model.forward(Variable<T>(train.batch<T>(index)));
        Variable<T> loss = softmax_cross_entropy<T>(output, labels);
        optimizer.zero_grad();
        backward(loss);
        optimizer.step(lr);
        loss_sum += static_cast<double>(loss.value().item()) * static_cast<double>(index.size());
        const auto predicted = argmax_rows(model.readout(output.value()));
        for (std::size_t i = 0; i < predicted.size(); ++i) correct += predicted[i] == labels[i];
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::kNumeric) throw;
        fail(ErrorKind::kNumeric, std::string(e.what()) + " (epoch " + std::to_string(epoch + 1) +
                                      ", batch " + std::to_string(batch_no + 1) + ", seed " +
                                      std::to_string(seed) + ")");
      }
    }
    Evaluation eval;
    try {
      eval = evaluate(model, val);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::kNumeric) throw;
      fail(ErrorKind::kNumeric, std::string(e.what()) + " (epoch " + std::to_string(epoch + 1) +
                                    ", validation, seed " + std::to_string(seed) + ")");
    }
    EpochRecord rec;
    rec.epoch = epoch + 1;
    rec.learning_rate = lr;
    rec.train_loss = loss_sum / static_cast<double>(train.size());
    rec.train_accuracy = 100.0 * static_cast<double>(correct) / static_cast<double>(train.size());
    rec.val_loss = eval.loss;
    rec.val_accuracy = eval.metrics.accuracy;
    rec.val_macro_f1 = eval.metrics.macro_f1;
    record.epochs.push_back(rec);
    if (on_epoch) on_epoch(rec);
  }
  record.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return record;
}

#define FCKAN_INSTANTIATE(T)                                                                  \
  template void adamw_update(Tensor<T>&, const Tensor<T>&, Tensor<double>&, Tensor<double>&,  \
                             const TrainingConfig&, double, std::size_t);                     \
  template class AdamW<T>;                                                                    \
  template Evaluation evaluate(const Model<T>&, const Dataset&, std::size_t);                 \
  template RunRecord train_model(Model<T>&, const Dataset&, const Dataset&,                   \
                                 const TrainingConfig&, std::uint64_t, const EpochCallback&);

FCKAN_INSTANTIATE(float)
FCKAN_INSTANTIATE(double)

#undef FCKAN_INSTANTIATE

}  // namespace fckan
