#include "experiment.hpp"

#include <set>
#include <sstream>

#include "error.hpp"

namespace fckan {

namespace {

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys{
      // network
      "model", "widths", "functions", "pair", "combine", "grid_size", "spline_order", "grid_range",
      "rbf_num_grids", "rbf_range", "rbf_width", "rswaf_num_grids", "rswaf_range",
      "layer_norm_eps",
      // training
      "batch_size", "learning_rate", "lr", "weight_decay", "gamma", "epochs", "beta1", "beta2",
      "adam_eps", "seeds",
      // experiment
      "dataset", "fraction", "precision", "out", "jobs"};
  return keys;
}

}  // namespace

ExperimentConfig ExperimentConfig::parse(std::string_view text) {
  const KeyValues kv = parse_key_values(text);
  for (const auto& [key, value] : kv) {
    if (!known_keys().count(key)) fail(ErrorKind::kConfig, "unknown config field '" + key + "'");
  }
  ExperimentConfig cfg;
  const bool has_pair = kv.count("functions") || kv.count("pair");
  const bool has_combine = kv.count("combine") != 0;
  cfg.spec.apply(kv);
  if (cfg.spec.model != ModelKind::kFcKan && (has_pair || has_combine)) {
    fail(ErrorKind::kConfig, std::string("field '") + (has_pair ? "pair" : "combine") +
                                 "' only applies to model fckan");
  }
  cfg.training.apply(kv);
  for (const auto& [key, value] : kv) {
    if (key == "dataset") {
      auto kind = parse_dataset_kind(value);
      if (!kind) {
        fail(ErrorKind::kConfig, "field 'dataset': unknown dataset '" + value +
                                     "' (expected mnist or fashion-mnist)");
      }
      cfg.dataset = *kind;
    } else if (key == "fraction") {
      cfg.fraction = parse_double(key, value);
    } else if (key == "precision") {
      cfg.precision = value;
    } else if (key == "out") {
      cfg.out_dir = value;
    } else if (key == "jobs") {
      const long long j = parse_int(key, value);
      if (j <= 0) fail(ErrorKind::kConfig, "field 'jobs': must be positive");
      cfg.jobs = static_cast<std::size_t>(j);
    }
  }
  cfg.validate();
  return cfg;
}

void ExperimentConfig::validate() const {
  spec.validate();
  training.validate();
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    fail(ErrorKind::kConfig, "field 'fraction': must lie in (0, 1]");
  }
  if (precision != "f32" && precision != "f64") {
    fail(ErrorKind::kConfig, "field 'precision': expected f32 or f64, got '" + precision + "'");
  }
  if (jobs == 0) fail(ErrorKind::kConfig, "field 'jobs': must be positive");
}

std::string ExperimentConfig::to_text() const {
  std::ostringstream os;
  os << spec.to_text() << training.to_text();
  os << "dataset = " << name_of(dataset) << '\n';
  os << "fraction = " << format_double(fraction) << '\n';
  os << "precision = " << precision << '\n';
  return os.str();
}

std::string ExperimentConfig::hash() const { return hex64(fnv1a(to_text())); }

}  // namespace fckan
