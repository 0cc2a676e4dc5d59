#include "fckan/fckan.h"

#include <cstdlib>
#include <cstring>
#include <memory>
#include <new>
#include <string>
#include <variant>

#include "checkpoint.hpp"
#include "data.hpp"
#include "error.hpp"
#include "experiment.hpp"
#include "json.hpp"
#include "network.hpp"
#include "train.hpp"

using namespace fckan;
using nlohmann::ordered_json;

struct fckan_model {
  std::variant<std::unique_ptr<Model<float>>, std::unique_ptr<Model<double>>> impl;
};

struct fckan_dataset {
  Dataset ds;
};

namespace {

thread_local std::string last_error;

fckan_status status_of(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kDimension:
      return FCKAN_ERR_DIMENSION;
    case ErrorKind::kIndex:
      return FCKAN_ERR_INDEX;
    case ErrorKind::kParameter:
      return FCKAN_ERR_PARAMETER;
    case ErrorKind::kConfig:
      return FCKAN_ERR_CONFIG;
    case ErrorKind::kParse:
      return FCKAN_ERR_PARSE;
    case ErrorKind::kNumeric:
      return FCKAN_ERR_NUMERIC;
    case ErrorKind::kIo:
      return FCKAN_ERR_IO;
  }
  return FCKAN_ERR_INTERNAL;
}

fckan_status set_error(fckan_status status, std::string message) {
  last_error = std::move(message);
  return status;
}

template <typename F>
fckan_status guarded(F&& f) {
  try {
    f();
    return FCKAN_OK;
  } catch (const Error& e) {
    return set_error(status_of(e.kind()), e.what());
  } catch (const std::bad_alloc&) {
    return set_error(FCKAN_ERR_INTERNAL, "out of memory");
  } catch (const std::filesystem::filesystem_error& e) {
    return set_error(FCKAN_ERR_IO, e.what());
  } catch (const std::exception& e) {
    return set_error(FCKAN_ERR_INTERNAL, e.what());
  }
}

#define FCKAN_REQUIRE(cond, msg) \
  if (!(cond)) return set_error(FCKAN_ERR_ARGUMENT, msg)

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

std::string census_json(const Census& c) {
  ordered_json j;
  auto& entries = j["entries"] = ordered_json::array();
  for (const auto& e : c.entries) {
    entries.push_back({{"path", e.path},
                       {"rows", e.shape.rows},
                       {"cols", e.shape.cols},
                       {"count", e.count},
                       {"trainable", e.trainable},
                       {"counted", e.counted}});
  }
  j["counted_total"] = c.counted_total;
  j["trainable_total"] = c.trainable_total;
  j["buffer_total"] = c.buffer_total;
  return j.dump(2);
}

std::string epoch_json(const EpochRecord& e) {
  ordered_json j{{"epoch", e.epoch},
                 {"learning_rate", e.learning_rate},
                 {"train_loss", e.train_loss},
                 {"train_accuracy", e.train_accuracy},
                 {"val_loss", e.val_loss},
                 {"val_accuracy", e.val_accuracy},
                 {"val_macro_f1", e.val_macro_f1}};
  return j.dump();
}

DatasetKind dataset_kind(const char* name) {
  auto kind = parse_dataset_kind(name);
  if (!kind) {
    fail(ErrorKind::kConfig, std::string("unknown dataset '") + name +
                                 "' (expected mnist or fashion-mnist)");
  }
  return *kind;
}

std::filesystem::path data_root(const char* root) {
  return root != nullptr ? std::filesystem::path(root) : default_data_dir();
}

template <typename F>
decltype(auto) visit_model(const fckan_model* m, F&& f) {
  return std::visit([&](const auto& p) -> decltype(auto) { return f(*p); }, m->impl);
}

}  // namespace

extern "C" {

const char* fckan_version(void) { return "1.0.0"; }

const char* fckan_status_name(fckan_status status) {
  switch (status) {
    case FCKAN_OK:
      return "ok";
    case FCKAN_ERR_ARGUMENT:
      return "argument error";
    case FCKAN_ERR_CONFIG:
      return "configuration error";
    case FCKAN_ERR_DIMENSION:
      return "dimension error";
    case FCKAN_ERR_INDEX:
      return "index error";
    case FCKAN_ERR_PARAMETER:
      return "parameter error";
    case FCKAN_ERR_PARSE:
      return "parse error";
    case FCKAN_ERR_NUMERIC:
      return "numeric error";
    case FCKAN_ERR_IO:
      return "i/o error";
    case FCKAN_ERR_INTERNAL:
      return "internal error";
  }
  return "unknown status";
}

const char* fckan_last_error(void) { return last_error.c_str(); }

void fckan_string_free(char* s) { std::free(s); }

fckan_status fckan_spec_resolve(const char* spec_text, char** out_text) {
  FCKAN_REQUIRE(spec_text != nullptr && out_text != nullptr, "fckan_spec_resolve: null argument");
  return guarded([&] { *out_text = dup_string(NetworkSpec::parse(spec_text).to_text()); });
}

fckan_status fckan_training_config_resolve(const char* config_text, char** out_text) {
  FCKAN_REQUIRE(config_text != nullptr && out_text != nullptr,
                "fckan_training_config_resolve: null argument");
  return guarded([&] {
    TrainingConfig cfg;
    cfg.apply(parse_key_values(config_text));
    cfg.validate();
    *out_text = dup_string(cfg.to_text());
  });
}

fckan_status fckan_spec_census(const char* spec_text, char** out_json) {
  FCKAN_REQUIRE(spec_text != nullptr && out_json != nullptr, "fckan_spec_census: null argument");
  return guarded([&] {
    Model<float> model(NetworkSpec::parse(spec_text), 0);
    *out_json = dup_string(census_json(model.census()));
  });
}

fckan_status fckan_experiment_resolve(const char* config_text, char** out_json) {
  FCKAN_REQUIRE(config_text != nullptr && out_json != nullptr,
                "fckan_experiment_resolve: null argument");
  return guarded([&] {
    const ExperimentConfig cfg = ExperimentConfig::parse(config_text);
    std::string label(name_of(cfg.spec.model));
    if (cfg.spec.model == ModelKind::kFcKan) {
      for (FunctionKind f : cfg.spec.functions) label += "_" + std::string(name_of(f));
      label += "_" + std::string(name_of(cfg.spec.combine));
    }
    ordered_json j;
    j["spec"] = cfg.spec.to_text();
    j["training"] = cfg.training.to_text();
    j["text"] = cfg.to_text();
    j["hash"] = cfg.hash();
    j["dataset"] = std::string(name_of(cfg.dataset));
    j["fraction"] = cfg.fraction;
    j["precision"] = cfg.precision;
    j["out"] = cfg.out_dir;
    j["jobs"] = cfg.jobs;
    j["seeds"] = cfg.training.seeds;
    j["label"] = label;
    *out_json = dup_string(j.dump());
  });
}

fckan_status fckan_names(char** out_json) {
  FCKAN_REQUIRE(out_json != nullptr, "fckan_names: null argument");
  return guarded([&] {
    ordered_json j;
    j["models"] = {"mlp", "efficientkan", "fastkan", "fasterkan", "bsrbf", "fckan"};
    j["functions"] = {"bs", "rbf", "dog", "base"};
    auto& combine = j["combine"] = ordered_json::array();
    for (auto m : kAllCombineMethods) combine.push_back(std::string(name_of(m)));
    j["datasets"] = {"mnist", "fashion-mnist"};
    *out_json = dup_string(j.dump());
  });
}

fckan_status fckan_dataset_load(const char* root, const char* name, const char* split,
                                fckan_dataset** out) {
  FCKAN_REQUIRE(name != nullptr && split != nullptr && out != nullptr,
                "fckan_dataset_load: null argument");
  return guarded([&] {
    auto ds = std::make_unique<fckan_dataset>();
    ds->ds = load_split(data_root(root), dataset_kind(name), split);
    *out = ds.release();
  });
}

fckan_status fckan_dataset_subset(const fckan_dataset* ds, double fraction, uint64_t seed,
                                  fckan_dataset** out) {
  FCKAN_REQUIRE(ds != nullptr && out != nullptr, "fckan_dataset_subset: null argument");
  return guarded([&] {
    auto sub = std::make_unique<fckan_dataset>();
    sub->ds = stratified_subset(ds->ds, fraction, seed);
    *out = sub.release();
  });
}

fckan_status fckan_dataset_from_memory(const uint8_t* pixels, const int32_t* labels, size_t rows,
                                       size_t features, size_t classes, const char* name,
                                       fckan_dataset** out) {
  FCKAN_REQUIRE(pixels != nullptr && labels != nullptr && out != nullptr,
                "fckan_dataset_from_memory: null argument");
  FCKAN_REQUIRE(rows > 0 && features > 0 && classes > 0,
                "fckan_dataset_from_memory: empty dimensions");
  return guarded([&] {
    auto ds = std::make_unique<fckan_dataset>();
    ds->ds.name = name != nullptr ? name : "memory";
    ds->ds.split = "train";
    ds->ds.features = features;
    ds->ds.classes = classes;
    ds->ds.pixels.assign(pixels, pixels + rows * features);
    ds->ds.labels.assign(labels, labels + rows);
    ds->ds.validate();
    *out = ds.release();
  });
}

size_t fckan_dataset_size(const fckan_dataset* ds) { return ds == nullptr ? 0 : ds->ds.size(); }

fckan_status fckan_dataset_info(const fckan_dataset* ds, char** out_json) {
  FCKAN_REQUIRE(ds != nullptr && out_json != nullptr, "fckan_dataset_info: null argument");
  return guarded([&] {
    ordered_json j{{"name", ds->ds.name},
                   {"split", ds->ds.split},
                   {"size", ds->ds.size()},
                   {"features", ds->ds.features},
                   {"classes", ds->ds.classes},
                   {"class_counts", ds->ds.class_counts()}};
    *out_json = dup_string(j.dump());
  });
}

void fckan_dataset_free(fckan_dataset* ds) { delete ds; }

fckan_status fckan_fetch(const char* root, const char* name, const char* base_url) {
  FCKAN_REQUIRE(name != nullptr, "fckan_fetch: null dataset name");
  return guarded([&] {
    const DatasetKind kind = dataset_kind(name);
    fetch_dataset(data_root(root), kind, base_url != nullptr ? base_url : default_base_url(kind));
  });
}

fckan_status fckan_model_create(const char* spec_text, uint64_t seed, fckan_precision precision,
                                fckan_model** out) {
  FCKAN_REQUIRE(spec_text != nullptr && out != nullptr, "fckan_model_create: null argument");
  FCKAN_REQUIRE(precision == FCKAN_F32 || precision == FCKAN_F64,
                "fckan_model_create: precision must be FCKAN_F32 or FCKAN_F64");
  return guarded([&] {
    auto m = std::make_unique<fckan_model>();
    NetworkSpec spec = NetworkSpec::parse(spec_text);
    if (precision == FCKAN_F32) {
      m->impl = std::make_unique<Model<float>>(std::move(spec), seed);
    } else {
      m->impl = std::make_unique<Model<double>>(std::move(spec), seed);
    }
    *out = m.release();
  });
}

void fckan_model_free(fckan_model* model) { delete model; }

fckan_status fckan_model_spec(const fckan_model* model, char** out_text) {
  FCKAN_REQUIRE(model != nullptr && out_text != nullptr, "fckan_model_spec: null argument");
  return guarded([&] {
    *out_text = dup_string(visit_model(model, [](const auto& m) { return m.spec().to_text(); }));
  });
}

fckan_status fckan_model_census(const fckan_model* model, char** out_json) {
  FCKAN_REQUIRE(model != nullptr && out_json != nullptr, "fckan_model_census: null argument");
  return guarded([&] {
    *out_json = dup_string(visit_model(model, [](const auto& m) { return census_json(m.census()); }));
  });
}

size_t fckan_model_num_classes(const fckan_model* model) {
  if (model == nullptr) return 0;
  return visit_model(model, [](const auto& m) { return m.num_classes(); });
}

fckan_status fckan_model_save(const fckan_model* model, const char* path) {
  FCKAN_REQUIRE(model != nullptr && path != nullptr, "fckan_model_save: null argument");
  return guarded([&] { visit_model(model, [&](const auto& m) { save_checkpoint(m, path); }); });
}

fckan_status fckan_model_load(const char* path, fckan_precision precision, fckan_model** out) {
  FCKAN_REQUIRE(path != nullptr && out != nullptr, "fckan_model_load: null argument");
  FCKAN_REQUIRE(precision == FCKAN_F32 || precision == FCKAN_F64,
                "fckan_model_load: precision must be FCKAN_F32 or FCKAN_F64");
  return guarded([&] {
    const Checkpoint ckpt = read_checkpoint(path);
    auto m = std::make_unique<fckan_model>();
    if (precision == FCKAN_F32) {
      auto model = std::make_unique<Model<float>>(ckpt.spec, 0);
      load_parameters(*model, ckpt);
      m->impl = std::move(model);
    } else {
      auto model = std::make_unique<Model<double>>(ckpt.spec, 0);
      load_parameters(*model, ckpt);
      m->impl = std::move(model);
    }
    *out = m.release();
  });
}

fckan_status fckan_model_train(fckan_model* model, const fckan_dataset* train,
                               const fckan_dataset* validation, const fckan_train_options* options,
                               char** out_record) {
  FCKAN_REQUIRE(model != nullptr && train != nullptr && validation != nullptr,
                "fckan_model_train: null argument");
  return guarded([&] {
    const fckan_train_options defaults{};
    const fckan_train_options& opt = options != nullptr ? *options : defaults;
    TrainingConfig cfg;
    if (opt.training_config != nullptr) cfg.apply(parse_key_values(opt.training_config));
    cfg.validate();
    EpochCallback cb;
    if (opt.on_epoch != nullptr) {
      cb = [&opt](const EpochRecord& e) { opt.on_epoch(epoch_json(e).c_str(), opt.user); };
    }
    RunRecord record = std::visit(
        [&](auto& m) { return train_model(*m, train->ds, validation->ds, cfg, opt.seed, cb); },
        model->impl);
    record.label = opt.label != nullptr
                       ? std::string(opt.label)
                       : visit_model(model, [](const auto& m) { return std::string(name_of(m.spec().model)); });
    if (opt.config_text != nullptr) {
      record.config_text = opt.config_text;
      record.config_hash = hex64(fnv1a(record.config_text));
    }
    if (out_record != nullptr) *out_record = dup_string(record.to_json());
  });
}

fckan_status fckan_model_evaluate(const fckan_model* model, const fckan_dataset* ds,
                                  char** out_json) {
  FCKAN_REQUIRE(model != nullptr && ds != nullptr && out_json != nullptr,
                "fckan_model_evaluate: null argument");
  return guarded([&] {
    const Evaluation ev = visit_model(model, [&](const auto& m) { return evaluate(m, ds->ds); });
    ordered_json j;
    j["loss"] = ev.loss;
    j["accuracy"] = ev.metrics.accuracy;
    j["macro_f1"] = ev.metrics.macro_f1;
    j["per_class_f1"] = ev.metrics.per_class_f1;
    auto& rows = j["confusion"] = ordered_json::array();
    std::vector<std::size_t> errors;
    std::vector<std::size_t> support;
    for (std::size_t t = 0; t < ev.confusion.classes; ++t) {
      std::vector<std::size_t> row;
      for (std::size_t p = 0; p < ev.confusion.classes; ++p) row.push_back(ev.confusion.at(t, p));
      rows.push_back(row);
      errors.push_back(ev.confusion.errors(t));
      support.push_back(ev.confusion.support(t));
    }
    j["errors_per_class"] = errors;
    j["support"] = support;
    *out_json = dup_string(j.dump());
  });
}

fckan_status fckan_model_predict(const fckan_model* model, const double* inputs, size_t rows,
                                 size_t features, double* scores) {
  FCKAN_REQUIRE(model != nullptr && inputs != nullptr && scores != nullptr,
                "fckan_model_predict: null argument");
  return guarded([&] {
    std::visit(
        [&](const auto& m) {
          using T = typename std::remove_cvref_t<decltype(*m)>::value_type;
          std::vector<T> values(inputs, inputs + rows * features);
          const Tensor<T> scored = m->predict(Tensor<T>(rows, features, std::move(values)));
          for (std::size_t i = 0; i < scored.size(); ++i) scores[i] = static_cast<double>(scored[i]);
        },
        model->impl);
  });
}

}  // extern "C"
