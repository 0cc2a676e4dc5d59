// fckan-cli: train, compare, sweep and inspect models through the C API.
//
// Exit codes: 0 success, 1 usage or config error, 2 data error, 3 numeric
// failure during training.

#include <fckan/fckan.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kData = 2, kNumeric = 3 };

struct Failure {
  int code;
  std::string message;
};

int exit_code_of(fckan_status s) {
  switch (s) {
    case FCKAN_OK:
      return kOk;
    case FCKAN_ERR_ARGUMENT:
    case FCKAN_ERR_CONFIG:
      return kUsage;
    case FCKAN_ERR_NUMERIC:
      return kNumeric;
    default:
      return kData;
  }
}

void check(fckan_status s) {
  if (s != FCKAN_OK) throw Failure{exit_code_of(s), fckan_last_error()};
}

// Takes ownership of a library string.
std::string take(char* s) {
  std::string out = s != nullptr ? s : "";
  fckan_string_free(s);
  return out;
}

std::string full(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Stats {
  double mean = 0.0, std = 0.0;
};

// Sample standard deviation (n - 1); zero for a single run.
Stats stats_of(const std::vector<double>& v) {
  Stats s;
  if (v.empty()) return s;
  for (double x : v) s.mean += x;
  s.mean /= static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - s.mean) * (x - s.mean);
    s.std = std::sqrt(ss / static_cast<double>(v.size() - 1));
  }
  return s;
}

// Resolved config, echoed as '#' lines at the top of every CSV.
void write_config_header(std::ostream& os, const std::string& text, const std::string& hash) {
  os << "# config_hash = " << hash << '\n';
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) os << "# " << line << '\n';
}

void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << content;
  if (!out) throw Failure{kData, "cannot write " + path.string()};
}

// ---------------------------------------------------------------------------
// Options shared by the training subcommands. Only flags actually given are
// turned into config lines, appended after the config file so they win.

struct CommonOptions {
  std::string config_file;
  std::string data_dir;
  std::map<std::string, std::string> flags;
  bool save_checkpoints = true;

  void add(CLI::App* app, bool with_model) {
    app->add_option("-c,--config", config_file, "key = value config file");
    app->add_option("--data-dir", data_dir, "dataset root (default: $FCKAN_DATA_DIR, else ./data)");
    if (with_model) {
      flag(app, "--model", "model", "mlp, efficientkan, fastkan, fasterkan, bsrbf or fckan");
      flag(app, "--pair", "functions", "FC-KAN functions, e.g. dog,bs");
      flag(app, "--combine", "combine", "FC-KAN combination method");
    }
    flag(app, "--dataset", "dataset", "mnist or fashion-mnist");
    flag(app, "--widths", "widths", "layer widths, e.g. 784,64,10");
    flag(app, "--epochs", "epochs", "training epochs");
    flag(app, "--batch-size", "batch_size", "mini-batch size");
    flag(app, "--lr", "learning_rate", "initial learning rate");
    flag(app, "--weight-decay", "weight_decay", "AdamW weight decay");
    flag(app, "--gamma", "gamma", "per-epoch learning-rate decay");
    flag(app, "--seeds", "seeds", "comma-separated seeds");
    flag(app, "--fraction", "fraction", "stratified training subset fraction");
    flag(app, "--precision", "precision", "f32 or f64");
    flag(app, "--grid-size", "grid_size", "B-spline grid size");
    flag(app, "--spline-order", "spline_order", "B-spline order");
    flag(app, "-o,--out", "out", "output directory");
    flag(app, "-j,--jobs", "jobs", "worker threads for independent runs");
  }

  void flag(CLI::App* app, const std::string& name, const std::string& key,
            const std::string& help) {
    app->add_option_function<std::string>(
        name, [this, key](const std::string& v) { flags[key] = v; }, help)
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  }

  // Config file text followed by the given flags, then any forced overrides.
  std::string text(const std::map<std::string, std::string>& forced = {}) const {
    std::string out;
    if (!config_file.empty()) {
      std::ifstream in(config_file, std::ios::binary);
      if (!in) throw Failure{kUsage, "cannot read config file '" + config_file + "'"};
      std::ostringstream ss;
      ss << in.rdbuf();
      out = ss.str() + "\n";
    }
    for (const auto& [k, v] : flags) out += k + " = " + v + "\n";
    for (const auto& [k, v] : forced) out += k + " = " + v + "\n";
    return out;
  }

  const char* root() const { return data_dir.empty() ? nullptr : data_dir.c_str(); }
};

json resolve(const std::string& text) {
  char* out = nullptr;
  check(fckan_experiment_resolve(text.c_str(), &out));
  return json::parse(take(out));
}

// ---------------------------------------------------------------------------
// Data

struct DatasetHandle {
  fckan_dataset* ptr = nullptr;
  DatasetHandle() = default;
  explicit DatasetHandle(fckan_dataset* p) : ptr(p) {}
  DatasetHandle(DatasetHandle&& o) noexcept : ptr(std::exchange(o.ptr, nullptr)) {}
  DatasetHandle& operator=(DatasetHandle&& o) noexcept {
    std::swap(ptr, o.ptr);
    return *this;
  }
  ~DatasetHandle() { fckan_dataset_free(ptr); }
};

struct ModelHandle {
  fckan_model* ptr = nullptr;
  explicit ModelHandle(fckan_model* p) : ptr(p) {}
  ModelHandle(const ModelHandle&) = delete;
  ModelHandle& operator=(const ModelHandle&) = delete;
  ~ModelHandle() { fckan_model_free(ptr); }
};

struct Splits {
  DatasetHandle train, val;
};

Splits load_splits(const char* root, const std::string& dataset) {
  Splits s;
  check(fckan_dataset_load(root, dataset.c_str(), "train", &s.train.ptr));
  check(fckan_dataset_load(root, dataset.c_str(), "validation", &s.val.ptr));
  return s;
}

// ---------------------------------------------------------------------------
// Runs

struct Job {
  std::string label;
  json config;  // resolved experiment
  std::uint64_t seed = 0;
  const fckan_dataset* train = nullptr;  // full split, subset taken per job
  const fckan_dataset* val = nullptr;
  fs::path checkpoint;  // empty: not saved
};

struct Result {
  json record;
  int code = kOk;
  std::string error;
};

std::mutex io_mutex;

void log_line(const std::string& s) {
  std::lock_guard<std::mutex> lock(io_mutex);
  std::cerr << s << std::endl;
}

struct Progress {
  const Job* job;
};

void on_epoch(const char* epoch_json, void* user) {
  const Job& job = *static_cast<Progress*>(user)->job;
  const json e = json::parse(epoch_json);
  char buf[200];
  std::snprintf(buf, sizeof buf, "[%s seed %llu] epoch %d  loss %.5f  train %.2f  val %.2f",
                job.label.c_str(), static_cast<unsigned long long>(job.seed),
                e["epoch"].get<int>(), e["train_loss"].get<double>(),
                e["train_accuracy"].get<double>(), e["val_accuracy"].get<double>());
  log_line(buf);
}

Result run_job(const Job& job) {
  Result r;
  try {
    const json& cfg = job.config;
    const fckan_precision precision = cfg["precision"] == "f64" ? FCKAN_F64 : FCKAN_F32;
    DatasetHandle subset;
    const fckan_dataset* train = job.train;
    const double fraction = cfg["fraction"].get<double>();
    if (fraction < 1.0) {
      check(fckan_dataset_subset(job.train, fraction, job.seed, &subset.ptr));
      train = subset.ptr;
    }
    fckan_model* raw = nullptr;
    check(fckan_model_create(cfg["spec"].get<std::string>().c_str(), job.seed, precision, &raw));
    ModelHandle model(raw);

    const std::string training = cfg["training"].get<std::string>();
    const std::string text = cfg["text"].get<std::string>();
    Progress progress{&job};
    fckan_train_options opt{};
    opt.training_config = training.c_str();
    opt.label = job.label.c_str();
    opt.config_text = text.c_str();
    opt.seed = job.seed;
    opt.on_epoch = on_epoch;
    opt.user = &progress;
    char* record = nullptr;
    check(fckan_model_train(model.ptr, train, job.val, &opt, &record));
    r.record = json::parse(take(record));
    if (!job.checkpoint.empty()) {
      fs::create_directories(job.checkpoint.parent_path());
      check(fckan_model_save(model.ptr, job.checkpoint.string().c_str()));
    }
  } catch (const Failure& f) {
    r.code = f.code;
    r.error = f.message;
  } catch (const std::exception& e) {
    r.code = kData;
    r.error = e.what();
  }
  return r;
}

// Runs jobs on `workers` threads; results keep the job order. Jobs share the
// read-only datasets and nothing else.
std::vector<Result> run_all(const std::vector<Job>& jobs, std::size_t workers) {
  std::vector<Result> results(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < jobs.size();) results[i] = run_job(jobs[i]);
  };
  workers = std::max<std::size_t>(1, std::min(workers, jobs.size()));
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    if (results[i].code != kOk) {
      throw Failure{results[i].code, jobs[i].label + " seed " + std::to_string(jobs[i].seed) +
                                         ": " + results[i].error};
    }
  }
  return results;
}

struct Summary {
  Stats train_acc, val_acc, best_val_acc, val_f1, seconds;
  std::size_t runs = 0;
};

Summary summarize(const std::vector<const json*>& records) {
  std::vector<double> tr, va, best, f1, sec;
  for (const json* r : records) {
    const json& last = (*r)["epochs"].back();
    tr.push_back(last["train_accuracy"].get<double>());
    va.push_back(last["val_accuracy"].get<double>());
    f1.push_back(100.0 * last["val_macro_f1"].get<double>());
    double b = 0.0;
    for (const auto& e : (*r)["epochs"]) b = std::max(b, e["val_accuracy"].get<double>());
    best.push_back(b);
    sec.push_back(r->value("wall_seconds", 0.0));
  }
  Summary s;
  s.train_acc = stats_of(tr);
  s.val_acc = stats_of(va);
  s.best_val_acc = stats_of(best);
  s.val_f1 = stats_of(f1);
  s.seconds = stats_of(sec);
  s.runs = records.size();
  return s;
}

const char* kSummaryColumns =
    "runs,train_acc_mean,train_acc_std,val_acc_mean,val_acc_std,best_val_acc_mean,"
    "best_val_acc_std,val_f1_mean,val_f1_std,seconds_mean,seconds_std";

std::string summary_cells(const Summary& s) {
  std::string out = std::to_string(s.runs);
  for (const Stats* st : {&s.train_acc, &s.val_acc, &s.best_val_acc, &s.val_f1, &s.seconds}) {
    out += "," + full(st->mean) + "," + full(st->std);
  }
  return out;
}

std::string seeds_cell(const json& cfg) {
  std::string out;
  for (const auto& s : cfg["seeds"]) out += (out.empty() ? "" : " ") + std::to_string(s.get<std::uint64_t>());
  return out;
}

void write_losses(std::ostream& os, const std::vector<Job>& jobs, const std::vector<Result>& results) {
  os << "label,seed,epoch,learning_rate,train_loss,log_train_loss,train_accuracy,val_loss,"
        "val_accuracy,val_macro_f1\n";
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    for (const auto& e : results[i].record["epochs"]) {
      const double loss = e["train_loss"].get<double>();
      os << jobs[i].label << ',' << jobs[i].seed << ',' << e["epoch"].get<int>() << ','
         << full(e["learning_rate"].get<double>()) << ',' << full(loss) << ','
         << full(std::log(loss)) << ',' << full(e["train_accuracy"].get<double>()) << ','
         << full(e["val_loss"].get<double>()) << ',' << full(e["val_accuracy"].get<double>())
         << ',' << full(e["val_macro_f1"].get<double>()) << '\n';
    }
  }
}

std::string census_total(const json& cfg) {
  char* out = nullptr;
  check(fckan_spec_census(cfg["spec"].get<std::string>().c_str(), &out));
  const json c = json::parse(take(out));
  return std::to_string(c["counted_total"].get<std::size_t>());
}

// ---------------------------------------------------------------------------
// Subcommands

int cmd_train(const CommonOptions& opts) {
  const json cfg = resolve(opts.text());
  std::cerr << "resolved config (hash " << cfg["hash"].get<std::string>() << "):\n"
            << cfg["text"].get<std::string>();
  std::cout << "parameters: " << census_total(cfg) << '\n';

  const Splits data = load_splits(opts.root(), cfg["dataset"]);
  const std::string label = cfg["label"];
  const fs::path dir = fs::path(cfg["out"].get<std::string>()) / label;
  std::vector<Job> jobs;
  for (const auto& s : cfg["seeds"]) {
    Job job{label, cfg, s.get<std::uint64_t>(), data.train.ptr, data.val.ptr, {}};
    if (opts.save_checkpoints) job.checkpoint = dir / ("seed" + std::to_string(job.seed) + ".ckpt");
    jobs.push_back(std::move(job));
  }
  const auto results = run_all(jobs, cfg["jobs"].get<std::size_t>());

  std::vector<const json*> records;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    write_file(dir / ("seed" + std::to_string(jobs[i].seed) + ".json"), results[i].record.dump(2) + "\n");
    records.push_back(&results[i].record);
  }
  const Summary s = summarize(records);
  std::ostringstream agg;
  write_config_header(agg, cfg["text"], cfg["hash"]);
  agg << "model,dataset,fraction,seeds,parameters," << kSummaryColumns << ",config_hash\n";
  const std::string row = label + "," + cfg["dataset"].get<std::string>() + "," +
                          full(cfg["fraction"].get<double>()) + "," + seeds_cell(cfg) + "," +
                          census_total(cfg) + "," + summary_cells(s) + "," +
                          cfg["hash"].get<std::string>();
  agg << row << '\n';
  write_file(dir / "aggregate.csv", agg.str());

  std::ostringstream losses;
  write_config_header(losses, cfg["text"], cfg["hash"]);
  write_losses(losses, jobs, results);
  write_file(dir / "losses.csv", losses.str());

  std::printf("%s  train %.2f ± %.2f  val %.2f ± %.2f  f1 %.2f ± %.2f\n", label.c_str(),
              s.train_acc.mean, s.train_acc.std, s.val_acc.mean, s.val_acc.std, s.val_f1.mean,
              s.val_f1.std);
  std::printf("wrote %s\n", dir.string().c_str());
  return kOk;
}

std::vector<std::string> names_of(const char* key) {
  char* out = nullptr;
  check(fckan_names(&out));
  return json::parse(take(out))[key].get<std::vector<std::string>>();
}

int cmd_compare(const CommonOptions& opts) {
  const json base = resolve(opts.text({{"model", "fckan"}}));
  const Splits data = load_splits(opts.root(), base["dataset"]);
  const fs::path dir = base["out"].get<std::string>();

  std::vector<json> configs;
  std::vector<Job> jobs;
  const auto methods = names_of("combine");
  for (const std::string& method : methods) {
    configs.push_back(resolve(opts.text({{"model", "fckan"}, {"combine", method}})));
  }
  for (const json& cfg : configs) {
    for (const auto& s : cfg["seeds"]) {
      jobs.push_back({cfg["label"], cfg, s.get<std::uint64_t>(), data.train.ptr, data.val.ptr, {}});
    }
  }
  const auto results = run_all(jobs, base["jobs"].get<std::size_t>());

  std::ostringstream csv;
  write_config_header(csv, base["text"], base["hash"]);
  csv << "method,dataset,seeds,parameters," << kSummaryColumns << ",config_hash\n";
  std::size_t k = 0;
  for (std::size_t m = 0; m < configs.size(); ++m) {
    const json& cfg = configs[m];
    std::vector<const json*> records;
    for (std::size_t i = 0; i < cfg["seeds"].size(); ++i, ++k) {
      write_file(dir / cfg["label"].get<std::string>() /
                     ("seed" + std::to_string(jobs[k].seed) + ".json"),
                 results[k].record.dump(2) + "\n");
      records.push_back(&results[k].record);
    }
    const Summary s = summarize(records);
    const std::string& combine = methods[m];
    csv << combine << ',' << cfg["dataset"].get<std::string>() << ',' << seeds_cell(cfg) << ','
        << census_total(cfg) << ',' << summary_cells(s) << ',' << cfg["hash"].get<std::string>()
        << '\n';
    std::printf("%-14s train %.2f ± %.2f  val %.2f ± %.2f  f1 %.2f ± %.2f\n", combine.c_str(),
                s.train_acc.mean, s.train_acc.std, s.val_acc.mean, s.val_acc.std, s.val_f1.mean,
                s.val_f1.std);
  }
  write_file(dir / "combinations.csv", csv.str());
  std::ostringstream losses;
  write_config_header(losses, base["text"], base["hash"]);
  write_losses(losses, jobs, results);
  write_file(dir / "combinations_losses.csv", losses.str());
  std::printf("wrote %s\n", (dir / "combinations.csv").string().c_str());
  return kOk;
}

int cmd_subset_sweep(const CommonOptions& opts, const std::string& fractions_arg) {
  std::vector<std::string> fractions;
  {
    std::istringstream in(fractions_arg);
    for (std::string f; std::getline(in, f, ',');) {
      if (!f.empty()) fractions.push_back(f);
    }
  }
  if (fractions.empty()) throw Failure{kUsage, "--fractions: no values"};
  const json base = resolve(opts.text({{"model", "fckan"}}));
  const Splits data = load_splits(opts.root(), base["dataset"]);
  const fs::path dir = base["out"].get<std::string>();

  const auto functions = names_of("functions");
  std::vector<std::string> pairs;
  for (std::size_t a = 0; a < functions.size(); ++a) {
    for (std::size_t b = a + 1; b < functions.size(); ++b) {
      pairs.push_back(functions[a] + "," + functions[b]);
    }
  }
  std::vector<Job> jobs;
  std::vector<std::string> variant_of;
  for (const std::string& pair : pairs) {
    for (const std::string& f : fractions) {
      const json cfg = resolve(opts.text({{"model", "fckan"}, {"functions", pair}, {"fraction", f}}));
      for (const auto& s : cfg["seeds"]) {
        jobs.push_back({cfg["label"], cfg, s.get<std::uint64_t>(), data.train.ptr, data.val.ptr, {}});
        variant_of.push_back(pair);
      }
    }
  }
  const auto results = run_all(jobs, base["jobs"].get<std::size_t>());

  std::ostringstream csv;
  write_config_header(csv, base["text"], base["hash"]);
  csv << "variant,fraction,seed,train_samples,train_accuracy,val_accuracy,val_macro_f1,config_hash\n";
  std::map<std::string, std::map<double, std::vector<double>>> by_variant;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const json& rec = results[i].record;
    const json& last = rec["epochs"].back();
    std::string variant = variant_of[i];
    std::replace(variant.begin(), variant.end(), ',', '+');
    const double fraction = jobs[i].config["fraction"].get<double>();
    csv << variant << ',' << full(fraction) << ',' << jobs[i].seed << ','
        << rec["train_samples"].get<std::size_t>() << ','
        << full(last["train_accuracy"].get<double>()) << ','
        << full(last["val_accuracy"].get<double>()) << ','
        << full(last["val_macro_f1"].get<double>()) << ','
        << jobs[i].config["hash"].get<std::string>() << '\n';
    by_variant[variant][fraction].push_back(last["val_accuracy"].get<double>());
  }
  write_file(dir / "subset_sweep.csv", csv.str());

  // Soft check: mean accuracy should not fall as the fraction grows.
  for (const auto& [variant, per_fraction] : by_variant) {
    double prev = -1.0;
    bool monotone = true;
    std::string means;
    for (const auto& [fraction, accs] : per_fraction) {
      const double m = stats_of(accs).mean;
      monotone = monotone && m >= prev;
      prev = m;
      char buf[64];
      std::snprintf(buf, sizeof buf, " %.4g:%.2f", fraction, m);
      means += buf;
    }
    std::printf("%s %-10s%s\n", monotone ? "PASS" : "WARN", variant.c_str(), means.c_str());
  }
  std::printf("wrote %s\n", (dir / "subset_sweep.csv").string().c_str());
  return kOk;
}

int cmd_confusion(const std::string& checkpoint, const std::string& dataset,
                  const std::string& data_dir, const std::string& out_path) {
  fckan_model* raw = nullptr;
  check(fckan_model_load(checkpoint.c_str(), FCKAN_F32, &raw));
  ModelHandle model(raw);
  char* spec_raw = nullptr;
  check(fckan_model_spec(model.ptr, &spec_raw));
  const std::string spec = take(spec_raw);
  const json cfg = resolve(spec + "dataset = " + dataset + "\n");

  DatasetHandle val;
  check(fckan_dataset_load(data_dir.empty() ? nullptr : data_dir.c_str(),
                           cfg["dataset"].get<std::string>().c_str(), "validation", &val.ptr));
  char* eval_raw = nullptr;
  check(fckan_model_evaluate(model.ptr, val.ptr, &eval_raw));
  const json ev = json::parse(take(eval_raw));

  std::ostringstream csv;
  std::string text = cfg["text"].get<std::string>() + "checkpoint = " + checkpoint + "\n";
  write_config_header(csv, text, cfg["hash"]);
  const std::size_t classes = ev["support"].size();
  csv << "true_class";
  for (std::size_t p = 0; p < classes; ++p) csv << ",pred_" << p;
  csv << ",errors,support\n";
  for (std::size_t t = 0; t < classes; ++t) {
    csv << t;
    for (std::size_t p = 0; p < classes; ++p) csv << ',' << ev["confusion"][t][p].get<long long>();
    csv << ',' << ev["errors_per_class"][t].get<long long>() << ','
        << ev["support"][t].get<long long>() << '\n';
  }
  if (out_path.empty()) {
    std::cout << csv.str();
  } else {
    write_file(out_path, csv.str());
  }

  long long errors = 0;
  std::vector<std::pair<long long, std::size_t>> ranked;
  for (std::size_t t = 0; t < classes; ++t) {
    const long long e = ev["errors_per_class"][t].get<long long>();
    errors += e;
    ranked.emplace_back(e, t);
  }
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  });
  std::fprintf(stderr, "accuracy %.2f  errors %lld\n", ev["accuracy"].get<double>(), errors);
  if (cfg["dataset"] == "fashion-mnist" && classes > 6) {
    const bool top2 = ranked[0].second == 6 || ranked[1].second == 6;
    std::fprintf(stderr, "%s Shirt among the two most misclassified classes\n",
                 top2 ? "PASS" : "WARN");
  }
  return kOk;
}

// "dog.layers.0.weight" -> "dog.layers.0", "head.bias" -> "head".
std::string component_of(const std::string& path) {
  const auto at = path.rfind("layers.");
  if (at == std::string::npos) return path.substr(0, path.find('.'));
  return path.substr(0, path.find('.', at + 7));
}

int cmd_census(const CommonOptions& opts, bool as_json) {
  const json cfg = resolve(opts.text());
  char* out = nullptr;
  check(fckan_spec_census(cfg["spec"].get<std::string>().c_str(), &out));
  const json c = json::parse(take(out));
  if (as_json) {
    json doc = c;
    doc["config_hash"] = cfg["hash"];
    doc["config"] = cfg["spec"];
    std::cout << doc.dump(2) << '\n';
    return kOk;
  }
  std::printf("%s\n", cfg["label"].get<std::string>().c_str());
  std::printf("%-40s %12s %10s  %s\n", "parameter", "shape", "count", "note");
  std::map<std::string, std::size_t> groups;
  for (const auto& e : c["entries"]) {
    const std::string path = e["path"];
    const std::size_t count = e["count"];
    const bool trainable = e["trainable"], counted = e["counted"];
    std::string shape = std::to_string(e["rows"].get<std::size_t>()) + "x" +
                        std::to_string(e["cols"].get<std::size_t>());
    const char* note = !trainable ? "buffer" : (counted ? "" : "trainable, not counted");
    std::printf("%-40s %12s %10zu  %s\n", path.c_str(), shape.c_str(), count, note);
    if (trainable && counted) {
      groups[component_of(path)] += count;
    }
  }
  std::printf("\nper component\n");
  for (const auto& [g, n] : groups) std::printf("  %-38s %10zu\n", g.c_str(), n);
  std::printf("\ntotal (counted)   %zu\n", c["counted_total"].get<std::size_t>());
  std::printf("trainable         %zu\n", c["trainable_total"].get<std::size_t>());
  std::printf("buffers           %zu\n", c["buffer_total"].get<std::size_t>());
  std::printf("config_hash       %s\n", cfg["hash"].get<std::string>().c_str());
  return kOk;
}

int cmd_fetch(const std::string& dataset, const std::string& data_dir, const std::string& url) {
  std::vector<std::string> names;
  if (dataset == "all") {
    names = names_of("datasets");
  } else {
    names.push_back(dataset);
  }
  for (const std::string& n : names) {
    std::fprintf(stderr, "fetching %s\n", n.c_str());
    check(fckan_fetch(data_dir.empty() ? nullptr : data_dir.c_str(), n.c_str(),
                      url.empty() ? nullptr : url.c_str()));
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"FC-KAN training and evaluation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", fckan_version());

  CommonOptions train_opts, compare_opts, sweep_opts, census_opts;
  bool no_checkpoint = false;
  auto* train = app.add_subcommand("train", "train one model over all seeds");
  train_opts.add(train, true);
  train->add_flag("--no-checkpoint", no_checkpoint, "skip writing checkpoints");

  auto* compare = app.add_subcommand("compare-combinations",
                                     "train FC-KAN under every combination method");
  compare_opts.add(compare, false);
  compare_opts.flag(compare, "--pair", "functions", "FC-KAN functions, e.g. dog,bs");

  std::string fractions = "0.01,0.05,0.1";
  auto* sweep = app.add_subcommand("subset-sweep", "train the six FC-KAN pairs on data subsets");
  sweep_opts.add(sweep, false);
  sweep_opts.flag(sweep, "--combine", "combine", "FC-KAN combination method");
  sweep->add_option("--fractions", fractions, "comma-separated subset fractions");

  std::string ckpt, confusion_dataset = "mnist", confusion_dir, confusion_out;
  auto* confusion = app.add_subcommand("confusion", "confusion matrix of a checkpoint");
  confusion->add_option("--checkpoint", ckpt, "checkpoint written by train")->required();
  confusion->add_option("--dataset", confusion_dataset, "mnist or fashion-mnist");
  confusion->add_option("--data-dir", confusion_dir, "dataset root");
  confusion->add_option("-o,--out", confusion_out, "CSV path (default: stdout)");

  bool census_json = false;
  auto* census = app.add_subcommand("census", "parameter breakdown without training");
  census_opts.add(census, true);
  census->add_flag("--json", census_json, "JSON output");

  std::string fetch_dataset = "all", fetch_dir, fetch_url;
  auto* fetch = app.add_subcommand("fetch", "download the canonical gzip files");
  fetch->add_option("--dataset", fetch_dataset, "mnist, fashion-mnist or all");
  fetch->add_option("--data-dir", fetch_dir, "dataset root");
  fetch->add_option("--base-url", fetch_url, "mirror URL");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*train) {
      train_opts.save_checkpoints = !no_checkpoint;
      return cmd_train(train_opts);
    }
    if (*compare) return cmd_compare(compare_opts);
    if (*sweep) return cmd_subset_sweep(sweep_opts, fractions);
    if (*confusion) return cmd_confusion(ckpt, confusion_dataset, confusion_dir, confusion_out);
    if (*census) return cmd_census(census_opts, census_json);
    if (*fetch) return cmd_fetch(fetch_dataset, fetch_dir, fetch_url);
  } catch (const Failure& f) {
    std::cerr << "error: " << f.message << '\n';
    return f.code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kData;
  }
  return kUsage;
}
