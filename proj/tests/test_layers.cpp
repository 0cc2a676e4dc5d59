#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "checkpoint.hpp"
#include "error.hpp"
#include "layers.hpp"
#include "network.hpp"
#include "support.hpp"

using namespace fckan;
using namespace fckan::testing;

namespace {

NetworkSpec spec_for(ModelKind kind) {
  NetworkSpec s;
  s.model = kind;
  return s;
}

double silu_ref(double v) { return v / (1.0 + std::exp(-v)); }

// Row-wise standardization with unit gamma and zero beta.
std::vector<double> normalize_row(std::span<const double> row, double eps) {
  double m = 0, var = 0;
  for (double v : row) m += v;
  m /= static_cast<double>(row.size());
  for (double v : row) var += (v - m) * (v - m);
  var /= static_cast<double>(row.size());
  std::vector<double> out;
  for (double v : row) out.push_back((v - m) / std::sqrt(var + eps));
  return out;
}

const Variable<double>& param(const Layer<double>& layer, const std::string& name) {
  for (const auto& p : layer.parameters()) {
    if (p.name == name) return p.var;
  }
  FAIL("missing parameter " << name);
  throw;
}

}  // namespace

TEST_CASE("parameter census reproduces the reference totals") {
  const std::map<ModelKind, std::size_t> expected{
      {ModelKind::kEfficientKan, 508160}, {ModelKind::kBsrbf, 459040},
      {ModelKind::kFastKan, 459114},      {ModelKind::kMlp, 52512},
      {ModelKind::kFasterKan, 408224},    {ModelKind::kFcKan, 560820}};
  for (const auto& [kind, total] : expected) {
    CAPTURE(std::string(name_of(kind)));
    Model<float> model(spec_for(kind), 0);
    const Census c = model.census();
    CHECK(c.counted_total == total);
    std::size_t sum = 0;
    for (const auto& e : c.entries) {
      CHECK(e.count == e.shape.rows * e.shape.cols);
      if (e.trainable && e.counted) sum += e.count;
    }
    CHECK(sum == total);
  }
}

TEST_CASE("FasterKAN inverse widths are trainable but outside the reference count") {
  Model<double> model(spec_for(ModelKind::kFasterKan), 0);
  const Census c = model.census();
  CHECK(c.counted_total == 408224);
  CHECK(c.trainable_total == 408226);
  std::size_t uncounted = 0;
  for (const auto& e : c.entries) uncounted += (e.trainable && !e.counted) ? e.count : 0;
  CHECK(uncounted == 2);
}

TEST_CASE("FC-KAN census per branch") {
  Model<double> model(spec_for(ModelKind::kFcKan), 0);
  std::map<std::string, std::size_t> per_branch;
  for (const auto& e : model.census().entries) {
    if (e.trainable) per_branch[e.path.substr(0, e.path.find('.'))] += e.count;
  }
  // DoG: 3·784·64 + 2·64 and 3·64·10 + 2·10; BS: LN + 8 bases per input.
  CHECK(per_branch["dog"] == 3 * 784 * 64 + 2 * 64 + 3 * 64 * 10 + 2 * 10);
  CHECK(per_branch["bs"] == 2 * 784 + 64 * 784 * 8 + 2 * 64 + 10 * 64 * 8);
  CHECK(per_branch.size() == 2);
}

TEST_CASE("parameter paths") {
  Model<double> fc(spec_for(ModelKind::kFcKan), 0);
  std::vector<std::string> names;
  for (const auto& p : fc.parameters()) names.push_back(p.name);
  CHECK(names.front() == "dog.layers.0.scale");
  CHECK(std::find(names.begin(), names.end(), "bs.layers.1.spline_weight") != names.end());

  NetworkSpec s = spec_for(ModelKind::kFcKan);
  s.combine = CombineMethod::kConcatLinear;
  Model<double> lin(s, 0);
  const auto params = lin.parameters();
  CHECK(params[params.size() - 2].name == "head.weight");
  CHECK(params.back().name == "head.bias");
  CHECK(params[params.size() - 2].var.shape() == Shape{10, 20});
}

TEST_CASE("initialization is seeded and shared across precisions") {
  const NetworkSpec spec = spec_for(ModelKind::kFcKan);
  Model<double> a(spec, 3), b(spec, 3), c(spec, 4);
  Model<float> f(spec, 3);
  const auto pa = a.parameters(), pb = b.parameters(), pc = c.parameters();
  const auto pf = f.parameters();
  bool differs = false;
  for (std::size_t i = 0; i < pa.size(); ++i) {
    CHECK(pa[i].var.value() == pb[i].var.value());
    differs = differs || !(pa[i].var.value() == pc[i].var.value());
    const auto da = pa[i].var.value().data();
    const auto df = pf[i].var.value().data();
    for (std::size_t k = 0; k < da.size(); ++k) REQUIRE(df[k] == static_cast<float>(da[k]));
  }
  CHECK(differs);
}

TEST_CASE("kaiming_uniform bounds") {
  Rng rng(1);
  const auto w = kaiming_uniform<double>(64, 100, 100, rng);
  double lo = 1, hi = -1;
  for (double v : w.data()) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  CHECK(lo >= -0.1);
  CHECK(hi <= 0.1);
  CHECK(hi - lo > 0.19);
}

TEST_CASE("MLP layer against a scalar loop") {
  Rng rng(2);
  NetworkSpec spec;
  auto layer = make_layer<double>(ModelKind::kMlp, 5, 3, spec, rng);
  const auto x = random_tensor(4, 5, rng, -2, 2);
  const auto y = layer->forward(Variable<double>(x)).value();
  const auto& w = param(*layer, "weight").value();
  for (std::size_t r = 0; r < 4; ++r) {
    const auto xn = normalize_row(x.row(r), 1e-5);
    for (std::size_t j = 0; j < 3; ++j) {
      double acc = 0;
      for (std::size_t i = 0; i < 5; ++i) acc += w(j, i) * silu_ref(xn[i]);
      CHECK(y(r, j) == doctest::Approx(acc).epsilon(1e-12).scale(1));
    }
  }
}

TEST_CASE("EfficientKAN layer against a scalar loop") {
  Rng rng(3);
  NetworkSpec spec;
  auto layer = make_layer<double>(ModelKind::kEfficientKan, 4, 3, spec, rng);
  const auto x = random_tensor(5, 4, rng, -1.2, 1.2);
  const auto y = layer->forward(Variable<double>(x)).value();
  const auto& base = param(*layer, "base_weight").value();
  const auto& spline = param(*layer, "spline_weight").value();
  const auto& scaler = param(*layer, "spline_scaler").value();
  const auto t = reference_knots(spec.bspline);
  const std::size_t nb = spec.bspline.num_bases();
  for (std::size_t r = 0; r < 5; ++r) {
    for (std::size_t j = 0; j < 3; ++j) {
      double acc = 0;
      for (std::size_t i = 0; i < 4; ++i) {
        acc += base(j, i) * silu_ref(x(r, i));
        for (std::size_t g = 0; g < nb; ++g) {
          acc += spline(j, i * nb + g) * scaler(j, i) *
                 reference_bspline(g, spec.bspline.spline_order, x(r, i), t);
        }
      }
      CHECK(y(r, j) == doctest::Approx(acc).epsilon(1e-12).scale(1));
    }
  }
}

TEST_CASE("FastKAN layer is the sum of its two paths") {
  Rng rng(4);
  NetworkSpec spec;
  FastKanLayer<double> layer(6, 2, spec.rbf, 1e-5, rng);
  Variable<double> x(random_tensor(3, 6, rng));
  const auto y = layer.forward(x).value();
  const auto s = layer.spline_path(x).value(), b = layer.base_path(x).value();
  for (std::size_t i = 0; i < y.size(); ++i) CHECK(y[i] == doctest::Approx(s[i] + b[i]));
}

TEST_CASE("BSRBF uses G + k Gaussian centers") {
  Rng rng(5);
  NetworkSpec spec;
  BsrbfLayer<double> layer(4, 2, spec.bspline, spec.rbf, 1e-5, rng);
  CHECK(layer.rbf_config().num_grids == spec.bspline.num_bases());
  CHECK(layer.spline_weight().shape() == Shape{2, 4 * 8});
}

TEST_CASE("DoG layer starts from unit scale and zero translation") {
  Rng rng(6);
  DogLayer<double> layer(3, 2, 1e-5, rng);
  for (double v : layer.scale().value().data()) CHECK(v == 1.0);
  for (double v : layer.translation().value().data()) CHECK(v == 0.0);
  const auto x = random_tensor(4, 3, rng);
  const auto y = layer.forward(Variable<double>(x)).value();
  const auto raw = dog_linear(Variable<double>(x), layer.scale(), layer.translation(), layer.weight())
                       .value();
  for (std::size_t r = 0; r < 4; ++r) {
    const auto n = normalize_row(raw.row(r), 1e-5);
    for (std::size_t j = 0; j < 2; ++j) CHECK(y(r, j) == doctest::Approx(n[j]).epsilon(1e-12));
  }
}

TEST_CASE("input width is checked") {
  Rng rng(7);
  NetworkSpec spec;
  auto layer = make_layer<double>(ModelKind::kMlp, 5, 3, spec, rng);
  CHECK_THROWS_AS(layer->forward(Variable<double>(Tensor<double>(2, 4))), Error);
}

TEST_CASE("FC-KAN forward combines the branch outputs") {
  NetworkSpec spec = spec_for(ModelKind::kFcKan);
  spec.widths = {12, 6, 4};
  Rng rng(8);
  const auto x = random_tensor(3, 12, rng, 0, 1);
  for (CombineMethod m : kAllCombineMethods) {
    spec.combine = m;
    Model<double> model(spec, 1);
    Variable<double> xv(x);
    const auto out = model.forward(xv).value();
    CHECK(model.output_width() == (m == CombineMethod::kConcat ? 8u : 4u));
    CHECK(out.cols() == model.output_width());
    if (m != CombineMethod::kConcatLinear) {
      const auto branches = model.branch_outputs(xv);
      const auto ref = combine<double>(branches, m).value();
      CHECK(out == ref);
    }
    const auto scores = model.predict(x);
    CHECK(scores.cols() == 4);
    CHECK(scores == model.readout(out));
  }
}

TEST_CASE("concat readout sums the slices") {
  auto wide = Tensor<double>::from_rows({{1, 2, 10, 20}, {3, 4, 30, 40}});
  CHECK(concat_readout(wide, 2) == Tensor<double>::from_rows({{11, 22}, {33, 44}}));
}

TEST_CASE("every FC-KAN function pair builds and runs") {
  const FunctionKind all[] = {FunctionKind::kBS, FunctionKind::kRBF, FunctionKind::kDoG,
                              FunctionKind::kBase};
  Rng rng(9);
  const auto x = random_tensor(2, 10, rng, 0, 1);
  for (std::size_t a = 0; a < 4; ++a) {
    for (std::size_t b = a + 1; b < 4; ++b) {
      NetworkSpec spec = spec_for(ModelKind::kFcKan);
      spec.widths = {10, 5, 3};
      spec.functions = {all[a], all[b]};
      Model<float> model(spec, 0);
      CHECK(model.num_branches() == 2);
      CHECK(model.predict(tensor_cast<float>(x)).shape() == Shape{2, 3});
    }
  }
}

TEST_CASE("finite differences for every layer type") {
  Rng rng(31);
  for (const auto& kind : layer_case_kinds()) {
    CAPTURE(kind);
    for (int i = 0; i < 20; ++i) {
      const GradCheck g = layer_case(kind, rng);
      CHECK(g.max_error <= 1e-4);
    }
  }
}

TEST_CASE("finite differences through a whole FC-KAN model") {
  Rng rng(41);
  for (CombineMethod m : kAllCombineMethods) {
    CAPTURE(std::string(name_of(m)));
    NetworkSpec spec = spec_for(ModelKind::kFcKan);
    spec.widths = {4, 3, 2};
    spec.combine = m;
    Model<double> model(spec, rng.next());
    std::vector<Variable<double>> leaves;
    for (const auto& p : model.parameters()) leaves.push_back(p.var);
    const Variable<double> x(random_tensor(2, 4, rng, 0, 1));
    const std::vector<int> labels{0, 1};
    const GradCheck g = check_gradients(leaves, [&] {
      return softmax_cross_entropy<double>(model.forward(x), labels);
    });
    CHECK(g.max_error <= 1e-4);
  }
}

TEST_CASE("checkpoint round trip and mismatch errors") {
  NetworkSpec spec = spec_for(ModelKind::kFcKan);
  spec.widths = {16, 8, 4};
  Model<double> a(spec, 1);
  const auto bytes = encode_checkpoint(a);
  const Checkpoint ckpt = decode_checkpoint(bytes);
  CHECK(ckpt.spec.to_text() == spec.to_text());
  CHECK(ckpt.scalar_bytes == 8);
  Model<double> b(spec, 2);
  load_parameters(b, ckpt);
  const auto pa = a.parameters(), pb = b.parameters();
  for (std::size_t i = 0; i < pa.size(); ++i) CHECK(pa[i].var.value() == pb[i].var.value());

  const auto dir = std::filesystem::temp_directory_path() / "fckan_test_ckpt";
  std::filesystem::create_directories(dir);
  save_checkpoint(a, dir / "a.ckpt");
  CHECK(read_checkpoint(dir / "a.ckpt").entries.size() == pa.size());
  std::filesystem::remove_all(dir);

  NetworkSpec other = spec;
  other.widths = {16, 5, 4};
  Model<double> c(other, 0);
  try {
    load_parameters(c, ckpt);
    FAIL("expected a mismatch");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kDimension);
    CHECK(std::string(e.what()).find("5x16") != std::string::npos);
  }

  auto truncated = bytes;
  truncated.resize(truncated.size() / 2);
  CHECK_THROWS_AS(decode_checkpoint(truncated), Error);
  auto bad = bytes;
  bad[0] = 'X';
  CHECK_THROWS_AS(decode_checkpoint(bad), Error);
}
