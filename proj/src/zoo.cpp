#include "symml/zoo.hpp"

#include <algorithm>
#include <any>
#include <atomic>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "symml/builtins.hpp"
#include "symml/error.hpp"
#include "symml/placehold.hpp"
#include "symml/rng.hpp"
#include "symml/serialize.hpp"
#include "symml/symtree.hpp"
#include "zoo_schemas.hpp"

namespace symml::zoo {
namespace {

std::atomic<std::uint64_t> g_training_runs{0};

std::int64_t int_field(const Value& obj, std::string_view name) {
  const Value* v = obj.as_object().fields.find(name);
  if (!v || !v->is_int())
    throw EvaluationError(obj.as_object().type + " has no integer field " +
                          std::string(name));
  return v->as_int();
}

const Value& field(const Value& obj, std::string_view name) {
  const Value* v = obj.is_object() ? obj.as_object().fields.find(name) : nullptr;
  if (!v)
    throw EvaluationError("missing field " + std::string(name) + " in " +
                          obj.summary());
  return *v;
}

}  // namespace

std::string_view schema_bundle() { return kZooSchemaBundle; }

void register_types(TypeRegistry& types) {
  load_schema_bundle(types, schema_bundle());
  types.register_derived(
      "Dataset", "num_classes", [](const Value& ds, const TypeRegistry&) {
        Blobs b = generate_blobs(ds);
        std::vector<bool> seen(b.num_classes, false);
        for (int label : b.y) seen[static_cast<std::size_t>(label)] = true;
        return Value(static_cast<std::int64_t>(
            std::count(seen.begin(), seen.end(), true)));
      });
  types.register_derived(
      "Dataset", "num_features", [](const Value& ds, const TypeRegistry&) {
        return Value(static_cast<std::int64_t>(generate_blobs(ds).n_features));
      });
}

Workspace make_workspace() {
  Workspace ws;
  register_types(ws.types);
  register_builtin_patchers(ws.types, ws.patchers);
  return ws;
}

const std::vector<Preset>& presets() {
  static const std::vector<Preset> kPresets = {
      {"cifar10", "Cifar10", 400, 16, 10, 10},
      {"cifar100", "Cifar100", 800, 24, 100, 100},
      {"imagenet", "ImageNet", 2000, 32, 1000, 1000},
  };
  return kPresets;
}

std::vector<std::string> preset_names() {
  std::vector<std::string> out;
  for (const auto& p : presets()) out.emplace_back(p.name);
  return out;
}

Value dataset_preset(const TypeRegistry& types, std::string_view name) {
  for (const auto& p : presets()) {
    if (p.name == name) return instantiate(types, std::string(p.type_name));
  }
  throw ValidationError(KeyPath(), "unknown dataset preset '" +
                                       std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// Data

Blobs generate_blobs(const Value& dataset) {
  Blobs b;
  std::int64_t seed = 0;
  if (dataset.is_object_of("SyntheticBlobs")) {
    b.n_points = static_cast<std::size_t>(int_field(dataset, "n_points"));
    b.n_features = static_cast<std::size_t>(int_field(dataset, "n_features"));
    b.num_classes = static_cast<std::size_t>(int_field(dataset, "num_classes"));
    seed = int_field(dataset, "seed");
  } else {
    const Preset* preset = nullptr;
    for (const auto& p : presets())
      if (dataset.is_object_of(p.type_name)) preset = &p;
    if (!preset)
      throw EvaluationError("cannot generate data for " + dataset.summary());
    b.n_points = static_cast<std::size_t>(preset->n_points);
    b.n_features = static_cast<std::size_t>(preset->n_features);
    b.num_classes = static_cast<std::size_t>(preset->num_classes);
    seed = preset->seed;
  }
  SplitMix64 rng(mix_seed(static_cast<std::uint64_t>(seed), 0xB10B5));

  std::vector<double> centers(b.num_classes * b.n_features);
  for (double& c : centers) c = rng.normal();

  constexpr double kNoise = 1.6;
  b.x.resize(b.n_points * b.n_features);
  b.y.resize(b.n_points);
  for (std::size_t i = 0; i < b.n_points; ++i) {
    std::size_t label = i % b.num_classes;
    b.y[i] = static_cast<int>(label);
    for (std::size_t f = 0; f < b.n_features; ++f)
      b.x[i * b.n_features + f] =
          centers[label * b.n_features + f] + kNoise * rng.normal();
  }
  // Fisher-Yates over rows.
  for (std::size_t i = b.n_points; i-- > 1;) {
    std::size_t j = static_cast<std::size_t>(rng.below(i + 1));
    if (i == j) continue;
    std::swap(b.y[i], b.y[j]);
    std::swap_ranges(b.x.begin() + static_cast<std::ptrdiff_t>(i * b.n_features),
                     b.x.begin() + static_cast<std::ptrdiff_t>((i + 1) * b.n_features),
                     b.x.begin() + static_cast<std::ptrdiff_t>(j * b.n_features));
  }
  return b;
}

// ---------------------------------------------------------------------------
// Flops

namespace {

std::uint64_t sat_mul(std::uint64_t a, std::uint64_t b) {
  std::uint64_t out;
  return __builtin_mul_overflow(a, b, &out) ? UINT64_MAX : out;
}

std::uint64_t sat_add(std::uint64_t a, std::uint64_t b) {
  std::uint64_t out;
  return __builtin_add_overflow(a, b, &out) ? UINT64_MAX : out;
}

const List& layers_of(const Value& experiment) {
  const Value& layers = field(field(experiment, "model"), "layers");
  if (!layers.is_list()) throw EvaluationError("model.layers is not a list");
  return layers.as_list();
}

std::int64_t input_width(const TypeRegistry& types, const Value& experiment) {
  Value n = types.derived(field(experiment, "dataset"), "num_features");
  return n.as_int();
}

}  // namespace

std::uint64_t estimate_flops(const TypeRegistry& types,
                             const Value& experiment) {
  auto in = static_cast<std::uint64_t>(input_width(types, experiment));
  std::uint64_t total = 0;
  for (const Value& layer : layers_of(experiment)) {
    const std::string& type = layer.as_object().type;
    if (types.is_subtype(type, "Conv")) {
      auto out = static_cast<std::uint64_t>(int_field(layer, "filters"));
      auto k = static_cast<std::uint64_t>(int_field(layer, "kernel"));
      std::uint64_t term =
          types.is_subtype(type, "SepConv")
              ? sat_add(sat_mul(in, k * k), sat_mul(in, out))
              : sat_mul(sat_mul(in, out), k * k);
      total = sat_add(total, term);
      in = out;
    } else if (types.is_subtype(type, "Dense")) {
      auto out = static_cast<std::uint64_t>(int_field(layer, "units"));
      total = sat_add(total, sat_mul(in, out));
      in = out;
    }
  }
  return total;
}

bool within_flops_budget(const TypeRegistry& types, const Value& experiment) {
  const Value* trainer = experiment.as_object().fields.find("trainer");
  if (!trainer) return true;
  std::int64_t budget = int_field(*trainer, "flops_budget");
  if (budget <= 0) return true;
  return estimate_flops(types, experiment) <= static_cast<std::uint64_t>(budget);
}

// ---------------------------------------------------------------------------
// Training

namespace {

// Row-major matrix.
struct Matrix {
  std::size_t rows = 0, cols = 0;
  std::vector<double> data;
  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}
  double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

enum class Act { Relu, Swish, Gelu };

Act activation_of(const Value& layer) {
  const Value& a = field(layer, "activation");
  const std::string& t = a.as_object().type;
  if (t == "ReLU") return Act::Relu;
  if (t == "Swish") return Act::Swish;
  if (t == "GELU") return Act::Gelu;
  throw EvaluationError("unsupported activation " + t);
}

double apply(Act act, double x) {
  switch (act) {
    case Act::Relu: return x > 0 ? x : 0.0;
    case Act::Swish: return x / (1.0 + std::exp(-x));
    case Act::Gelu:
      return 0.5 * x *
             (1.0 + std::tanh(0.7978845608028654 * (x + 0.044715 * x * x * x)));
  }
  return x;
}

Matrix random_weights(SplitMix64& rng, std::size_t in, std::size_t out) {
  Matrix w(in, out);
  double bound = std::sqrt(3.0 / static_cast<double>(in));
  for (double& v : w.data) v = rng.uniform(-bound, bound);
  return w;
}

Matrix project(const Matrix& x, const Matrix& w, Act act) {
  Matrix out(x.rows, w.cols);
  for (std::size_t i = 0; i < x.rows; ++i) {
    double* o = &out.data[i * out.cols];
    for (std::size_t k = 0; k < x.cols; ++k) {
      double xv = x.at(i, k);
      const double* wr = &w.data[k * w.cols];
      for (std::size_t j = 0; j < w.cols; ++j) o[j] += xv * wr[j];
    }
    for (std::size_t j = 0; j < out.cols; ++j) o[j] = apply(act, o[j]);
  }
  return out;
}

// Circular window over the feature axis; `taps[j][t]` weights position
// j + t - k/2.
Matrix smooth(const Matrix& x, std::size_t k, const std::vector<double>& taps,
              bool per_channel) {
  Matrix out(x.rows, x.cols);
  const std::size_t n = x.cols;
  const std::size_t half = k / 2;
  for (std::size_t i = 0; i < x.rows; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t t = 0; t < k; ++t) {
        std::size_t src = (j + t + n * k - half) % n;
        s += x.at(i, src) * taps[per_channel ? j * k + t : t];
      }
      out.at(i, j) = s;
    }
  }
  return out;
}

Matrix features(const TypeRegistry& types, const Value& experiment,
                const Matrix& input) {
  const List& layers = layers_of(experiment);
  const auto seed =
      static_cast<std::uint64_t>(int_field(field(experiment, "trainer"), "seed"));
  Matrix h = input;
  for (std::size_t li = 0; li + 1 < layers.size(); ++li) {
    const Value& layer = layers[li];
    const std::string& type = layer.as_object().type;
    SplitMix64 rng(mix_seed(seed, li + 1));
    Act act = activation_of(layer);
    if (types.is_subtype(type, "SepConv")) {
      auto k = static_cast<std::size_t>(int_field(layer, "kernel"));
      std::vector<double> taps(h.cols * k);
      double bound = std::sqrt(3.0 / static_cast<double>(k));
      for (double& t : taps) t = rng.uniform(-bound, bound);
      Matrix s = smooth(h, k, taps, true);
      h = project(s, random_weights(rng, s.cols,
                                    static_cast<std::size_t>(int_field(layer, "filters"))),
                  act);
    } else if (types.is_subtype(type, "Conv")) {
      auto k = static_cast<std::size_t>(int_field(layer, "kernel"));
      std::vector<double> taps(k, 1.0 / static_cast<double>(k));
      Matrix s = smooth(h, k, taps, false);
      h = project(s, random_weights(rng, s.cols,
                                    static_cast<std::size_t>(int_field(layer, "filters"))),
                  act);
    } else if (types.is_subtype(type, "Dense")) {
      h = project(h, random_weights(rng, h.cols,
                                    static_cast<std::size_t>(int_field(layer, "units"))),
                  act);
    } else {
      throw EvaluationError("unsupported layer " + type);
    }
  }
  return h;
}

struct OptimizerConfig {
  bool adam = false;
  double lr = 0.1;
};

OptimizerConfig optimizer_of(const TypeRegistry& types, const Value& experiment) {
  const Value& opt = field(experiment, "optimizer");
  const std::string& t = opt.as_object().type;
  if (types.is_subtype(t, "Adam")) return {true, field(opt, "lr").as_float()};
  if (types.is_subtype(t, "SGD"))
    return {false, field(opt, "learning_rate").as_float()};
  throw EvaluationError("unsupported optimizer " + t);
}

double accuracy(const Matrix& x, const std::vector<int>& y, std::size_t begin,
                std::size_t end, const Matrix& w, const std::vector<double>& b) {
  std::size_t correct = 0;
  for (std::size_t i = begin; i < end; ++i) {
    std::size_t best = 0;
    double best_v = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < w.cols; ++c) {
      double z = b[c];
      for (std::size_t k = 0; k < x.cols; ++k) z += x.at(i, k) * w.at(k, c);
      if (z > best_v) {
        best_v = z;
        best = c;
      }
    }
    if (static_cast<int>(best) == y[i]) ++correct;
  }
  return end > begin ? static_cast<double>(correct) /
                           static_cast<double>(end - begin)
                     : 0.0;
}

}  // namespace

Score train(const TypeRegistry& types, const Value& experiment) {
  if (!experiment.is_object() ||
      !types.contains(experiment.as_object().type) ||
      !types.is_subtype(experiment.as_object().type, "MLExperiment"))
    throw EvaluationError("not an MLExperiment: " + experiment.summary());
  if (!derive_space(experiment).empty())
    throw EvaluationError("experiment still contains placeholders");
  const List& layers = layers_of(experiment);
  if (layers.empty() ||
      !types.is_subtype(layers.back().as_object().type, "Dense"))
    throw EvaluationError("the last layer must be Dense");

  const Value& dataset = field(experiment, "dataset");
  const std::int64_t classes = types.derived(dataset, "num_classes").as_int();
  const std::int64_t units = int_field(layers.back(), "units");
  if (units != classes) throw HeadMismatch(units, classes);

  ++g_training_runs;
  Blobs data = generate_blobs(dataset);
  Matrix input(data.n_points, data.n_features);
  input.data = data.x;
  Matrix h = features(types, experiment, input);

  const std::size_t n = h.rows, d = h.cols, c = data.num_classes;
  const std::size_t n_train = n * 3 / 4;

  // Standardize on training statistics.
  for (std::size_t k = 0; k < d; ++k) {
    double mean = 0.0, var = 0.0;
    for (std::size_t i = 0; i < n_train; ++i) mean += h.at(i, k);
    mean /= static_cast<double>(n_train);
    for (std::size_t i = 0; i < n_train; ++i)
      var += (h.at(i, k) - mean) * (h.at(i, k) - mean);
    double sd = std::sqrt(var / static_cast<double>(n_train));
    double inv = sd > 1e-12 ? 1.0 / sd : 0.0;
    for (std::size_t i = 0; i < n; ++i) h.at(i, k) = (h.at(i, k) - mean) * inv;
  }

  const OptimizerConfig opt = optimizer_of(types, experiment);
  const auto epochs = int_field(field(experiment, "trainer"), "epochs");

  Matrix w(d, c);
  std::vector<double> b(c, 0.0);
  Matrix gw(d, c);
  std::vector<double> gb(c);
  Matrix mw(d, c), vw(d, c);
  std::vector<double> mb(c, 0.0), vb(c, 0.0);
  std::vector<double> p(c);
  constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;

  for (std::int64_t step = 1; step <= epochs; ++step) {
    std::fill(gw.data.begin(), gw.data.end(), 0.0);
    std::fill(gb.begin(), gb.end(), 0.0);
    for (std::size_t i = 0; i < n_train; ++i) {
      double zmax = -std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < c; ++j) {
        double z = b[j];
        for (std::size_t k = 0; k < d; ++k) z += h.at(i, k) * w.at(k, j);
        p[j] = z;
        zmax = std::max(zmax, z);
      }
      double sum = 0.0;
      for (std::size_t j = 0; j < c; ++j) sum += (p[j] = std::exp(p[j] - zmax));
      for (std::size_t j = 0; j < c; ++j) {
        double g = p[j] / sum - (static_cast<int>(j) == data.y[i] ? 1.0 : 0.0);
        gb[j] += g;
        if (g == 0.0) continue;
        for (std::size_t k = 0; k < d; ++k) gw.at(k, j) += h.at(i, k) * g;
      }
    }
    const double inv_n = 1.0 / static_cast<double>(n_train);
    if (opt.adam) {
      const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(step));
      const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(step));
      auto update = [&](double& param, double& m, double& v, double g) {
        m = kBeta1 * m + (1.0 - kBeta1) * g;
        v = kBeta2 * v + (1.0 - kBeta2) * g * g;
        param -= opt.lr * (m / c1) / (std::sqrt(v / c2) + kEps);
      };
      for (std::size_t q = 0; q < w.data.size(); ++q)
        update(w.data[q], mw.data[q], vw.data[q], gw.data[q] * inv_n);
      for (std::size_t j = 0; j < c; ++j) update(b[j], mb[j], vb[j], gb[j] * inv_n);
    } else {
      for (std::size_t q = 0; q < w.data.size(); ++q)
        w.data[q] -= opt.lr * gw.data[q] * inv_n;
      for (std::size_t j = 0; j < c; ++j) b[j] -= opt.lr * gb[j] * inv_n;
    }
  }

  Score s;
  s.train_accuracy = accuracy(h, data.y, 0, n_train, w, b);
  s.test_accuracy = accuracy(h, data.y, n_train, n, w, b);
  return s;
}

Score evaluate_full(const TypeRegistry& types, Tree& tree) {
  if (const std::any* cached = tree.state().find(KeyPath()))
    if (const auto* s = std::any_cast<Score>(cached)) return *s;
  Score s = train(types, tree.root());
  tree.state().put(KeyPath(), s);
  return s;
}

double evaluate(const TypeRegistry& types, Tree& tree) {
  return evaluate_full(types, tree).test_accuracy;
}

std::uint64_t training_runs() { return g_training_runs.load(); }

// ---------------------------------------------------------------------------
// Examples

namespace {

Value act(const TypeRegistry& t, const char* name) { return instantiate(t, name); }

Value conv(const TypeRegistry& t, std::int64_t filters, std::int64_t kernel,
           const char* activation = "ReLU", const char* type = "Conv") {
  return instantiate(t, type,
                     {{"filters", filters},
                      {"kernel", kernel},
                      {"activation", act(t, activation)}});
}

Value dense(const TypeRegistry& t, std::int64_t units,
            const char* activation = "ReLU") {
  return instantiate(t, "Dense",
                     {{"units", units}, {"activation", act(t, activation)}});
}

Value sgd(const TypeRegistry& t, double lr) {
  return instantiate(t, "SGD", {{"learning_rate", lr}});
}

Value adam(const TypeRegistry& t, double lr) {
  return instantiate(t, "Adam", {{"lr", lr}});
}

Value experiment(const TypeRegistry& t, std::string_view dataset, List layers,
                 Value optimizer, std::int64_t epochs = 10) {
  return instantiate(
      t, "MLExperiment",
      {{"dataset", dataset_preset(t, dataset)},
       {"model", instantiate(t, "Model", {{"layers", Value(std::move(layers))}})},
       {"optimizer", std::move(optimizer)},
       {"trainer", instantiate(t, "Trainer", {{"epochs", epochs}})}});
}

}  // namespace

std::vector<std::string> example_names() {
  return {"mlp_toy", "mobilenet_toy", "resnet_toy", "transformer_toy",
          "vgg_toy"};
}

Value example(const TypeRegistry& t, std::string_view name) {
  if (name == "resnet_toy")
    return experiment(t, "imagenet",
                      {conv(t, 16, 3), conv(t, 32, 3), conv(t, 64, 3),
                       dense(t, 1000)},
                      sgd(t, 0.1));
  if (name == "transformer_toy")
    return experiment(t, "cifar10",
                      {dense(t, 64, "GELU"), dense(t, 128), dense(t, 64, "GELU"),
                       dense(t, 128), dense(t, 10)},
                      adam(t, 0.001), 20);
  if (name == "mlp_toy")
    return experiment(t, "cifar10", {dense(t, 32), dense(t, 10)}, sgd(t, 0.1));
  if (name == "vgg_toy")
    return experiment(t, "cifar100",
                      {conv(t, 8, 3), conv(t, 8, 3), conv(t, 16, 3),
                       dense(t, 100)},
                      sgd(t, 0.05));
  if (name == "mobilenet_toy")
    return experiment(t, "cifar10",
                      {conv(t, 16, 3, "Swish", "SepConv"), conv(t, 32, 1),
                       dense(t, 10)},
                      adam(t, 0.01));
  throw std::out_of_range("no example named " + std::string(name));
}

}  // namespace symml::zoo
