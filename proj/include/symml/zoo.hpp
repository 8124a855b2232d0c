#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "symml/patch.hpp"
#include "symml/schema.hpp"
#include "symml/symtree.hpp"
#include "symml/value.hpp"

namespace symml::zoo {

// The bundled schema file (zoo/schemas.sym.json), embedded at build time.
std::string_view schema_bundle();

// Loads the bundled schemas and attaches the derived attributes
// `num_classes` and `num_features` to datasets.
void register_types(TypeRegistry& types);

// Registry pair with the zoo types and every built-in patcher.
struct Workspace {
  TypeRegistry types;
  PatcherRegistry patchers;
};
Workspace make_workspace();

// Named dataset stand-ins: synthetic blobs with the real class counts. Each
// has its own fieldless type, so the class count is only reachable through
// the `num_classes` derived attribute.
struct Preset {
  std::string_view name;
  std::string_view type_name;
  std::int64_t n_points;
  std::int64_t n_features;
  std::int64_t num_classes;
  std::int64_t seed;
};
const std::vector<Preset>& presets();
std::vector<std::string> preset_names();
// Instance of the preset's type. Throws ValidationError for an unknown name.
Value dataset_preset(const TypeRegistry& types, std::string_view name);

// Seeded Gaussian blobs, rows shuffled. Pure function of the dataset object
// (a SyntheticBlobs or one of the preset types).
struct Blobs {
  std::size_t n_points = 0;
  std::size_t n_features = 0;
  std::size_t num_classes = 0;
  std::vector<double> x;  // row-major n_points x n_features
  std::vector<int> y;
};
Blobs generate_blobs(const Value& dataset);

// Sum over layers: Conv in*out*k^2, SepConv in*k^2 + in*out, Dense in*out.
// The first layer's input width is the dataset's feature count. Saturates
// at UINT64_MAX.
std::uint64_t estimate_flops(const TypeRegistry& types, const Value& experiment);

// True when trainer.flops_budget is 0 (unconstrained) or not exceeded.
bool within_flops_budget(const TypeRegistry& types, const Value& experiment);

struct Score {
  double test_accuracy = 0.0;
  double train_accuracy = 0.0;
};

// Trains the toy model from scratch. Deterministic: sym_eq experiments give
// bit-identical scores. Throws HeadMismatch, EvaluationError.
Score train(const TypeRegistry& types, const Value& experiment);

// Held-out accuracy, cached in the tree's state at the root path.
double evaluate(const TypeRegistry& types, Tree& tree);
Score evaluate_full(const TypeRegistry& types, Tree& tree);

// Number of times `train` has actually run in this process.
std::uint64_t training_runs();

// Example experiments shipped with the zoo.
std::vector<std::string> example_names();
// Throws std::out_of_range for an unknown name.
Value example(const TypeRegistry& types, std::string_view name);

}  // namespace symml::zoo
