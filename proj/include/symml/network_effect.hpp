#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "symml/patch.hpp"
#include "symml/schema.hpp"
#include "symml/value.hpp"

namespace symml {

struct NamedExperiment {
  std::string name;
  Value tree;
};

struct NetworkEffectOptions {
  // Patches applied one at a time to every experiment.
  std::vector<std::string> uris;
  // Mutually exclusive groups; with compose_all every experiment receives
  // one patch from each group, in group order.
  std::vector<std::vector<std::string>> groups;
  bool compose_all = false;
};

struct VariantRecord {
  std::string experiment;
  std::vector<std::string> patches;  // canonical URIs, in application order
  std::optional<Value> result;       // absent on failure
  std::string error;
};

struct NetworkEffectReport {
  std::size_t experiments = 0;
  std::size_t patchers = 0;       // distinct rules authored
  std::size_t definitions = 0;    // experiments + patchers
  std::size_t variants = 0;       // successful single-patch applications
  std::size_t failures = 0;
  std::vector<VariantRecord> records;

  bool composed = false;
  std::uint64_t composed_expected = 0;  // experiments * product of group sizes
  std::size_t composed_variants = 0;
  std::size_t composed_distinct = 0;    // pairwise non-sym_eq per experiment
  std::vector<VariantRecord> composed_records;
};

// Throws UriSyntaxError, UnknownPatcher, ValidationError for bad URIs; per
// application failures are recorded and the run continues.
NetworkEffectReport run_network_effect(const TypeRegistry& types,
                                       const PatcherRegistry& patchers,
                                       const std::vector<NamedExperiment>& experiments,
                                       const NetworkEffectOptions& options);

// Tab-separated ledger, one record per line, summary last.
std::string format_report(const NetworkEffectReport& report);

}  // namespace symml
