#include "symml/network_effect.hpp"

#include <set>

#include "symml/error.hpp"
#include "symml/symtree.hpp"

namespace symml {
namespace {

struct ParsedPatch {
  std::string uri;  // canonical
  Value bound;
};

ParsedPatch parse(const TypeRegistry& types, const PatcherRegistry& patchers,
                  const std::string& uri) {
  Value bound = parse_patch_uri(types, patchers, uri);
  return {to_patch_uri(types, patchers, bound), std::move(bound)};
}

VariantRecord apply(const TypeRegistry& types, const PatcherRegistry& patchers,
                    const NamedExperiment& exp,
                    const std::vector<const ParsedPatch*>& chain) {
  VariantRecord rec;
  rec.experiment = exp.name;
  std::vector<Value> bound;
  for (const ParsedPatch* p : chain) {
    rec.patches.push_back(p->uri);
    bound.push_back(p->bound);
  }
  try {
    rec.result = apply_patch(types, patchers, exp.tree, bound);
  } catch (const Error& e) {
    rec.error = e.kind() + ": " + e.what();
  }
  return rec;
}

std::string join(const std::vector<std::string>& parts, const char* sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

}  // namespace

NetworkEffectReport run_network_effect(
    const TypeRegistry& types, const PatcherRegistry& patchers,
    const std::vector<NamedExperiment>& experiments,
    const NetworkEffectOptions& options) {
  std::vector<ParsedPatch> singles;
  for (const auto& u : options.uris) singles.push_back(parse(types, patchers, u));
  std::vector<std::vector<ParsedPatch>> groups;
  for (const auto& g : options.groups) {
    groups.emplace_back();
    for (const auto& u : g) groups.back().push_back(parse(types, patchers, u));
  }

  NetworkEffectReport r;
  std::set<std::string> authored;
  for (const auto& p : singles) authored.insert(p.uri);
  for (const auto& g : groups)
    for (const auto& p : g) authored.insert(p.uri);
  r.experiments = experiments.size();
  r.patchers = authored.size();
  r.definitions = r.experiments + r.patchers;

  for (const auto& exp : experiments) {
    for (const auto& p : singles) {
      VariantRecord rec = apply(types, patchers, exp, {&p});
      (rec.result ? r.variants : r.failures) += 1;
      r.records.push_back(std::move(rec));
    }
  }

  if (!options.compose_all) return r;
  r.composed = true;
  std::uint64_t per_experiment = 1;
  for (const auto& g : groups) per_experiment *= g.size();
  r.composed_expected = per_experiment * experiments.size();
  if (groups.empty() || per_experiment == 0) return r;

  for (const auto& exp : experiments) {
    std::vector<Value> produced;
    std::vector<std::size_t> pick(groups.size(), 0);
    while (true) {
      std::vector<const ParsedPatch*> chain;
      for (std::size_t g = 0; g < groups.size(); ++g)
        chain.push_back(&groups[g][pick[g]]);
      VariantRecord rec = apply(types, patchers, exp, chain);
      if (rec.result) {
        ++r.composed_variants;
        bool fresh = true;
        for (const auto& seen : produced)
          if (sym_eq(seen, *rec.result)) fresh = false;
        if (fresh) {
          ++r.composed_distinct;
          produced.push_back(*rec.result);
        }
      } else {
        ++r.failures;
      }
      r.composed_records.push_back(std::move(rec));

      std::size_t g = groups.size();
      while (g > 0 && ++pick[g - 1] == groups[g - 1].size()) pick[--g] = 0;
      if (g == 0) break;
    }
  }
  return r;
}

std::string format_report(const NetworkEffectReport& r) {
  std::string out;
  auto line = [&out](const std::string& kind, const VariantRecord& rec) {
    out += kind + "\t" + rec.experiment + "\t" + join(rec.patches, "|") + "\t";
    out += rec.result ? "ok" : "error\t" + rec.error;
    out += "\n";
  };
  for (const auto& rec : r.records) line("variant", rec);
  for (const auto& rec : r.composed_records) line("composed", rec);
  out += "experiments\t" + std::to_string(r.experiments) + "\n";
  out += "patchers\t" + std::to_string(r.patchers) + "\n";
  out += "definitions\t" + std::to_string(r.definitions) + "\n";
  out += "variants\t" + std::to_string(r.variants) + "\n";
  if (r.composed) {
    out += "composed_expected\t" + std::to_string(r.composed_expected) + "\n";
    out += "composed_variants\t" + std::to_string(r.composed_variants) + "\n";
    out += "composed_distinct\t" + std::to_string(r.composed_distinct) + "\n";
  }
  out += "failures\t" + std::to_string(r.failures) + "\n";
  return out;
}

}  // namespace symml
