// symml: command-line front end for symbolic experiment trees.
//
// Exit codes: 0 success, 1 usage error, 2 validation or patch error,
// 3 I/O error or malformed file.

#include <bit>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "symml/error.hpp"
#include "symml/network_effect.hpp"
#include "symml/patch.hpp"
#include "symml/placehold.hpp"
#include "symml/query.hpp"
#include "symml/serialize.hpp"
#include "symml/symtree.hpp"
#include "symml/tune.hpp"
#include "symml/zoo.hpp"

namespace {

using namespace symml;

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kInvalid = 2;
constexpr int kIo = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Value load(const zoo::Workspace& ws, const std::string& path) {
  return deserialize(ws.types, read_file(path));
}

void emit(const std::string& out_path, const std::string& text) {
  if (out_path.empty() || out_path == "-")
    std::cout << text;
  else
    write_file(out_path, text);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep))
    if (!cur.empty()) out.push_back(cur);
  return out;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string stem_of(const std::string& path) {
  std::string name = std::filesystem::path(path).filename().string();
  for (const char* ext : {".sym.json", ".json"}) {
    std::string e(ext);
    if (name.size() > e.size() && name.compare(name.size() - e.size(), e.size(), e) == 0)
      return name.substr(0, name.size() - e.size());
  }
  return name;
}

// --- show -----------------------------------------------------------------

struct ShowArgs {
  std::string in, example, path, out;
  bool hash = false, score = false, flops = false;
};

int cmd_show(const zoo::Workspace& ws, const ShowArgs& a) {
  if (a.in.empty() == a.example.empty())
    throw UsageError("show needs exactly one of --in or --example");
  Value root = a.in.empty() ? zoo::example(ws.types, a.example) : load(ws, a.in);
  if (!a.path.empty()) root = get(root, KeyPath::parse(a.path));
  if (!a.hash && !a.score && !a.flops) {
    emit(a.out, write_document(root));
    return kOk;
  }
  std::string text;
  if (a.hash) text += "hash\t" + hex64(sym_hash(root)) + "\n";
  if (a.flops)
    text += "flops\t" + std::to_string(zoo::estimate_flops(ws.types, root)) + "\n";
  if (a.score) {
    Tree tree(root);
    text += "score\t" + format_float(zoo::evaluate(ws.types, tree)) + "\n";
  }
  emit(a.out, text);
  return kOk;
}

// --- query ----------------------------------------------------------------

struct QueryArgs {
  std::string in, type, keys, path;
  bool subtypes = false;
};

int cmd_query(const zoo::Workspace& ws, const QueryArgs& a) {
  std::optional<NodePredicate> pred;
  auto both = [&pred](NodePredicate p) {
    pred = pred ? NodePredicate::all_of(*pred, std::move(p)) : std::move(p);
  };
  if (!a.type.empty()) both(NodePredicate::by_type(a.type, a.subtypes));
  if (!a.keys.empty()) {
    auto parts = split(a.keys, ',');
    both(NodePredicate::by_key({parts.begin(), parts.end()}));
  }
  if (!a.path.empty()) both(NodePredicate::by_path(a.path));
  if (!pred) throw UsageError("query needs --type, --key or --path");
  Value root = load(ws, a.in);
  for (const auto& m : query(ws.types, root, *pred))
    std::cout << m.path.to_string() << '\t' << m.value->summary() << '\n';
  return kOk;
}

// --- patch ----------------------------------------------------------------

struct PatchArgs {
  std::string in, out;
  std::vector<std::string> uris;
};

int cmd_patch(const zoo::Workspace& ws, const PatchArgs& a) {
  Value root = load(ws, a.in);
  std::vector<Value> bound;
  for (const auto& u : a.uris)
    bound.push_back(parse_patch_uri(ws.types, ws.patchers, u));
  Value out = apply_patch(ws.types, ws.patchers, root, bound);
  emit(a.out, write_document(out));
  if (!a.out.empty() && a.out != "-")
    std::cout << "applied\t" << bound.size() << "\tchanged\t"
              << diff(root, out).size() << '\n';
  return kOk;
}

// --- diff -----------------------------------------------------------------

int cmd_diff(const zoo::Workspace& ws, const std::string& left,
             const std::string& right) {
  Value a = load(ws, left);
  Value b = load(ws, right);
  for (const auto& d : diff(a, b))
    std::cout << d.path.to_string() << '\t'
              << (d.left ? serialize(*d.left) : "-") << '\t'
              << (d.right ? serialize(*d.right) : "-") << '\n';
  return kOk;
}

// --- space / materialize ---------------------------------------------------

int cmd_space(const zoo::Workspace& ws, const std::string& in) {
  Value root = load(ws, in);
  DecisionSpec spec = derive_space(root);
  for (std::size_t k = 0; k < spec.size(); ++k) {
    const auto& p = spec.points[k];
    std::cout << "point\t" << k << '\t' << p.path.to_string() << '\t'
              << describe_dim(p) << '\t';
    if (p.condition)
      std::cout << "when #" << p.condition->parent << '=' << p.condition->candidate;
    else
      std::cout << '-';
    std::cout << '\n';
  }
  auto size = space_size(spec);
  std::cout << "size\t" << (size ? std::to_string(*size) : "infinite") << '\n';
  return kOk;
}

int cmd_materialize(const zoo::Workspace& ws, const std::string& in,
                    const std::string& decisions, const std::string& out) {
  Value root = load(ws, in);
  DecisionSpec spec = derive_space(root);
  Value result = materialize(ws.types, root, parse_decisions(spec, decisions));
  emit(out, write_document(result));
  return kOk;
}

// --- tune -----------------------------------------------------------------

struct TuneArgs {
  std::string in, out, algo = "random", replay;
  std::size_t budget = 10;
  std::uint64_t seed = 0;
  std::size_t parallel = 1;
  std::size_t warmup = EvolutionOptions{}.warmup;
};

double zoo_score(const TypeRegistry& types, const Value& exp) {
  return zoo::train(types, exp).test_accuracy;
}

std::string trial_status(const Trial& t) {
  if (t.measurement) return format_float(*t.measurement);
  if (!t.feasible) return "infeasible";
  return "error\t" + t.error.value_or("");
}

int cmd_replay(const zoo::Workspace& ws, const std::string& path) {
  Study study = study_from_value(load(ws, path));
  std::size_t mismatches = 0;
  for (const Trial& t : study.trials) {
    Trial again;
    again.decisions = t.decisions;
    try {
      Value exp = materialize(ws.types, study.space, t.decisions);
      if (!zoo::within_flops_budget(ws.types, exp))
        again.feasible = false;
      else
        again.measurement = zoo_score(ws.types, exp);
    } catch (const Error& e) {
      again.error = e.kind() + ": " + e.what();
    }
    bool same = again.feasible == t.feasible &&
                again.measurement.has_value() == t.measurement.has_value() &&
                (!t.measurement ||
                 std::bit_cast<std::uint64_t>(*t.measurement) ==
                     std::bit_cast<std::uint64_t>(*again.measurement));
    if (!same) ++mismatches;
    std::cout << "replay\t" << t.id << '\t' << format_decisions(t.decisions) << '\t'
              << trial_status(again) << '\t' << (same ? "match" : "MISMATCH") << '\n';
  }
  std::cout << "replayed\t" << study.trials.size() << "\tmismatches\t" << mismatches
            << '\n';
  return mismatches ? kInvalid : kOk;
}

int cmd_tune(const zoo::Workspace& ws, const TuneArgs& a) {
  if (!a.replay.empty()) return cmd_replay(ws, a.replay);
  if (a.in.empty()) throw UsageError("tune needs --in or --replay");
  Algorithm algo;
  try {
    algo = parse_algorithm(a.algo);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  Value space = load(ws, a.in);
  TuneOptions opts;
  opts.algorithm = algo;
  opts.budget = a.budget;
  opts.seed = a.seed;
  opts.parallel = a.parallel;
  opts.evolution.warmup = a.warmup;
  const TypeRegistry& types = ws.types;
  opts.feasible = [&types](const Value& e) { return zoo::within_flops_budget(types, e); };
  Study study = run_study(
      ws.types, space, [&types](const Value& e) { return zoo_score(types, e); }, opts);
  for (const Trial& t : study.trials)
    std::cout << "trial\t" << t.id << '\t' << format_decisions(t.decisions) << '\t'
              << trial_status(t) << '\n';
  if (const Trial* best = study.best())
    std::cout << "best\t" << best->id << '\t' << format_decisions(best->decisions)
              << '\t' << format_float(*best->measurement) << '\n';
  else
    std::cout << "best\t-\n";
  if (!a.out.empty()) write_file(a.out, write_document(study_to_value(study)));
  return kOk;
}

// --- demo-network-effect ----------------------------------------------------

struct DemoArgs {
  std::vector<std::string> experiments;
  bool examples = false;
  std::vector<std::string> uris;
  std::vector<std::string> groups;
  bool compose_all = false;
  std::string out_dir;
};

int cmd_demo(const zoo::Workspace& ws, const DemoArgs& a) {
  std::vector<NamedExperiment> exps;
  if (a.examples)
    for (const auto& n : zoo::example_names())
      exps.push_back({n, zoo::example(ws.types, n)});
  for (const auto& path : a.experiments) exps.push_back({stem_of(path), load(ws, path)});
  if (exps.empty()) throw UsageError("demo-network-effect needs --experiments or --examples");
  NetworkEffectOptions opts;
  opts.uris = a.uris;
  for (const auto& g : a.groups) opts.groups.push_back(split(g, ';'));
  opts.compose_all = a.compose_all;
  if (opts.compose_all && opts.groups.empty())
    throw UsageError("--compose-all needs at least one --group");

  NetworkEffectReport report = run_network_effect(ws.types, ws.patchers, exps, opts);
  if (!a.out_dir.empty()) {
    std::filesystem::create_directories(a.out_dir);
    auto write_all = [&](const std::vector<VariantRecord>& recs, const char* tag) {
      std::size_t i = 0;
      for (const auto& r : recs) {
        ++i;
        if (!r.result) continue;
        std::string name = r.experiment + "." + tag + std::to_string(i) + ".sym.json";
        write_file((std::filesystem::path(a.out_dir) / name).string(),
                   write_document(*r.result));
      }
    };
    write_all(report.records, "variant");
    write_all(report.composed_records, "composed");
  }
  std::cout << format_report(report);
  return report.failures ? kInvalid : kOk;
}

int exit_code_for(const Error& e) {
  const std::string& k = e.kind();
  if (k == "IoError" || k == "SyntaxError") return kIo;
  return kInvalid;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"symml: symbolic ML experiment trees"};
  app.require_subcommand(1);
  std::function<int(const zoo::Workspace&)> action;

  ShowArgs show;
  auto* s = app.add_subcommand("show", "Print a tree (canonical document) or facts about it");
  s->add_option("--in", show.in, "input .sym.json");
  s->add_option("--example", show.example, "bundled example name");
  s->add_option("--path", show.path, "subtree to show");
  s->add_option("--out", show.out, "output file (default stdout)");
  s->add_flag("--hash", show.hash, "print the structural hash");
  s->add_flag("--score", show.score, "train and print held-out accuracy");
  s->add_flag("--flops", show.flops, "print the flops estimate");
  s->callback([&] { action = [&](const zoo::Workspace& ws) { return cmd_show(ws, show); }; });

  QueryArgs q;
  auto* qc = app.add_subcommand("query", "List matching nodes as path<TAB>summary");
  qc->add_option("--in", q.in, "input .sym.json")->required();
  qc->add_option("--type", q.type, "object type name");
  qc->add_flag("--subtypes", q.subtypes, "also match subtypes of --type");
  qc->add_option("--key", q.keys, "comma-separated field names");
  qc->add_option("--path", q.path, "exact key path or **.suffix");
  qc->callback([&] { action = [&](const zoo::Workspace& ws) { return cmd_query(ws, q); }; });

  PatchArgs p;
  auto* pc = app.add_subcommand("patch", "Apply patch URIs left to right");
  pc->add_option("--apply", p.uris, "patch URI (repeatable)")->required();
  pc->add_option("--in", p.in, "input .sym.json")->required();
  pc->add_option("--out", p.out, "output .sym.json (default stdout)");
  pc->callback([&] { action = [&](const zoo::Workspace& ws) { return cmd_patch(ws, p); }; });

  std::string diff_left, diff_right;
  auto* dc = app.add_subcommand("diff", "Structural difference as path<TAB>left<TAB>right");
  dc->add_option("left", diff_left, "first file")->required();
  dc->add_option("right", diff_right, "second file")->required();
  dc->callback([&] {
    action = [&](const zoo::Workspace& ws) { return cmd_diff(ws, diff_left, diff_right); };
  });

  std::string space_in;
  auto* sc = app.add_subcommand("space", "List decision points and the space size");
  sc->add_option("--in", space_in, "input .sym.json")->required();
  sc->callback([&] { action = [&](const zoo::Workspace& ws) { return cmd_space(ws, space_in); }; });

  std::string mat_in, mat_decisions, mat_out;
  auto* mc = app.add_subcommand("materialize", "Substitute a decision vector");
  mc->add_option("--in", mat_in, "search space .sym.json")->required();
  mc->add_option("--decisions", mat_decisions, "comma-separated decisions")->required();
  mc->add_option("--out", mat_out, "output .sym.json (default stdout)");
  mc->callback([&] {
    action = [&](const zoo::Workspace& ws) {
      return cmd_materialize(ws, mat_in, mat_decisions, mat_out);
    };
  });

  TuneArgs t;
  auto* tc = app.add_subcommand("tune", "Search a space with the zoo evaluator");
  tc->add_option("--in", t.in, "search space .sym.json");
  tc->add_option("--algo", t.algo, "random, evolution or grid");
  tc->add_option("--budget", t.budget, "maximum number of trials");
  tc->add_option("--seed", t.seed, "random seed");
  tc->add_option("--out", t.out, "study file to write");
  tc->add_option("--parallel", t.parallel, "evaluations in flight");
  tc->add_option("--warmup", t.warmup, "random trials before evolution exploits");
  tc->add_option("--replay", t.replay, "re-evaluate a study file and compare");
  tc->callback([&] { action = [&](const zoo::Workspace& ws) { return cmd_tune(ws, t); }; });

  DemoArgs d;
  auto* nc = app.add_subcommand("demo-network-effect",
                                "Apply m patches to n experiments and print the ledger");
  nc->add_option("--experiments", d.experiments, "experiment files");
  nc->add_flag("--examples", d.examples, "include every bundled example");
  nc->add_option("--apply", d.uris, "patch URI (repeatable)");
  nc->add_option("--group", d.groups, "mutually exclusive URIs separated by ';' (repeatable)");
  nc->add_flag("--compose-all", d.compose_all, "compose one patch from every group");
  nc->add_option("--out-dir", d.out_dir, "directory for the produced variants");
  nc->callback([&] { action = [&](const zoo::Workspace& ws) { return cmd_demo(ws, d); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    zoo::Workspace ws = zoo::make_workspace();
    return action(ws);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const KeyPathSyntaxError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.kind() << ": " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const std::out_of_range& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInvalid;
  }
}
