#include "symml/tune.hpp"

#include <stdexcept>
#include <thread>

#include "symml/error.hpp"

namespace symml {

std::string_view algorithm_name(Algorithm a) noexcept {
  switch (a) {
    case Algorithm::Random: return "random";
    case Algorithm::Evolution: return "evolution";
    case Algorithm::Grid: return "grid";
  }
  return "?";
}

Algorithm parse_algorithm(std::string_view name) {
  for (Algorithm a : {Algorithm::Random, Algorithm::Evolution, Algorithm::Grid})
    if (algorithm_name(a) == name) return a;
  throw std::invalid_argument("unknown algorithm '" + std::string(name) + "'");
}

const Trial* Study::best() const {
  const Trial* out = nullptr;
  for (const Trial& t : trials) {
    if (!t.measurement) continue;
    if (!out || *t.measurement > *out->measurement) out = &t;
  }
  return out;
}

namespace {

Decision sample_dim(const DecisionPoint& p, SplitMix64& rng) {
  if (const auto* c = std::get_if<ChoiceDim>(&p.dim))
    return Choice{static_cast<std::size_t>(rng.below(c->arity))};
  if (const auto* f = std::get_if<FloatDim>(&p.dim))
    return rng.uniform(f->min, f->max);
  const auto& r = std::get<IntDim>(p.dim);
  return rng.between(r.min, r.max);
}

}  // namespace

DecisionVector sample_uniform(const DecisionSpec& spec, SplitMix64& rng) {
  DecisionVector v = lowest_decisions(spec);
  for (std::size_t k = 0; k < spec.size(); ++k)
    if (is_active(spec, v, k)) v[k] = sample_dim(spec.points[k], rng);
  return v;
}

namespace {

// Shared dedup bookkeeping: on finite spaces each vector is proposed once.
class DedupProposer : public Proposer {
 public:
  DedupProposer(const DecisionSpec& spec, std::uint64_t seed)
      : spec_(spec), rng_(seed), size_(space_size(spec)) {}

 protected:
  bool exhausted() const { return size_ && visited_.size() >= *size_; }

  bool claim(const DecisionVector& v) {
    return visited_.insert(format_decisions(v)).second;
  }

  DecisionVector random_unvisited() {
    if (exhausted()) throw Exhausted();
    constexpr int kAttempts = 256;
    for (int i = 0; i < kAttempts; ++i) {
      DecisionVector v = sample_uniform(spec_, rng_);
      if (claim(v) || !size_) return v;
    }
    // Nearly exhausted: draw uniformly from what is left.
    std::vector<DecisionVector> rest;
    for (auto& v : enumerate_space(spec_))
      if (!visited_.count(format_decisions(v))) rest.push_back(std::move(v));
    DecisionVector pick = rest[static_cast<std::size_t>(rng_.below(rest.size()))];
    claim(pick);
    return pick;
  }

  DecisionSpec spec_;
  SplitMix64 rng_;
  std::optional<std::uint64_t> size_;
  std::set<std::string> visited_;
};

class RandomProposer final : public DedupProposer {
 public:
  using DedupProposer::DedupProposer;
  DecisionVector propose(const Study&) override { return random_unvisited(); }
};

class EvolutionProposer final : public DedupProposer {
 public:
  EvolutionProposer(const DecisionSpec& spec, std::uint64_t seed,
                    EvolutionOptions options)
      : DedupProposer(spec, seed), options_(options) {}

  DecisionVector propose(const Study& study) override {
    if (exhausted()) throw Exhausted();
    std::size_t completed = 0;
    for (const Trial& t : study.trials) completed += t.measurement ? 1 : 0;
    const double u = rng_.uniform();
    const Trial* best = study.best();
    if (best && completed >= options_.warmup &&
        u < options_.exploit_probability) {
      for (std::size_t r = 0; r < options_.max_retries; ++r) {
        DecisionVector v = best->decisions;
        std::vector<std::size_t> active;
        for (std::size_t k = 0; k < spec_.size(); ++k)
          if (is_active(spec_, v, k)) active.push_back(k);
        if (active.empty()) break;
        std::size_t k = active[static_cast<std::size_t>(rng_.below(active.size()))];
        v[k] = sample_dim(spec_.points[k], rng_);
        v = normalize(spec_, std::move(v));
        if (claim(v)) return v;
      }
    }
    return random_unvisited();
  }

 private:
  EvolutionOptions options_;
};

class GridProposer final : public Proposer {
 public:
  explicit GridProposer(const DecisionSpec& spec) : it_(spec) {}
  DecisionVector propose(const Study&) override {
    auto v = it_.next();
    if (!v) throw Exhausted();
    return std::move(*v);
  }

 private:
  SpaceEnumerator it_;
};

}  // namespace

std::unique_ptr<Proposer> make_proposer(Algorithm algorithm,
                                        const DecisionSpec& spec,
                                        std::uint64_t seed,
                                        EvolutionOptions evolution) {
  switch (algorithm) {
    case Algorithm::Random: return std::make_unique<RandomProposer>(spec, seed);
    case Algorithm::Evolution:
      return std::make_unique<EvolutionProposer>(spec, seed, evolution);
    case Algorithm::Grid: return std::make_unique<GridProposer>(spec);
  }
  throw std::invalid_argument("unknown algorithm");
}

namespace {

void run_trial(const TypeRegistry& types, const Value& space,
               const Evaluator& evaluator, const Feasibility& feasible,
               Trial& trial) {
  try {
    Value experiment = materialize(types, space, trial.decisions);
    if (feasible && !feasible(experiment)) {
      trial.feasible = false;
      return;
    }
    trial.measurement = evaluator(experiment);
  } catch (const Error& e) {
    trial.error = e.kind() + ": " + e.what();
  } catch (const std::exception& e) {
    trial.error = e.what();
  }
}

}  // namespace

Study run_study(const TypeRegistry& types, const Value& space,
                const Evaluator& evaluator, const TuneOptions& options) {
  Study study;
  study.space = space;
  study.spec = derive_space(space);
  study.algorithm = options.algorithm;
  study.seed = options.seed;
  study.budget = options.budget;
  if (options.budget == 0) return study;

  auto proposer = make_proposer(options.algorithm, study.spec, options.seed,
                                options.evolution);
  const std::size_t width = std::max<std::size_t>(1, options.parallel);
  bool exhausted = false;
  while (!exhausted && study.trials.size() < options.budget) {
    const std::size_t batch =
        std::min(width, options.budget - study.trials.size());
    std::vector<Trial> pending;
    for (std::size_t b = 0; b < batch; ++b) {
      try {
        Trial t;
        t.id = study.trials.size() + pending.size();
        t.decisions = proposer->propose(study);
        pending.push_back(std::move(t));
      } catch (const Exhausted&) {
        exhausted = true;
        break;
      }
    }
    if (pending.size() > 1) {
      std::vector<std::thread> workers;
      workers.reserve(pending.size());
      for (Trial& t : pending)
        workers.emplace_back([&, tp = &t] {
          run_trial(types, space, evaluator, options.feasible, *tp);
        });
      for (auto& w : workers) w.join();
    } else {
      for (Trial& t : pending)
        run_trial(types, space, evaluator, options.feasible, t);
    }
    for (Trial& t : pending) study.trials.push_back(std::move(t));
  }
  return study;
}

Value study_to_value(const Study& study) {
  List trials;
  for (const Trial& t : study.trials) {
    FieldMap f;
    f.set("id", Value(static_cast<std::int64_t>(t.id)));
    f.set("decisions", decisions_to_value(t.decisions));
    f.set("feasible", Value(t.feasible));
    if (t.measurement) f.set("measurement", Value(*t.measurement));
    if (t.error) f.set("error", Value(*t.error));
    trials.emplace_back(Dict{std::move(f)});
  }
  FieldMap out;
  out.set("algorithm", Value(std::string(algorithm_name(study.algorithm))));
  out.set("seed", Value(static_cast<std::int64_t>(study.seed)));
  out.set("budget", Value(static_cast<std::int64_t>(study.budget)));
  out.set("space", study.space);
  out.set("trials", Value(std::move(trials)));
  return Value(Dict{std::move(out)});
}

namespace {

const Value& need(const FieldMap& m, std::string_view key) {
  const Value* v = m.find(key);
  if (!v) throw SyntaxError("study: missing '" + std::string(key) + "'");
  return *v;
}

}  // namespace

Study study_from_value(const Value& v) {
  if (!v.is_dict()) throw SyntaxError("study payload must be a dict");
  const FieldMap& m = v.as_dict().entries;
  Study s;
  const Value& algo = need(m, "algorithm");
  if (!algo.is_str()) throw SyntaxError("study: algorithm must be a string");
  try {
    s.algorithm = parse_algorithm(algo.as_str());
  } catch (const std::invalid_argument& e) {
    throw SyntaxError(e.what());
  }
  const Value& seed = need(m, "seed");
  const Value& budget = need(m, "budget");
  if (!seed.is_int() || !budget.is_int() || budget.as_int() < 0)
    throw SyntaxError("study: seed and budget must be integers");
  s.seed = static_cast<std::uint64_t>(seed.as_int());
  s.budget = static_cast<std::size_t>(budget.as_int());
  s.space = need(m, "space");
  s.spec = derive_space(s.space);
  const Value& trials = need(m, "trials");
  if (!trials.is_list()) throw SyntaxError("study: trials must be a list");
  for (const Value& tv : trials.as_list()) {
    if (!tv.is_dict()) throw SyntaxError("study: each trial must be a dict");
    const FieldMap& f = tv.as_dict().entries;
    Trial t;
    const Value& id = need(f, "id");
    const Value& feasible = need(f, "feasible");
    if (!id.is_int() || id.as_int() < 0 || !feasible.is_bool())
      throw SyntaxError("study: malformed trial");
    t.id = static_cast<std::uint64_t>(id.as_int());
    t.feasible = feasible.as_bool();
    t.decisions = decisions_from_value(s.spec, need(f, "decisions"));
    if (const Value* mv = f.find("measurement")) {
      if (!mv->is_float()) throw SyntaxError("study: measurement must be a float");
      t.measurement = mv->as_float();
    }
    if (const Value* ev = f.find("error")) {
      if (!ev->is_str()) throw SyntaxError("study: error must be a string");
      t.error = ev->as_str();
    }
    s.trials.push_back(std::move(t));
  }
  return s;
}

}  // namespace symml
