#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "symml/placehold.hpp"
#include "symml/rng.hpp"
#include "symml/schema.hpp"
#include "symml/value.hpp"

namespace symml {

enum class Algorithm { Random, Evolution, Grid };

std::string_view algorithm_name(Algorithm a) noexcept;
// Throws std::invalid_argument.
Algorithm parse_algorithm(std::string_view name);

struct Trial {
  std::uint64_t id = 0;
  DecisionVector decisions;
  std::optional<double> measurement;  // present iff evaluation completed
  bool feasible = true;
  std::optional<std::string> error;
};

struct Study {
  Value space;
  DecisionSpec spec;
  Algorithm algorithm = Algorithm::Random;
  std::uint64_t seed = 0;
  std::size_t budget = 0;
  std::vector<Trial> trials;

  // Highest measurement, lowest id on ties. Null when nothing completed.
  const Trial* best() const;
};

struct EvolutionOptions {
  std::size_t warmup = 4;
  double exploit_probability = 0.9;
  std::size_t max_retries = 64;
};

// Sequential proposal source. Proposals are deterministic given the seed and
// the feedback received so far.
class Proposer {
 public:
  virtual ~Proposer() = default;
  // Throws Exhausted once a finite space has been fully visited.
  virtual DecisionVector propose(const Study& study) = 0;
};

std::unique_ptr<Proposer> make_proposer(Algorithm algorithm,
                                        const DecisionSpec& spec,
                                        std::uint64_t seed,
                                        EvolutionOptions evolution = {});

// One independent uniform draw per active dimension; inactive conditional
// points are set to their lowest value.
DecisionVector sample_uniform(const DecisionSpec& spec, SplitMix64& rng);

// Higher is better.
using Evaluator = std::function<double(const Value& experiment)>;
using Feasibility = std::function<bool(const Value& experiment)>;

struct TuneOptions {
  Algorithm algorithm = Algorithm::Random;
  std::size_t budget = 0;
  std::uint64_t seed = 0;
  // Evaluations in flight at once; feedback is still applied in id order.
  std::size_t parallel = 1;
  EvolutionOptions evolution;
  Feasibility feasible;  // optional
};

// propose -> materialize -> feasibility -> evaluate -> feedback, until the
// budget is spent or the space is exhausted. Infeasible trials consume
// budget; evaluator failures are recorded on the trial.
Study run_study(const TypeRegistry& types, const Value& space,
                const Evaluator& evaluator, const TuneOptions& options);

// Study file payload: a dict with algorithm, seed, budget, space and trials.
Value study_to_value(const Study& study);
// Throws SyntaxError, SpecMismatch.
Study study_from_value(const Value& v);

}  // namespace symml
