#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "symml/keypath.hpp"
#include "symml/schema.hpp"
#include "symml/value.hpp"

namespace symml {

struct ChoiceDim {
  std::size_t arity = 0;
};
struct FloatDim {
  double min = 0.0;
  double max = 1.0;
};
struct IntDim {
  std::int64_t min = 0;
  std::int64_t max = 0;
};

// A decision point that only matters when choice `parent` picked `candidate`.
struct Condition {
  std::size_t parent = 0;
  std::size_t candidate = 0;
};

struct DecisionPoint {
  // Placeholders inside a OneOf candidate are addressed through the
  // candidate index, e.g. `model.layers[0][1].filters`.
  KeyPath path;
  std::variant<ChoiceDim, FloatDim, IntDim> dim;
  std::optional<Condition> condition;
};

struct DecisionSpec {
  std::vector<DecisionPoint> points;

  std::size_t size() const noexcept { return points.size(); }
  bool empty() const noexcept { return points.empty(); }
};

struct Choice {
  std::size_t index = 0;
  friend bool operator==(const Choice&, const Choice&) = default;
  friend auto operator<=>(const Choice&, const Choice&) = default;
};

using Decision = std::variant<Choice, double, std::int64_t>;
using DecisionVector = std::vector<Decision>;

// Every placeholder in depth-first pre-order; points nested in a OneOf
// candidate follow their choice and carry its condition.
DecisionSpec derive_space(const Value& root);

// Throws SpecMismatch unless `decisions` has the spec's length, kinds and
// ranges (inactive conditional points included).
void check_decisions(const DecisionSpec& spec, const DecisionVector& decisions);

bool is_active(const DecisionSpec& spec, const DecisionVector& decisions,
               std::size_t point);

// Resets inactive conditional points to their lowest value so equivalent
// vectors compare equal.
DecisionVector normalize(const DecisionSpec& spec, DecisionVector decisions);

// Replaces every placeholder by its decided value; the result is canonical,
// validated and placeholder-free. Throws SpecMismatch, ValidationError.
Value materialize(const TypeRegistry& registry, const Value& root,
                  const DecisionVector& decisions);

// Number of distinct experiments; nullopt when unbounded (a continuous
// dimension, or a count beyond 64 bits).
std::optional<std::uint64_t> space_size(const DecisionSpec& spec);

// Lexicographic walk over a finite space; inactive points stay at their
// lowest value, so each distinct experiment is produced exactly once.
class SpaceEnumerator {
 public:
  // Throws InfiniteSpace.
  explicit SpaceEnumerator(DecisionSpec spec);
  std::optional<DecisionVector> next();

 private:
  bool advance(std::size_t point);
  DecisionSpec spec_;
  DecisionVector current_;
  bool started_ = false;
  bool done_ = false;
};

std::vector<DecisionVector> enumerate_space(const DecisionSpec& spec);

// Lowest value of every point.
DecisionVector lowest_decisions(const DecisionSpec& spec);

// Flat list encoding: choices and ints as Int, floats as Float.
Value decisions_to_value(const DecisionVector& decisions);
// Throws SpecMismatch.
DecisionVector decisions_from_value(const DecisionSpec& spec, const Value& v);

// Comma-separated text form used by the CLI ("0,2,0.5").
std::string format_decisions(const DecisionVector& decisions);
DecisionVector parse_decisions(const DecisionSpec& spec, std::string_view text);

std::string describe_dim(const DecisionPoint& point);

}  // namespace symml
