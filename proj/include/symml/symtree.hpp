#pragma once

#include <any>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "symml/keypath.hpp"
#include "symml/schema.hpp"
#include "symml/value.hpp"

namespace symml {

// Builds an object of a registered type: defaults filled, fields in schema
// order, fully validated. Throws UnknownType, ValidationError.
Value instantiate(const TypeRegistry& registry, const std::string& type_name,
                  FieldMap field_values = {});

// Throws PathNotFound.
const Value& get(const Value& root, const KeyPath& path);
const Value* find(const Value& root, const KeyPath& path) noexcept;

inline Value clone(const Value& root) { return root; }

// Structural identity: same variant, same type, same field/key sets compared
// without regard to order, lists element-wise, floats bit-exact.
bool sym_eq(const Value& a, const Value& b);

// Stable 64-bit digest consistent with sym_eq.
std::uint64_t sym_hash(const Value& v);

struct DiffEntry {
  KeyPath path;
  std::optional<Value> left;   // absent: added in b
  std::optional<Value> right;  // absent: removed in b
};

// Index-aligned structural difference, depth-first. Subtrees whose variant or
// object type differs are reported whole at the highest differing path.
std::vector<DiffEntry> diff(const Value& a, const Value& b);

// Evaluation artifacts kept beside a tree. Any mutation bumps the generation
// and drops the payload along the mutated path's ancestry and subtree.
class CachedState {
 public:
  std::uint64_t generation() const noexcept { return generation_; }
  void bump() noexcept { ++generation_; }

  void put(const KeyPath& path, std::any payload);
  const std::any* find(const KeyPath& path) const;
  bool contains(const KeyPath& path) const { return find(path) != nullptr; }
  std::size_t size() const noexcept { return payload_.size(); }

  // Drops entries at `path`, above it and below it. Siblings survive.
  void invalidate(const KeyPath& path);
  void clear() noexcept { payload_.clear(); }

 private:
  std::uint64_t generation_ = 0;
  std::map<KeyPath, std::any> payload_;
};

// A symbolic tree paired with its cached state. The tree is single-owner;
// read-only operations on `root()` may run concurrently.
class Tree {
 public:
  Tree() = default;
  explicit Tree(Value root) : root_(std::move(root)) {}
  Tree(Value root, CachedState state)
      : root_(std::move(root)), state_(std::move(state)) {}

  const Value& root() const noexcept { return root_; }
  CachedState& state() noexcept { return state_; }
  const CachedState& state() const noexcept { return state_; }

  // Deep copy with fresh state (generation 0, empty payload).
  Tree clone() const { return Tree(root_); }

 private:
  Value root_;
  CachedState state_;
};

}  // namespace symml
