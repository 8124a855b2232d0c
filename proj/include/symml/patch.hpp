#pragma once

#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "symml/keypath.hpp"
#include "symml/query.hpp"
#include "symml/schema.hpp"
#include "symml/symtree.hpp"
#include "symml/value.hpp"

namespace symml {

// Marks a list element or dict entry for removal.
struct Delete {
  friend bool operator==(const Delete&, const Delete&) = default;
};

using Update = std::variant<Value, Delete>;

// Path -> new value. All paths address the tree as it was before the update
// set is applied; no path may be a strict prefix of another.
class UpdateSet {
 public:
  UpdateSet() = default;
  UpdateSet(std::initializer_list<std::pair<KeyPath, Value>> items);

  void set(KeyPath path, Value value);
  void remove(KeyPath path);

  const std::map<KeyPath, Update>& entries() const noexcept {
    return entries_;
  }
  bool empty() const noexcept { return entries_.empty(); }
  std::size_t size() const noexcept { return entries_.size(); }

 private:
  std::map<KeyPath, Update> entries_;
};

// Applies `updates` atomically: in-place replacements first, then appends
// (list index == size, or a new dict key) in ascending order, then deletions
// in descending order. The result is canonicalized and validated.
// Throws PathNotFound, ValidationError, ConflictingUpdates.
Value rebind(const TypeRegistry& registry, const Value& root,
             const UpdateSet& updates);

// Tree form: bumps the generation exactly once and drops cached payload along
// every touched path. The input tree is left as it was.
Tree rebind(const TypeRegistry& registry, const Tree& tree,
            const UpdateSet& updates);

// Reads a diff as edits: entries with a right side become writes, removals
// become deletes. rebind(a, updates_from_diff(diff(a, b))) is sym_eq to b.
UpdateSet updates_from_diff(const std::vector<DiffEntry>& entries);

// ---------------------------------------------------------------------------
// Patchers

// What a patcher body sees: the registry, its own bound parameter object and
// the tree it is being applied to.
struct PatchContext {
  const TypeRegistry& types;
  const Value& params;
  const Value& target;

  const Value& param(std::string_view name) const;
};

using UpdateBody = std::function<UpdateSet(const PatchContext&)>;
using TransformBody = std::function<TransformFn(const PatchContext&)>;

struct PatcherDef {
  std::string name;
  std::vector<FieldSpec> params;
  std::string doc;
  std::variant<UpdateBody, TransformBody> body;
};

// Named, parameterized rewrite rules. Each registered patcher also gets a
// schema `patcher.<name>` (subtype of `Patcher`) in the type registry, so a
// patcher bound to its arguments is an ordinary symbolic object.
class PatcherRegistry {
 public:
  static constexpr std::string_view kBaseType = "Patcher";
  static std::string type_name_for(std::string_view patcher_name);

  // Throws SchemaError, DuplicateType.
  void add(TypeRegistry& types, PatcherDef def);

  bool contains(std::string_view name) const;
  // Throws UnknownPatcher.
  const PatcherDef& find(std::string_view name) const;
  std::vector<std::string> names() const;

  // Throws UnknownPatcher, ValidationError.
  Value bind(const TypeRegistry& types, std::string_view name,
             FieldMap args = {}) const;
  // Name of the patcher a bound object refers to. Throws UnknownPatcher.
  const PatcherDef& definition_of(const Value& bound) const;

 private:
  std::map<std::string, PatcherDef, std::less<>> defs_;
};

// Sequential left-to-right composition, atomic per patcher. Failures surface
// as PatcherError naming the failing patcher and its index.
Value apply_patch(const TypeRegistry& types, const PatcherRegistry& patchers,
                  const Value& root, const std::vector<Value>& bound);

Tree apply_patch(const TypeRegistry& types, const PatcherRegistry& patchers,
                 const Tree& tree, const std::vector<Value>& bound);

// ---------------------------------------------------------------------------
// Patch URIs
//
//   uri  := name ('?' pair ('&' pair)*)?
//   pair := key '=' value
//   name, key := [A-Za-z_][A-Za-z0-9_]*
//   value := percent-encoded UTF-8; lists are comma separated
//
// Values are kept in their raw (still encoded) form so that list splitting
// happens before decoding.
struct PatchUri {
  std::string name;
  std::vector<std::pair<std::string, std::string>> args;

  // Throws UriSyntaxError.
  static PatchUri parse(std::string_view text);
  std::string to_string() const;
};

// Throws UriSyntaxError on malformed escapes.
std::string percent_decode(std::string_view raw);
std::string percent_encode(std::string_view text);

// Converts one raw argument to a value matching `spec`. With an Any spec the
// attempts are int, float, bool, then string. Throws ValidationError (at
// `at`) when the text cannot be read as the spec's kind.
Value coerce_argument(const ValueSpec& spec, std::string_view raw,
                      const KeyPath& at);

// Throws UriSyntaxError, UnknownPatcher, ValidationError.
Value parse_patch_uri(const TypeRegistry& types,
                      const PatcherRegistry& patchers, std::string_view uri);

// Canonical form: arguments in declaration order, defaults omitted.
std::string to_patch_uri(const TypeRegistry& types,
                         const PatcherRegistry& patchers, const Value& bound);

}  // namespace symml
