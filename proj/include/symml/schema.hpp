#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "symml/keypath.hpp"
#include "symml/value.hpp"

namespace symml {

enum class SpecKind { Int, Float, Bool, Str, Enum, List, Object, Any };

std::string_view spec_kind_name(SpecKind kind) noexcept;

// Constraint on one slot of a symbolic tree. Numeric bounds are inclusive.
struct ValueSpec {
  SpecKind kind = SpecKind::Any;
  std::optional<double> min;
  std::optional<double> max;
  std::vector<std::string> candidates;        // Enum
  std::shared_ptr<const ValueSpec> element;   // List
  std::string type_name;                      // Object
  std::optional<Value> default_value;

  static ValueSpec Int(std::optional<double> lo = {},
                       std::optional<double> hi = {});
  static ValueSpec Float(std::optional<double> lo = {},
                         std::optional<double> hi = {});
  static ValueSpec Bool();
  static ValueSpec Str();
  static ValueSpec Enum(std::vector<std::string> allowed);
  static ValueSpec ListOf(ValueSpec element);
  static ValueSpec ObjectOf(std::string type_name);
  static ValueSpec AnyValue();

  ValueSpec with_default(Value v) const;
  std::string describe() const;
};

struct FieldSpec {
  std::string name;
  ValueSpec spec;
  std::string doc;
  bool required = true;
};

// Convenience: required field, or optional field whose default lives on spec.
FieldSpec required_field(std::string name, ValueSpec spec, std::string doc = {});
FieldSpec optional_field(std::string name, ValueSpec spec, Value default_value,
                         std::string doc = {});

struct TypeSchema {
  std::string type_name;
  std::vector<FieldSpec> fields;
  std::optional<std::string> parent;
  std::set<std::string> tags;
};

class TypeRegistry;

// Evaluated attribute attached to a type (e.g. a dataset's class count).
using DerivedAttribute =
    std::function<Value(const Value& object, const TypeRegistry& registry)>;

// Append-only map of type name to schema. Built single-threaded at startup,
// then read-only and safe to share across threads.
class TypeRegistry {
 public:
  // Throws DuplicateType, UnknownParent, SchemaError.
  void register_type(TypeSchema schema);

  bool contains(std::string_view type_name) const;
  // Throws UnknownType.
  const TypeSchema& schema(std::string_view type_name) const;
  // Parent fields first, own fields after; an own field with an inherited
  // name replaces the inherited one in place.
  const std::vector<FieldSpec>& effective_fields(
      std::string_view type_name) const;
  const FieldSpec* find_field(std::string_view type_name,
                              std::string_view field) const;

  // Reflexive. Throws UnknownType.
  bool is_subtype(std::string_view child, std::string_view ancestor) const;
  // Registration order.
  const std::vector<std::string>& type_names() const noexcept {
    return order_;
  }
  std::vector<std::string> subtypes_of(std::string_view ancestor) const;
  bool has_tag(std::string_view type_name, std::string_view tag) const;

  void register_derived(std::string type_name, std::string attribute,
                        DerivedAttribute fn);
  // Resolves along the parent chain. Throws UnknownAttribute.
  Value derived(const Value& object, std::string_view attribute) const;

 private:
  struct Entry {
    TypeSchema schema;
    std::vector<FieldSpec> effective;
  };
  std::map<std::string, Entry, std::less<>> entries_;
  std::vector<std::string> order_;
  std::map<std::pair<std::string, std::string>, DerivedAttribute> derived_;
};

// Throws ValidationError at the first offending node, visiting depth-first
// with object fields in schema order, then unknown fields in stored order.
// `at` is the path reported for `value` itself.
void validate(const TypeRegistry& registry, const ValueSpec& spec,
              const Value& value, const KeyPath& at = {});

// validate against Any: every nested object must match its schema.
void validate_tree(const TypeRegistry& registry, const Value& value);

bool conforms(const TypeRegistry& registry, const ValueSpec& spec,
              const Value& value);

// Fills missing optional fields with defaults and reorders object fields into
// schema order, recursively. Unknown fields are kept (at the end) so that
// validation can report them. Throws UnknownType for unregistered objects.
Value canonicalize(const TypeRegistry& registry, Value value);

// The spec governing the slot at `path` under `root` (Any at the root, the
// field spec under an object, the element spec under a list).
ValueSpec spec_at(const TypeRegistry& registry, const Value& root,
                  const KeyPath& path);

}  // namespace symml
