#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "symml/keypath.hpp"

namespace symml {

class Value;

using List = std::vector<Value>;

// Insertion-ordered string-keyed map. Backs both DictV entries and ObjectV
// fields; lookups are linear, which is fine at experiment scale.
class FieldMap {
 public:
  using Item = std::pair<std::string, Value>;

  FieldMap() = default;
  FieldMap(std::initializer_list<Item> items);

  const Value* find(std::string_view key) const;
  Value* find(std::string_view key);
  bool contains(std::string_view key) const { return find(key) != nullptr; }
  // Replaces in place when present, appends otherwise.
  void set(std::string key, Value value);
  bool erase(std::string_view key);

  std::size_t size() const noexcept { return items_.size(); }
  bool empty() const noexcept { return items_.empty(); }
  auto begin() const { return items_.begin(); }
  auto end() const { return items_.end(); }
  auto begin() { return items_.begin(); }
  auto end() { return items_.end(); }
  std::vector<Item>& items() noexcept { return items_; }
  const std::vector<Item>& items() const noexcept { return items_; }

 private:
  std::vector<Item> items_;
};

struct Dict {
  FieldMap entries;
};

// An instance of a registered type.
struct Object {
  std::string type;
  FieldMap fields;
};

// Search-space placeholders.
struct OneOf {
  List candidates;
};

struct FloatRange {
  double min = 0.0;
  double max = 1.0;
};

struct IntRange {
  std::int64_t min = 0;
  std::int64_t max = 0;
};

enum class ValueKind {
  Int,
  Float,
  Bool,
  Str,
  List,
  Dict,
  Object,
  OneOf,
  FloatRange,
  IntRange,
};

std::string_view kind_name(ValueKind kind) noexcept;

// The universal tree node. Value semantics throughout: copying a Value
// deep-copies the subtree, so no two parents can share a child.
class Value {
 public:
  using Storage = std::variant<std::int64_t, double, bool, std::string, List,
                               Dict, Object, OneOf, FloatRange, IntRange>;

  Value() : data_(std::int64_t{0}) {}
  Value(int v) : data_(std::int64_t{v}) {}
  Value(long v) : data_(std::int64_t{v}) {}
  Value(long long v) : data_(std::int64_t{v}) {}
  Value(double v) : data_(v) {}
  Value(bool v) : data_(v) {}
  Value(const char* v) : data_(std::string(v)) {}
  Value(std::string v) : data_(std::move(v)) {}
  Value(std::string_view v) : data_(std::string(v)) {}
  Value(List v) : data_(std::move(v)) {}
  Value(Dict v) : data_(std::move(v)) {}
  Value(Object v) : data_(std::move(v)) {}
  Value(OneOf v) : data_(std::move(v)) {}
  Value(FloatRange v) : data_(v) {}
  Value(IntRange v) : data_(v) {}

  ValueKind kind() const noexcept {
    return static_cast<ValueKind>(data_.index());
  }

  bool is_int() const noexcept { return kind() == ValueKind::Int; }
  bool is_float() const noexcept { return kind() == ValueKind::Float; }
  bool is_bool() const noexcept { return kind() == ValueKind::Bool; }
  bool is_str() const noexcept { return kind() == ValueKind::Str; }
  bool is_list() const noexcept { return kind() == ValueKind::List; }
  bool is_dict() const noexcept { return kind() == ValueKind::Dict; }
  bool is_object() const noexcept { return kind() == ValueKind::Object; }
  bool is_placeholder() const noexcept {
    return kind() == ValueKind::OneOf || kind() == ValueKind::FloatRange ||
           kind() == ValueKind::IntRange;
  }
  bool is_object_of(std::string_view type) const noexcept {
    return is_object() && std::get<Object>(data_).type == type;
  }

  // Checked accessors; throw std::bad_variant_access on kind mismatch.
  std::int64_t as_int() const { return std::get<std::int64_t>(data_); }
  double as_float() const { return std::get<double>(data_); }
  bool as_bool() const { return std::get<bool>(data_); }
  const std::string& as_str() const { return std::get<std::string>(data_); }
  const List& as_list() const { return std::get<List>(data_); }
  List& as_list() { return std::get<List>(data_); }
  const Dict& as_dict() const { return std::get<Dict>(data_); }
  Dict& as_dict() { return std::get<Dict>(data_); }
  const Object& as_object() const { return std::get<Object>(data_); }
  Object& as_object() { return std::get<Object>(data_); }
  const OneOf& as_one_of() const { return std::get<OneOf>(data_); }
  OneOf& as_one_of() { return std::get<OneOf>(data_); }
  const FloatRange& as_float_range() const {
    return std::get<FloatRange>(data_);
  }
  const IntRange& as_int_range() const { return std::get<IntRange>(data_); }

  template <typename T>
  const T* get_if() const noexcept {
    return std::get_if<T>(&data_);
  }
  template <typename T>
  T* get_if() noexcept {
    return std::get_if<T>(&data_);
  }

  const Storage& storage() const noexcept { return data_; }

  // One step down the tree: field of an object, key of a dict, element of a
  // list, or candidate of a OneOf. Null when the step does not exist.
  const Value* child(const Segment& seg) const;
  Value* child(const Segment& seg);

  // Short single-line description used by CLI listings.
  std::string summary() const;

 private:
  Storage data_;
};

// Visits the direct children of `v` in traversal order (schema field order for
// objects, insertion order for dicts, index order for lists and candidates).
template <typename Fn>
void for_each_child(const Value& v, Fn&& fn) {
  switch (v.kind()) {
    case ValueKind::Object:
      for (const auto& [k, child] : v.as_object().fields) fn(Segment(k), child);
      break;
    case ValueKind::Dict:
      for (const auto& [k, child] : v.as_dict().entries) fn(Segment(k), child);
      break;
    case ValueKind::List: {
      const auto& l = v.as_list();
      for (std::size_t i = 0; i < l.size(); ++i) fn(Segment(i), l[i]);
      break;
    }
    case ValueKind::OneOf: {
      const auto& c = v.as_one_of().candidates;
      for (std::size_t i = 0; i < c.size(); ++i) fn(Segment(i), c[i]);
      break;
    }
    default:
      break;
  }
}

// Convenience builder: make_object("Conv", {{"filters", 64}, {"kernel", 3}}).
Value make_object(std::string type, FieldMap fields = {});
Value make_dict(FieldMap entries);
Value make_list(List items);

// Shortest decimal text that parses back to the same double; always carries a
// '.' or exponent so it reads back as a float. NaN/Inf render as "nan"/"inf".
std::string format_float(double v);

}  // namespace symml
