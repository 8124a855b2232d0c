#include "symml/value.hpp"

#include <charconv>
#include <cstdlib>
#include <cmath>

namespace symml {

FieldMap::FieldMap(std::initializer_list<Item> items) : items_(items) {}

const Value* FieldMap::find(std::string_view key) const {
  for (const auto& item : items_)
    if (item.first == key) return &item.second;
  return nullptr;
}

Value* FieldMap::find(std::string_view key) {
  for (auto& item : items_)
    if (item.first == key) return &item.second;
  return nullptr;
}

void FieldMap::set(std::string key, Value value) {
  if (Value* slot = find(key)) {
    *slot = std::move(value);
    return;
  }
  items_.emplace_back(std::move(key), std::move(value));
}

bool FieldMap::erase(std::string_view key) {
  for (auto it = items_.begin(); it != items_.end(); ++it) {
    if (it->first == key) {
      items_.erase(it);
      return true;
    }
  }
  return false;
}

std::string_view kind_name(ValueKind kind) noexcept {
  switch (kind) {
    case ValueKind::Int: return "int";
    case ValueKind::Float: return "float";
    case ValueKind::Bool: return "bool";
    case ValueKind::Str: return "str";
    case ValueKind::List: return "list";
    case ValueKind::Dict: return "dict";
    case ValueKind::Object: return "object";
    case ValueKind::OneOf: return "pg.OneOf";
    case ValueKind::FloatRange: return "pg.FloatRange";
    case ValueKind::IntRange: return "pg.IntRange";
  }
  return "?";
}

const Value* Value::child(const Segment& seg) const {
  return const_cast<Value*>(this)->child(seg);
}

Value* Value::child(const Segment& seg) {
  if (const auto* name = std::get_if<std::string>(&seg)) {
    if (auto* o = get_if<Object>()) return o->fields.find(*name);
    if (auto* d = get_if<Dict>()) return d->entries.find(*name);
    return nullptr;
  }
  std::size_t i = std::get<std::size_t>(seg);
  if (auto* l = get_if<List>()) return i < l->size() ? &(*l)[i] : nullptr;
  if (auto* c = get_if<OneOf>())
    return i < c->candidates.size() ? &c->candidates[i] : nullptr;
  return nullptr;
}

std::string format_float(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  // Shortest round-trip digits; fixed notation for decimal exponents in
  // [-4, 16), scientific outside, so 100000.0 stays readable.
  char buf[400];
  auto sci = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::scientific);
  std::string_view s(buf, static_cast<std::size_t>(sci.ptr - buf));
  *sci.ptr = '\0';
  int exponent = std::atoi(s.data() + s.find('e') + 1);
  std::string out;
  if (exponent >= -4 && exponent < 16) {
    auto fixed = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed);
    out.assign(buf, fixed.ptr);
  } else {
    out.assign(s);
  }
  if (out.find_first_of(".eE") == std::string::npos) out += ".0";
  return out;
}

std::string Value::summary() const {
  switch (kind()) {
    case ValueKind::Int: return std::to_string(as_int());
    case ValueKind::Float: return format_float(as_float());
    case ValueKind::Bool: return as_bool() ? "true" : "false";
    case ValueKind::Str: return "\"" + as_str() + "\"";
    case ValueKind::List:
      return "list[" + std::to_string(as_list().size()) + "]";
    case ValueKind::Dict:
      return "dict{" + std::to_string(as_dict().entries.size()) + "}";
    case ValueKind::Object: {
      const Object& o = as_object();
      std::string out = o.type + "(";
      bool first = true;
      for (const auto& [k, v] : o.fields) {
        if (!first) out += ", ";
        first = false;
        out += k;
        out += '=';
        out += v.is_object() ? v.as_object().type : v.summary();
      }
      return out + ")";
    }
    case ValueKind::OneOf:
      return "pg.OneOf[" + std::to_string(as_one_of().candidates.size()) + "]";
    case ValueKind::FloatRange:
      return "pg.FloatRange[" + format_float(as_float_range().min) + "," +
             format_float(as_float_range().max) + "]";
    case ValueKind::IntRange:
      return "pg.IntRange[" + std::to_string(as_int_range().min) + "," +
             std::to_string(as_int_range().max) + "]";
  }
  return "?";
}

Value make_object(std::string type, FieldMap fields) {
  return Value(Object{std::move(type), std::move(fields)});
}

Value make_dict(FieldMap entries) { return Value(Dict{std::move(entries)}); }

Value make_list(List items) { return Value(std::move(items)); }

}  // namespace symml
