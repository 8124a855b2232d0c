#include "symml/schema.hpp"

#include <cmath>
#include <sstream>

#include "symml/error.hpp"

namespace symml {

std::string_view spec_kind_name(SpecKind kind) noexcept {
  switch (kind) {
    case SpecKind::Int: return "Int";
    case SpecKind::Float: return "Float";
    case SpecKind::Bool: return "Bool";
    case SpecKind::Str: return "Str";
    case SpecKind::Enum: return "Enum";
    case SpecKind::List: return "List";
    case SpecKind::Object: return "Object";
    case SpecKind::Any: return "Any";
  }
  return "?";
}

ValueSpec ValueSpec::Int(std::optional<double> lo, std::optional<double> hi) {
  ValueSpec s;
  s.kind = SpecKind::Int;
  s.min = lo;
  s.max = hi;
  return s;
}

ValueSpec ValueSpec::Float(std::optional<double> lo, std::optional<double> hi) {
  ValueSpec s;
  s.kind = SpecKind::Float;
  s.min = lo;
  s.max = hi;
  return s;
}

ValueSpec ValueSpec::Bool() {
  ValueSpec s;
  s.kind = SpecKind::Bool;
  return s;
}

ValueSpec ValueSpec::Str() {
  ValueSpec s;
  s.kind = SpecKind::Str;
  return s;
}

ValueSpec ValueSpec::Enum(std::vector<std::string> allowed) {
  ValueSpec s;
  s.kind = SpecKind::Enum;
  s.candidates = std::move(allowed);
  return s;
}

ValueSpec ValueSpec::ListOf(ValueSpec element) {
  ValueSpec s;
  s.kind = SpecKind::List;
  s.element = std::make_shared<const ValueSpec>(std::move(element));
  return s;
}

ValueSpec ValueSpec::ObjectOf(std::string type_name) {
  ValueSpec s;
  s.kind = SpecKind::Object;
  s.type_name = std::move(type_name);
  return s;
}

ValueSpec ValueSpec::AnyValue() { return ValueSpec{}; }

ValueSpec ValueSpec::with_default(Value v) const {
  ValueSpec s = *this;
  s.default_value = std::move(v);
  return s;
}

namespace {

// Int specs print their bounds and offending values as integers.
std::string number_text(SpecKind kind, double x) {
  if (kind == SpecKind::Int && std::trunc(x) == x && std::fabs(x) < 9.2e18)
    return std::to_string(static_cast<std::int64_t>(x));
  return format_float(x);
}

}  // namespace

std::string ValueSpec::describe() const {
  std::ostringstream os;
  os << spec_kind_name(kind);
  switch (kind) {
    case SpecKind::Int:
    case SpecKind::Float:
      if (min || max) {
        os << '[' << (min ? number_text(kind, *min) : "-inf") << ','
           << (max ? number_text(kind, *max) : "inf") << ']';
      }
      break;
    case SpecKind::Enum: {
      os << '(';
      for (std::size_t i = 0; i < candidates.size(); ++i)
        os << (i ? "|" : "") << candidates[i];
      os << ')';
      break;
    }
    case SpecKind::List:
      os << '<' << (element ? element->describe() : "?") << '>';
      break;
    case SpecKind::Object:
      os << '(' << type_name << ')';
      break;
    default:
      break;
  }
  return os.str();
}

FieldSpec required_field(std::string name, ValueSpec spec, std::string doc) {
  return FieldSpec{std::move(name), std::move(spec), std::move(doc), true};
}

FieldSpec optional_field(std::string name, ValueSpec spec, Value default_value,
                         std::string doc) {
  spec.default_value = std::move(default_value);
  return FieldSpec{std::move(name), std::move(spec), std::move(doc), false};
}

// ---------------------------------------------------------------------------
// Registry

namespace {

void check_spec_shape(const TypeRegistry& registry, const ValueSpec& spec,
                      const std::string& self, const std::string& where) {
  if (spec.min && spec.max && *spec.min > *spec.max)
    throw SchemaError(where + ": min > max");
  if ((spec.min && !std::isfinite(*spec.min)) ||
      (spec.max && !std::isfinite(*spec.max)))
    throw SchemaError(where + ": bounds must be finite");
  if ((spec.min || spec.max) && spec.kind != SpecKind::Int &&
      spec.kind != SpecKind::Float)
    throw SchemaError(where + ": bounds only apply to Int and Float");
  switch (spec.kind) {
    case SpecKind::Enum:
      if (spec.candidates.empty())
        throw SchemaError(where + ": Enum needs at least one candidate");
      break;
    case SpecKind::List:
      if (!spec.element) throw SchemaError(where + ": List needs an element");
      check_spec_shape(registry, *spec.element, self, where + "[]");
      break;
    case SpecKind::Object:
      if (spec.type_name != self && !registry.contains(spec.type_name))
        throw SchemaError(where + ": Object references unregistered type " +
                          spec.type_name);
      break;
    default:
      break;
  }
}

}  // namespace

void TypeRegistry::register_type(TypeSchema schema) {
  const std::string name = schema.type_name;
  if (name.empty()) throw SchemaError("type name must be non-empty");
  if (entries_.count(name)) throw DuplicateType(name);
  if (schema.parent && !entries_.count(*schema.parent))
    throw UnknownParent(*schema.parent);

  std::set<std::string> own;
  for (const FieldSpec& f : schema.fields) {
    const std::string where = name + "." + f.name;
    if (!is_identifier(f.name))
      throw SchemaError("invalid field name '" + f.name + "' in " + name);
    if (f.name == "_type")
      throw SchemaError("field name _type is reserved (in " + name + ")");
    if (!own.insert(f.name).second)
      throw SchemaError("duplicate field " + where);
    if (!f.required && !f.spec.default_value)
      throw SchemaError(where + ": optional field needs a default");
    check_spec_shape(*this, f.spec, name, where);
  }

  std::vector<FieldSpec> effective;
  if (schema.parent) effective = entries_.at(*schema.parent).effective;
  for (const FieldSpec& f : schema.fields) {
    bool replaced = false;
    for (FieldSpec& inherited : effective) {
      if (inherited.name == f.name) {
        inherited = f;
        replaced = true;
        break;
      }
    }
    if (!replaced) effective.push_back(f);
  }

  auto [it, inserted] =
      entries_.emplace(name, Entry{std::move(schema), std::move(effective)});
  order_.push_back(name);

  // Defaults may reference the type itself, so they are checked after the
  // tentative insert and rolled back on failure.
  try {
    for (auto* list : {&it->second.effective, &it->second.schema.fields}) {
      for (FieldSpec& f : *list) {
        if (!f.spec.default_value) continue;
        Value canon = canonicalize(*this, *f.spec.default_value);
        validate(*this, f.spec, canon, KeyPath().child(f.name));
        f.spec.default_value = std::move(canon);
      }
    }
  } catch (const Error& e) {
    entries_.erase(it);
    order_.pop_back();
    throw SchemaError("invalid default in " + name + ": " + e.what());
  }
}

bool TypeRegistry::contains(std::string_view type_name) const {
  return entries_.find(type_name) != entries_.end();
}

const TypeSchema& TypeRegistry::schema(std::string_view type_name) const {
  auto it = entries_.find(type_name);
  if (it == entries_.end()) throw UnknownType({std::string(type_name)});
  return it->second.schema;
}

const std::vector<FieldSpec>& TypeRegistry::effective_fields(
    std::string_view type_name) const {
  auto it = entries_.find(type_name);
  if (it == entries_.end()) throw UnknownType({std::string(type_name)});
  return it->second.effective;
}

const FieldSpec* TypeRegistry::find_field(std::string_view type_name,
                                          std::string_view field) const {
  for (const FieldSpec& f : effective_fields(type_name))
    if (f.name == field) return &f;
  return nullptr;
}

bool TypeRegistry::is_subtype(std::string_view child,
                              std::string_view ancestor) const {
  if (!contains(ancestor)) throw UnknownType({std::string(ancestor)});
  const TypeSchema* s = &schema(child);
  while (true) {
    if (s->type_name == ancestor) return true;
    if (!s->parent) return false;
    s = &schema(*s->parent);
  }
}

std::vector<std::string> TypeRegistry::subtypes_of(
    std::string_view ancestor) const {
  std::vector<std::string> out;
  for (const std::string& name : order_)
    if (is_subtype(name, ancestor)) out.push_back(name);
  return out;
}

bool TypeRegistry::has_tag(std::string_view type_name,
                           std::string_view tag) const {
  const TypeSchema* s = &schema(type_name);
  while (true) {
    if (s->tags.count(std::string(tag))) return true;
    if (!s->parent) return false;
    s = &schema(*s->parent);
  }
}

void TypeRegistry::register_derived(std::string type_name,
                                    std::string attribute,
                                    DerivedAttribute fn) {
  if (!contains(type_name)) throw UnknownType({type_name});
  derived_[{std::move(type_name), std::move(attribute)}] = std::move(fn);
}

Value TypeRegistry::derived(const Value& object,
                            std::string_view attribute) const {
  if (!object.is_object())
    throw UnknownAttribute(std::string(kind_name(object.kind())),
                           std::string(attribute));
  const std::string& type = object.as_object().type;
  const TypeSchema* s = &schema(type);
  while (true) {
    auto it = derived_.find({s->type_name, std::string(attribute)});
    if (it != derived_.end()) return it->second(object, *this);
    if (!s->parent) break;
    s = &schema(*s->parent);
  }
  throw UnknownAttribute(type, std::string(attribute));
}

// ---------------------------------------------------------------------------
// Validation

namespace {

class Validator {
 public:
  explicit Validator(const TypeRegistry& registry) : registry_(registry) {}

  void check(const ValueSpec& spec, const Value& v, const KeyPath& at,
             int placeholder_depth) {
    if (v.is_placeholder()) {
      check_placeholder(spec, v, at, placeholder_depth);
      return;
    }
    switch (spec.kind) {
      case SpecKind::Any:
        check_any(v, at, placeholder_depth);
        return;
      case SpecKind::Int:
        expect(v, ValueKind::Int, spec, at);
        check_bounds(spec, static_cast<double>(v.as_int()), at);
        return;
      case SpecKind::Float:
        expect(v, ValueKind::Float, spec, at);
        if (!std::isfinite(v.as_float()))
          throw ValidationError(at, "non-finite float");
        check_bounds(spec, v.as_float(), at);
        return;
      case SpecKind::Bool:
        expect(v, ValueKind::Bool, spec, at);
        return;
      case SpecKind::Str:
        expect(v, ValueKind::Str, spec, at);
        return;
      case SpecKind::Enum: {
        expect(v, ValueKind::Str, spec, at);
        for (const auto& c : spec.candidates)
          if (c == v.as_str()) return;
        throw ValidationError(at, "\"" + v.as_str() + "\" is not one of " +
                                      spec.describe());
      }
      case SpecKind::List: {
        expect(v, ValueKind::List, spec, at);
        const auto& items = v.as_list();
        for (std::size_t i = 0; i < items.size(); ++i)
          check(*spec.element, items[i], at.child(i), placeholder_depth);
        return;
      }
      case SpecKind::Object: {
        expect(v, ValueKind::Object, spec, at);
        const std::string& type = v.as_object().type;
        if (!registry_.contains(type))
          throw ValidationError(at, "unregistered type " + type);
        if (!registry_.is_subtype(type, spec.type_name))
          throw ValidationError(
              at, "type " + type + " is not a " + spec.type_name);
        check_object(v.as_object(), at, placeholder_depth);
        return;
      }
    }
  }

 private:
  void expect(const Value& v, ValueKind kind, const ValueSpec& spec,
              const KeyPath& at) {
    if (v.kind() != kind)
      throw ValidationError(at, "expected " + spec.describe() + ", got " +
                                    std::string(kind_name(v.kind())));
  }

  void check_bounds(const ValueSpec& spec, double x, const KeyPath& at) {
    if ((spec.min && x < *spec.min) || (spec.max && x > *spec.max))
      throw ValidationError(at, number_text(spec.kind, x) + " outside " +
                                    spec.describe());
  }

  void check_any(const Value& v, const KeyPath& at, int depth) {
    switch (v.kind()) {
      case ValueKind::Float:
        if (!std::isfinite(v.as_float()))
          throw ValidationError(at, "non-finite float");
        return;
      case ValueKind::List: {
        const auto& items = v.as_list();
        for (std::size_t i = 0; i < items.size(); ++i)
          check(ValueSpec{}, items[i], at.child(i), depth);
        return;
      }
      case ValueKind::Dict:
        for (const auto& [k, child] : v.as_dict().entries) {
          if (!is_identifier(k) || k == "_type")
            throw ValidationError(at, "invalid dict key '" + k + "'");
          check(ValueSpec{}, child, at.child(k), depth);
        }
        return;
      case ValueKind::Object:
        if (!registry_.contains(v.as_object().type))
          throw ValidationError(at,
                                "unregistered type " + v.as_object().type);
        check_object(v.as_object(), at, depth);
        return;
      default:
        return;
    }
  }

  void check_object(const Object& obj, const KeyPath& at, int depth) {
    const auto& fields = registry_.effective_fields(obj.type);
    for (const FieldSpec& f : fields) {
      const Value* child = obj.fields.find(f.name);
      if (!child)
        throw ValidationError(at.child(f.name),
                              f.required ? "missing required field"
                                         : "missing field (defaults not applied)");
      check(f.spec, *child, at.child(f.name), depth);
    }
    for (const auto& [k, child] : obj.fields) {
      bool known = false;
      for (const FieldSpec& f : fields) known = known || f.name == k;
      if (!known)
        throw ValidationError(at.child(k),
                              "unknown field for type " + obj.type);
    }
  }

  void check_placeholder(const ValueSpec& spec, const Value& v,
                         const KeyPath& at, int depth) {
    if (depth >= 2)
      throw ValidationError(at, "placeholders nest at most one level deep");
    switch (v.kind()) {
      case ValueKind::OneOf: {
        const auto& cands = v.as_one_of().candidates;
        if (cands.empty())
          throw ValidationError(at, "pg.OneOf needs at least one candidate");
        for (std::size_t i = 0; i < cands.size(); ++i)
          check(spec, cands[i], at.child(i), depth + 1);
        return;
      }
      case ValueKind::IntRange: {
        const IntRange& r = v.as_int_range();
        if (spec.kind != SpecKind::Int && spec.kind != SpecKind::Any)
          throw ValidationError(at, "pg.IntRange cannot stand for " +
                                        spec.describe());
        if (r.min > r.max) throw ValidationError(at, "pg.IntRange min > max");
        check_bounds(spec, static_cast<double>(r.min), at);
        check_bounds(spec, static_cast<double>(r.max), at);
        return;
      }
      case ValueKind::FloatRange: {
        const FloatRange& r = v.as_float_range();
        if (spec.kind != SpecKind::Float && spec.kind != SpecKind::Any)
          throw ValidationError(at, "pg.FloatRange cannot stand for " +
                                        spec.describe());
        if (!std::isfinite(r.min) || !std::isfinite(r.max))
          throw ValidationError(at, "pg.FloatRange bounds must be finite");
        if (!(r.min < r.max))
          throw ValidationError(at, "pg.FloatRange needs min < max");
        check_bounds(spec, r.min, at);
        check_bounds(spec, r.max, at);
        return;
      }
      default:
        return;
    }
  }

  const TypeRegistry& registry_;
};

}  // namespace

void validate(const TypeRegistry& registry, const ValueSpec& spec,
              const Value& value, const KeyPath& at) {
  Validator(registry).check(spec, value, at, 0);
}

void validate_tree(const TypeRegistry& registry, const Value& value) {
  validate(registry, ValueSpec{}, value, KeyPath());
}

bool conforms(const TypeRegistry& registry, const ValueSpec& spec,
              const Value& value) {
  try {
    validate(registry, spec, value);
    return true;
  } catch (const ValidationError&) {
    return false;
  }
}

Value canonicalize(const TypeRegistry& registry, Value value) {
  switch (value.kind()) {
    case ValueKind::Object: {
      Object& obj = value.as_object();
      const auto& fields = registry.effective_fields(obj.type);
      FieldMap out;
      for (const FieldSpec& f : fields) {
        if (Value* present = obj.fields.find(f.name)) {
          out.items().emplace_back(f.name,
                                   canonicalize(registry, std::move(*present)));
          obj.fields.erase(f.name);
        } else if (!f.required && f.spec.default_value) {
          out.items().emplace_back(f.name, *f.spec.default_value);
        }
      }
      for (auto& item : obj.fields.items())
        out.items().emplace_back(item.first,
                                 canonicalize(registry, std::move(item.second)));
      obj.fields = std::move(out);
      return value;
    }
    case ValueKind::Dict:
      for (auto& item : value.as_dict().entries.items())
        item.second = canonicalize(registry, std::move(item.second));
      return value;
    case ValueKind::List:
      for (Value& item : value.as_list())
        item = canonicalize(registry, std::move(item));
      return value;
    case ValueKind::OneOf:
      for (Value& item : value.as_one_of().candidates)
        item = canonicalize(registry, std::move(item));
      return value;
    default:
      return value;
  }
}

ValueSpec spec_at(const TypeRegistry& registry, const Value& root,
                  const KeyPath& path) {
  ValueSpec spec;
  const Value* node = &root;
  KeyPath walked;
  for (const Segment& seg : path.segments()) {
    if (!node)
      throw PathNotFound(walked, "no node to descend into");
    ValueSpec next;
    if (node->is_object()) {
      const auto* name = std::get_if<std::string>(&seg);
      if (name) {
        if (const FieldSpec* f = registry.find_field(node->as_object().type,
                                                     *name))
          next = f->spec;
      }
    } else if (node->is_list()) {
      if (spec.kind == SpecKind::List && spec.element) next = *spec.element;
    } else if (node->kind() == ValueKind::OneOf) {
      next = spec;
    }
    spec = std::move(next);
    node = node->child(seg);
    walked = std::holds_alternative<std::string>(seg)
                 ? walked.child(std::get<std::string>(seg))
                 : walked.child(std::get<std::size_t>(seg));
  }
  spec.default_value.reset();
  return spec;
}

}  // namespace symml
