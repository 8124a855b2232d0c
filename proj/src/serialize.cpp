#include "symml/serialize.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "json.hpp"
#include "symml/error.hpp"

namespace symml {
namespace {

using Json = nlohmann::ordered_json;

constexpr std::string_view kOneOf = "pg.OneOf";
constexpr std::string_view kFloatRange = "pg.FloatRange";
constexpr std::string_view kIntRange = "pg.IntRange";

void write_string(std::string& out, std::string_view s) {
  out += '"';
  for (unsigned char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      case '\b': out += "\\b"; break;
      case '\f': out += "\\f"; break;
      default:
        if (c < 0x20) {
          static const char* hex = "0123456789abcdef";
          out += "\\u00";
          out += hex[c >> 4];
          out += hex[c & 0xF];
        } else {
          out += static_cast<char>(c);
        }
    }
  }
  out += '"';
}

class Writer {
 public:
  explicit Writer(int indent) : indent_(indent) {}

  void value(const Value& v, int depth) {
    switch (v.kind()) {
      case ValueKind::Int: out += std::to_string(v.as_int()); return;
      case ValueKind::Float: out += format_float(v.as_float()); return;
      case ValueKind::Bool: out += v.as_bool() ? "true" : "false"; return;
      case ValueKind::Str: write_string(out, v.as_str()); return;
      case ValueKind::List: list(v.as_list(), depth); return;
      case ValueKind::Dict: {
        std::vector<std::pair<std::string_view, const Value*>> items;
        for (const auto& [k, x] : v.as_dict().entries) items.emplace_back(k, &x);
        map(items, depth);
        return;
      }
      case ValueKind::Object: {
        const Object& o = v.as_object();
        Value tag(o.type);
        std::vector<std::pair<std::string_view, const Value*>> items;
        items.emplace_back(kTypeKey, &tag);
        for (const auto& [k, x] : o.fields) items.emplace_back(k, &x);
        map(items, depth);
        return;
      }
      case ValueKind::OneOf: {
        Value tag(kOneOf);
        Value cands(v.as_one_of().candidates);
        map({{kTypeKey, &tag}, {"candidates", &cands}}, depth);
        return;
      }
      case ValueKind::FloatRange: {
        Value tag(kFloatRange), lo(v.as_float_range().min),
            hi(v.as_float_range().max);
        map({{kTypeKey, &tag}, {"min", &lo}, {"max", &hi}}, depth);
        return;
      }
      case ValueKind::IntRange: {
        Value tag(kIntRange), lo(v.as_int_range().min),
            hi(v.as_int_range().max);
        map({{kTypeKey, &tag}, {"min", &lo}, {"max", &hi}}, depth);
        return;
      }
    }
  }

  std::string out;

 private:
  void newline(int depth) {
    if (indent_ < 0) return;
    out += '\n';
    out.append(static_cast<std::size_t>(depth * indent_), ' ');
  }

  void list(const List& items, int depth) {
    if (items.empty()) {
      out += "[]";
      return;
    }
    out += '[';
    for (std::size_t i = 0; i < items.size(); ++i) {
      if (i) out += ',';
      newline(depth + 1);
      value(items[i], depth + 1);
    }
    newline(depth);
    out += ']';
  }

  void map(const std::vector<std::pair<std::string_view, const Value*>>& items,
           int depth) {
    if (items.empty()) {
      out += "{}";
      return;
    }
    out += '{';
    for (std::size_t i = 0; i < items.size(); ++i) {
      if (i) out += ',';
      newline(depth + 1);
      write_string(out, items[i].first);
      out += indent_ < 0 ? ":" : ": ";
      value(*items[i].second, depth + 1);
    }
    newline(depth);
    out += '}';
  }

  int indent_;
};

Value number_from(const Json& j, const std::string& where) {
  if (j.is_number_unsigned()) {
    auto u = j.get<std::uint64_t>();
    if (u > static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max()))
      throw SyntaxError(where + ": integer out of range");
    return Value(static_cast<std::int64_t>(u));
  }
  if (j.is_number_integer()) return Value(j.get<std::int64_t>());
  return Value(j.get<double>());
}

double as_double(const Json& j, const std::string& where) {
  if (!j.is_number()) throw SyntaxError(where + ": expected a number");
  return j.get<double>();
}

std::int64_t as_int64(const Json& j, const std::string& where) {
  if (!j.is_number_integer()) throw SyntaxError(where + ": expected an integer");
  Value v = number_from(j, where);
  return v.as_int();
}

void check_keys(const Json& j, std::initializer_list<std::string_view> keys,
                const std::string& where) {
  for (const auto& [k, _] : j.items()) {
    if (std::find(keys.begin(), keys.end(), k) == keys.end())
      throw SyntaxError(where + ": unexpected key '" + k + "'");
  }
  for (std::string_view k : keys)
    if (!j.contains(std::string(k)))
      throw SyntaxError(where + ": missing key '" + std::string(k) + "'");
}

Value from_json(const Json& j, const KeyPath& at) {
  const std::string where = at.to_string();
  switch (j.type()) {
    case Json::value_t::null:
      throw SyntaxError(where + ": null is not a value");
    case Json::value_t::boolean: return Value(j.get<bool>());
    case Json::value_t::number_integer:
    case Json::value_t::number_unsigned:
    case Json::value_t::number_float: return number_from(j, where);
    case Json::value_t::string: return Value(j.get<std::string>());
    case Json::value_t::array: {
      List items;
      std::size_t i = 0;
      for (const auto& e : j) items.push_back(from_json(e, at.child(i++)));
      return Value(std::move(items));
    }
    case Json::value_t::object: {
      auto tag = j.find(std::string(kTypeKey));
      if (tag == j.end()) {
        FieldMap entries;
        for (const auto& [k, e] : j.items())
          entries.set(k, from_json(e, at.child(k)));
        return Value(Dict{std::move(entries)});
      }
      if (!tag->is_string()) throw SyntaxError(where + ": _type must be a string");
      const std::string type = tag->get<std::string>();
      if (type == kOneOf) {
        check_keys(j, {kTypeKey, "candidates"}, where);
        const Json& c = j["candidates"];
        if (!c.is_array()) throw SyntaxError(where + ": candidates must be a list");
        List cands;
        std::size_t i = 0;
        for (const auto& e : c) cands.push_back(from_json(e, at.child(i++)));
        return Value(OneOf{std::move(cands)});
      }
      if (type == kFloatRange) {
        check_keys(j, {kTypeKey, "min", "max"}, where);
        return Value(FloatRange{as_double(j["min"], where),
                                as_double(j["max"], where)});
      }
      if (type == kIntRange) {
        check_keys(j, {kTypeKey, "min", "max"}, where);
        return Value(
            IntRange{as_int64(j["min"], where), as_int64(j["max"], where)});
      }
      if (type.rfind("pg.", 0) == 0)
        throw SyntaxError(where + ": unknown placeholder " + type);
      FieldMap fields;
      for (const auto& [k, e] : j.items()) {
        if (k == kTypeKey) continue;
        fields.set(k, from_json(e, at.child(k)));
      }
      return Value(Object{type, std::move(fields)});
    }
    default:
      throw SyntaxError(where + ": unsupported JSON value");
  }
}

Json parse_json(std::string_view text) {
  try {
    return Json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::exception& e) {
    throw SyntaxError(std::string("malformed JSON: ") + e.what());
  }
}

void collect_types(const Value& v, std::set<std::string>& out) {
  if (const auto* o = v.get_if<Object>()) out.insert(o->type);
  for_each_child(v, [&](const Segment&, const Value& c) { collect_types(c, out); });
}

bool is_document(const Json& j) {
  if (!j.is_object() || j.size() != 3) return false;
  return j.contains("format_version") && j.contains("requires") &&
         j.contains("payload");
}

}  // namespace

std::string serialize(const Value& value) { return to_json(value, -1); }

std::string to_json(const Value& value, int indent) {
  Writer w(indent);
  w.value(value, 0);
  return std::move(w.out);
}

std::vector<std::string> required_types(const Value& payload) {
  std::set<std::string> names;
  collect_types(payload, names);
  return {names.begin(), names.end()};
}

std::string write_document(const Value& payload) {
  List req;
  for (auto& name : required_types(payload)) req.emplace_back(std::move(name));
  // Written by hand so that the wrapper keys keep their documented order.
  std::string out = "{\n  \"format_version\": ";
  write_string(out, kFormatVersion);
  out += ",\n  \"requires\": ";
  Writer r(2);
  r.value(Value(std::move(req)), 1);
  out += r.out;
  out += ",\n  \"payload\": ";
  Writer p(2);
  p.value(payload, 1);
  out += p.out;
  out += "\n}\n";
  return out;
}

Value decode(std::string_view text) {
  return from_json(parse_json(text), KeyPath());
}

RawDocument parse_document(std::string_view text) {
  Json j = parse_json(text);
  RawDocument doc;
  if (!is_document(j)) {
    doc.payload = from_json(j, KeyPath());
    doc.required = required_types(doc.payload);
    return doc;
  }
  doc.wrapped = true;
  const Json& version = j["format_version"];
  if (!version.is_string() || version.get<std::string>() != kFormatVersion)
    throw SyntaxError("unsupported format_version (expected \"" +
                      std::string(kFormatVersion) + "\")");
  const Json& req = j["requires"];
  if (!req.is_array()) throw SyntaxError("requires must be a list of type names");
  for (const auto& r : req) {
    if (!r.is_string()) throw SyntaxError("requires must be a list of type names");
    doc.required.push_back(r.get<std::string>());
  }
  doc.payload = from_json(j["payload"], KeyPath());
  return doc;
}

Value deserialize(const TypeRegistry& registry, std::string_view text) {
  RawDocument doc = parse_document(text);
  std::set<std::string> needed(doc.required.begin(), doc.required.end());
  for (auto& t : required_types(doc.payload)) needed.insert(t);
  std::vector<std::string> missing;
  for (const auto& t : needed)
    if (!registry.contains(t)) missing.push_back(t);
  if (!missing.empty()) throw UnknownType(missing, doc.required);
  if (doc.wrapped && doc.required != required_types(doc.payload))
    throw SyntaxError("requires manifest does not match the payload's types");
  Value out = canonicalize(registry, std::move(doc.payload));
  validate_tree(registry, out);
  return out;
}

// ---------------------------------------------------------------------------
// Schema bundles

Value spec_to_value(const ValueSpec& spec) {
  FieldMap f;
  f.set("kind", Value(std::string(spec_kind_name(spec.kind))));
  if (spec.min) f.set("min", Value(*spec.min));
  if (spec.max) f.set("max", Value(*spec.max));
  if (spec.kind == SpecKind::Enum) {
    List c;
    for (const auto& s : spec.candidates) c.emplace_back(s);
    f.set("candidates", Value(std::move(c)));
  }
  if (spec.element) f.set("element", spec_to_value(*spec.element));
  if (spec.kind == SpecKind::Object) f.set("type", Value(spec.type_name));
  if (spec.default_value) f.set("default", *spec.default_value);
  return Value(Object{"ValueSpec", std::move(f)});
}

namespace {

const Value& need(const Object& o, std::string_view key) {
  const Value* v = o.fields.find(key);
  if (!v)
    throw SyntaxError(o.type + ": missing '" + std::string(key) + "'");
  return *v;
}

const Object& need_object(const Value& v, std::string_view type) {
  if (!v.is_object_of(type))
    throw SyntaxError("expected a " + std::string(type) + " object");
  return v.as_object();
}

const std::string& need_str(const Value& v, std::string_view what) {
  if (!v.is_str()) throw SyntaxError(std::string(what) + " must be a string");
  return v.as_str();
}

double need_number(const Value& v, std::string_view what) {
  if (v.is_int()) return static_cast<double>(v.as_int());
  if (v.is_float()) return v.as_float();
  throw SyntaxError(std::string(what) + " must be a number");
}

}  // namespace

ValueSpec spec_from_value(const Value& v) {
  const Object& o = need_object(v, "ValueSpec");
  const std::string& kind = need_str(need(o, "kind"), "ValueSpec.kind");
  ValueSpec s;
  bool found = false;
  for (SpecKind k : {SpecKind::Int, SpecKind::Float, SpecKind::Bool,
                     SpecKind::Str, SpecKind::Enum, SpecKind::List,
                     SpecKind::Object, SpecKind::Any}) {
    if (spec_kind_name(k) == kind) {
      s.kind = k;
      found = true;
    }
  }
  if (!found) throw SyntaxError("unknown ValueSpec kind " + kind);
  for (const auto& [key, x] : o.fields) {
    if (key == "kind") continue;
    if (key == "min") {
      s.min = need_number(x, "ValueSpec.min");
    } else if (key == "max") {
      s.max = need_number(x, "ValueSpec.max");
    } else if (key == "candidates") {
      if (!x.is_list()) throw SyntaxError("ValueSpec.candidates must be a list");
      for (const auto& c : x.as_list())
        s.candidates.push_back(need_str(c, "enum candidate"));
    } else if (key == "element") {
      s.element = std::make_shared<const ValueSpec>(spec_from_value(x));
    } else if (key == "type") {
      s.type_name = need_str(x, "ValueSpec.type");
    } else if (key == "default") {
      s.default_value = x;
    } else {
      throw SyntaxError("ValueSpec: unexpected key '" + key + "'");
    }
  }
  return s;
}

Value schema_to_value(const TypeSchema& schema) {
  FieldMap f;
  f.set("type_name", Value(schema.type_name));
  if (schema.parent) f.set("parent", Value(*schema.parent));
  List tags;
  for (const auto& t : schema.tags) tags.emplace_back(t);
  f.set("tags", Value(std::move(tags)));
  List fields;
  for (const auto& fs : schema.fields) {
    FieldMap m;
    m.set("name", Value(fs.name));
    m.set("spec", spec_to_value(fs.spec));
    m.set("required", Value(fs.required));
    if (!fs.doc.empty()) m.set("doc", Value(fs.doc));
    fields.emplace_back(Object{"FieldSpec", std::move(m)});
  }
  f.set("fields", Value(std::move(fields)));
  return Value(Object{"TypeSchema", std::move(f)});
}

TypeSchema schema_from_value(const Value& v) {
  const Object& o = need_object(v, "TypeSchema");
  TypeSchema s;
  s.type_name = need_str(need(o, "type_name"), "TypeSchema.type_name");
  for (const auto& [key, x] : o.fields) {
    if (key == "type_name") continue;
    if (key == "parent") {
      s.parent = need_str(x, "TypeSchema.parent");
    } else if (key == "tags") {
      if (!x.is_list()) throw SyntaxError("TypeSchema.tags must be a list");
      for (const auto& t : x.as_list()) s.tags.insert(need_str(t, "tag"));
    } else if (key == "fields") {
      if (!x.is_list()) throw SyntaxError("TypeSchema.fields must be a list");
      for (const auto& fv : x.as_list()) {
        const Object& fo = need_object(fv, "FieldSpec");
        FieldSpec fs;
        fs.name = need_str(need(fo, "name"), "FieldSpec.name");
        fs.spec = spec_from_value(need(fo, "spec"));
        if (const Value* r = fo.fields.find("required")) {
          if (!r->is_bool()) throw SyntaxError("FieldSpec.required must be a bool");
          fs.required = r->as_bool();
        }
        if (const Value* d = fo.fields.find("doc")) fs.doc = need_str(*d, "doc");
        s.fields.push_back(std::move(fs));
      }
    } else {
      throw SyntaxError("TypeSchema: unexpected key '" + key + "'");
    }
  }
  return s;
}

std::string write_schema_bundle(const std::vector<TypeSchema>& schemas) {
  List items;
  for (const auto& s : schemas) items.push_back(schema_to_value(s));
  return write_document(Value(std::move(items)));
}

std::vector<TypeSchema> read_schema_bundle(std::string_view text) {
  RawDocument doc = parse_document(text);
  if (!doc.payload.is_list())
    throw SyntaxError("schema bundle payload must be a list");
  std::vector<TypeSchema> out;
  for (const auto& item : doc.payload.as_list())
    out.push_back(schema_from_value(item));
  return out;
}

void load_schema_bundle(TypeRegistry& registry, std::string_view text) {
  for (auto& schema : read_schema_bundle(text))
    registry.register_type(std::move(schema));
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("cannot read " + path);
  return ss.str();
}

void write_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw IoError("cannot write " + path);
}

}  // namespace symml
