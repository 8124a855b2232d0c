#include "symml/patch.hpp"

#include <algorithm>
#include <charconv>
#include <cctype>
#include <cmath>

#include "symml/error.hpp"

namespace symml {

UpdateSet::UpdateSet(std::initializer_list<std::pair<KeyPath, Value>> items) {
  for (const auto& [path, value] : items) set(path, value);
}

void UpdateSet::set(KeyPath path, Value value) {
  entries_.insert_or_assign(std::move(path), Update(std::move(value)));
}

void UpdateSet::remove(KeyPath path) {
  entries_.insert_or_assign(std::move(path), Update(Delete{}));
}

namespace {

Value& resolve_mut(Value& root, const KeyPath& path) {
  get(root, path);  // throws PathNotFound with a precise location
  Value* node = &root;
  for (const Segment& seg : path.segments()) node = node->child(seg);
  return *node;
}

bool is_append_slot(const Value& parent, const Segment& seg) {
  if (parent.is_list()) return std::holds_alternative<std::size_t>(seg);
  if (parent.is_dict()) return std::holds_alternative<std::string>(seg);
  return false;
}

}  // namespace

Value rebind(const TypeRegistry& registry, const Value& root,
             const UpdateSet& updates) {
  const auto& entries = updates.entries();
  for (auto it = entries.begin(); it != entries.end(); ++it) {
    auto next = std::next(it);
    if (next != entries.end() && it->first.is_prefix_of(next->first))
      throw ConflictingUpdates(it->first, next->first);
  }

  Value out = root;
  std::vector<std::pair<KeyPath, const Value*>> appends;
  std::vector<KeyPath> deletes;

  for (const auto& [path, update] : entries) {
    if (std::holds_alternative<Delete>(update)) {
      deletes.push_back(path);
      continue;
    }
    const Value& value = std::get<Value>(update);
    if (path.is_root()) {
      out = value;
      continue;
    }
    Value& parent = resolve_mut(out, path.parent());
    if (Value* slot = parent.child(path.back())) {
      *slot = value;
    } else if (is_append_slot(parent, path.back())) {
      appends.emplace_back(path, &value);
    } else {
      get(out, path);  // reports the missing step
    }
  }

  for (const auto& [path, value] : appends) {
    Value& parent = resolve_mut(out, path.parent());
    if (parent.is_list()) {
      std::size_t index = std::get<std::size_t>(path.back());
      if (index != parent.as_list().size())
        throw PathNotFound(path, "index out of range");
      parent.as_list().push_back(*value);
    } else {
      parent.as_dict().entries.set(std::get<std::string>(path.back()), *value);
    }
  }

  for (auto it = deletes.rbegin(); it != deletes.rend(); ++it) {
    const KeyPath& path = *it;
    if (path.is_root()) throw ValidationError(path, "cannot delete the root");
    Value& parent = resolve_mut(out, path.parent());
    const Segment& seg = path.back();
    if (parent.is_object())
      throw ValidationError(path, "cannot delete a field of an object");
    if (parent.is_list() && std::holds_alternative<std::size_t>(seg)) {
      auto& items = parent.as_list();
      std::size_t index = std::get<std::size_t>(seg);
      if (index >= items.size())
        throw PathNotFound(path, "index out of range");
      items.erase(items.begin() + static_cast<std::ptrdiff_t>(index));
    } else if (parent.is_dict() && std::holds_alternative<std::string>(seg)) {
      if (!parent.as_dict().entries.erase(std::get<std::string>(seg)))
        throw PathNotFound(path, "no such key");
    } else {
      throw PathNotFound(path, "only list elements and dict entries can be "
                               "deleted");
    }
  }

  out = canonicalize(registry, std::move(out));
  validate_tree(registry, out);
  return out;
}

Tree rebind(const TypeRegistry& registry, const Tree& tree,
            const UpdateSet& updates) {
  Value root = rebind(registry, tree.root(), updates);
  CachedState state = tree.state();
  for (const auto& [path, update] : updates.entries()) {
    const Value* existing = find(tree.root(), path);
    bool structural = std::holds_alternative<Delete>(update) || !existing;
    state.invalidate(structural && !path.is_root() ? path.parent() : path);
  }
  state.bump();
  return Tree(std::move(root), std::move(state));
}

UpdateSet updates_from_diff(const std::vector<DiffEntry>& entries) {
  UpdateSet out;
  for (const DiffEntry& e : entries) {
    if (e.right)
      out.set(e.path, *e.right);
    else
      out.remove(e.path);
  }
  return out;
}

// ---------------------------------------------------------------------------

const Value& PatchContext::param(std::string_view name) const {
  const Value* v = params.as_object().fields.find(name);
  if (!v)
    throw Error("PatcherError",
                "patcher has no parameter " + std::string(name));
  return *v;
}

std::string PatcherRegistry::type_name_for(std::string_view patcher_name) {
  return "patcher." + std::string(patcher_name);
}

void PatcherRegistry::add(TypeRegistry& types, PatcherDef def) {
  if (!is_identifier(def.name))
    throw SchemaError("invalid patcher name '" + def.name + "'");
  if (defs_.count(def.name)) throw DuplicateType(type_name_for(def.name));
  if (!types.contains(kBaseType))
    types.register_type(
        TypeSchema{std::string(kBaseType), {}, std::nullopt, {"patcher"}});
  types.register_type(TypeSchema{type_name_for(def.name), def.params,
                                 std::string(kBaseType), {"patcher"}});
  std::string name = def.name;
  defs_.emplace(std::move(name), std::move(def));
}

bool PatcherRegistry::contains(std::string_view name) const {
  return defs_.find(name) != defs_.end();
}

const PatcherDef& PatcherRegistry::find(std::string_view name) const {
  auto it = defs_.find(name);
  if (it == defs_.end()) throw UnknownPatcher(std::string(name));
  return it->second;
}

std::vector<std::string> PatcherRegistry::names() const {
  std::vector<std::string> out;
  for (const auto& [name, def] : defs_) out.push_back(name);
  return out;
}

Value PatcherRegistry::bind(const TypeRegistry& types, std::string_view name,
                            FieldMap args) const {
  find(name);
  return instantiate(types, type_name_for(name), std::move(args));
}

const PatcherDef& PatcherRegistry::definition_of(const Value& bound) const {
  constexpr std::string_view kPrefix = "patcher.";
  if (!bound.is_object())
    throw UnknownPatcher(std::string(kind_name(bound.kind())));
  std::string_view type = bound.as_object().type;
  if (type.substr(0, kPrefix.size()) != kPrefix)
    throw UnknownPatcher(std::string(type));
  return find(type.substr(kPrefix.size()));
}

namespace {

Value apply_one(const TypeRegistry& types, const PatcherRegistry& patchers,
                const Value& root, const Value& bound, std::size_t index) {
  std::string name = bound.is_object() ? bound.as_object().type : "?";
  try {
    const PatcherDef& def = patchers.definition_of(bound);
    name = def.name;
    validate(types, ValueSpec::ObjectOf(PatcherRegistry::type_name_for(name)),
             bound);
    PatchContext ctx{types, bound, root};
    if (const auto* updates = std::get_if<UpdateBody>(&def.body))
      return rebind(types, root, (*updates)(ctx));
    TransformFn fn = std::get<TransformBody>(def.body)(ctx);
    return traverse_transform(types, root, fn);
  } catch (const Error& e) {
    throw PatcherError(name, index, e.kind(), e.what());
  } catch (const std::exception& e) {
    throw PatcherError(name, index, "exception", e.what());
  }
}

}  // namespace

Value apply_patch(const TypeRegistry& types, const PatcherRegistry& patchers,
                  const Value& root, const std::vector<Value>& bound) {
  Value current = root;
  for (std::size_t i = 0; i < bound.size(); ++i)
    current = apply_one(types, patchers, current, bound[i], i);
  return current;
}

Tree apply_patch(const TypeRegistry& types, const PatcherRegistry& patchers,
                 const Tree& tree, const std::vector<Value>& bound) {
  Value current = tree.root();
  CachedState state = tree.state();
  for (std::size_t i = 0; i < bound.size(); ++i) {
    Value next = apply_one(types, patchers, current, bound[i], i);
    for (const DiffEntry& d : diff(current, next)) state.invalidate(d.path);
    state.bump();
    current = std::move(next);
  }
  return Tree(std::move(current), std::move(state));
}

// ---------------------------------------------------------------------------
// URIs

namespace {

int hex_digit(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

bool valid_utf8(std::string_view s) {
  std::size_t i = 0;
  while (i < s.size()) {
    auto c = static_cast<unsigned char>(s[i]);
    std::size_t extra;
    if (c < 0x80) extra = 0;
    else if ((c >> 5) == 0x6) extra = 1;
    else if ((c >> 4) == 0xE) extra = 2;
    else if ((c >> 3) == 0x1E) extra = 3;
    else return false;
    if (s.size() - i <= extra) return false;
    for (std::size_t k = 1; k <= extra; ++k)
      if ((static_cast<unsigned char>(s[i + k]) >> 6) != 0x2) return false;
    i += extra + 1;
  }
  return true;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

}  // namespace

std::string percent_decode(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (raw[i] != '%') {
      out += raw[i];
      continue;
    }
    if (raw.size() - i < 3)
      throw UriSyntaxError("truncated percent escape in '" +
                           std::string(raw) + "'");
    int hi = hex_digit(raw[i + 1]);
    int lo = hex_digit(raw[i + 2]);
    if (hi < 0 || lo < 0)
      throw UriSyntaxError("bad percent escape in '" + std::string(raw) + "'");
    out += static_cast<char>(hi * 16 + lo);
    i += 2;
  }
  if (!valid_utf8(out))
    throw UriSyntaxError("value is not valid UTF-8: '" + std::string(raw) +
                         "'");
  return out;
}

std::string percent_encode(std::string_view text) {
  static constexpr char kHex[] = "0123456789ABCDEF";
  std::string out;
  for (char ch : text) {
    auto c = static_cast<unsigned char>(ch);
    if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
      out += ch;
    } else {
      out += '%';
      out += kHex[c >> 4];
      out += kHex[c & 0xF];
    }
  }
  return out;
}

PatchUri PatchUri::parse(std::string_view text) {
  PatchUri uri;
  std::size_t q = text.find('?');
  std::string_view name = text.substr(0, q);
  if (!is_identifier(name))
    throw UriSyntaxError("invalid patcher name in '" + std::string(text) + "'");
  uri.name = std::string(name);
  if (q == std::string_view::npos) return uri;
  std::string_view query = text.substr(q + 1);
  if (query.empty())
    throw UriSyntaxError("empty argument list in '" + std::string(text) + "'");
  for (std::string_view pair : split(query, '&')) {
    std::size_t eq = pair.find('=');
    if (eq == std::string_view::npos)
      throw UriSyntaxError("argument without '=' in '" + std::string(text) +
                           "'");
    std::string_view key = pair.substr(0, eq);
    if (!is_identifier(key))
      throw UriSyntaxError("invalid argument name '" + std::string(key) +
                           "'");
    for (const auto& [k, v] : uri.args)
      if (k == key)
        throw UriSyntaxError("duplicate argument '" + std::string(key) + "'");
    std::string_view raw = pair.substr(eq + 1);
    percent_decode(raw);  // reject malformed escapes early
    uri.args.emplace_back(std::string(key), std::string(raw));
  }
  return uri;
}

std::string PatchUri::to_string() const {
  std::string out = name;
  for (std::size_t i = 0; i < args.size(); ++i) {
    out += i == 0 ? '?' : '&';
    out += args[i].first;
    out += '=';
    out += args[i].second;
  }
  return out;
}

namespace {

std::optional<std::int64_t> read_int(std::string_view s) {
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty())
    return std::nullopt;
  return v;
}

std::optional<double> read_float(std::string_view s) {
  double v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty() ||
      !std::isfinite(v))
    return std::nullopt;
  return v;
}

std::optional<bool> read_bool(std::string_view s) {
  if (s == "true") return true;
  if (s == "false") return false;
  return std::nullopt;
}

}  // namespace

Value coerce_argument(const ValueSpec& spec, std::string_view raw,
                      const KeyPath& at) {
  auto bad = [&](std::string_view what) {
    return ValidationError(at, "cannot read '" + std::string(raw) + "' as " +
                                   std::string(what));
  };
  if (spec.kind == SpecKind::List) {
    List items;
    if (!raw.empty()) {
      auto parts = split(raw, ',');
      for (std::size_t i = 0; i < parts.size(); ++i)
        items.push_back(coerce_argument(*spec.element, parts[i], at.child(i)));
    }
    return Value(std::move(items));
  }
  std::string text = percent_decode(raw);
  switch (spec.kind) {
    case SpecKind::Int:
      if (auto v = read_int(text)) return Value(*v);
      throw bad("an integer");
    case SpecKind::Float:
      if (auto v = read_float(text)) return Value(*v);
      throw bad("a float");
    case SpecKind::Bool:
      if (auto v = read_bool(text)) return Value(*v);
      throw bad("a bool");
    case SpecKind::Str:
    case SpecKind::Enum:
      return Value(std::move(text));
    case SpecKind::Any:
      if (auto v = read_int(text)) return Value(*v);
      if (auto v = read_float(text)) return Value(*v);
      if (auto v = read_bool(text)) return Value(*v);
      return Value(std::move(text));
    case SpecKind::Object:
      throw ValidationError(at, "object arguments cannot be given in a URI");
    case SpecKind::List:
      break;
  }
  throw bad(spec.describe());
}

Value parse_patch_uri(const TypeRegistry& types,
                      const PatcherRegistry& patchers, std::string_view text) {
  PatchUri uri = PatchUri::parse(text);
  const PatcherDef& def = patchers.find(uri.name);
  FieldMap args;
  for (const auto& [key, raw] : uri.args) {
    const FieldSpec* spec = nullptr;
    for (const FieldSpec& p : def.params)
      if (p.name == key) spec = &p;
    KeyPath at = KeyPath().child(key);
    if (!spec)
      throw ValidationError(at, "unknown argument for patcher " + def.name);
    args.set(key, coerce_argument(spec->spec, raw, at));
  }
  return patchers.bind(types, def.name, std::move(args));
}

namespace {

std::string render_argument(const ValueSpec& spec, const Value& v) {
  switch (v.kind()) {
    case ValueKind::Int: return std::to_string(v.as_int());
    case ValueKind::Float: return format_float(v.as_float());
    case ValueKind::Bool: return v.as_bool() ? "true" : "false";
    case ValueKind::Str: return percent_encode(v.as_str());
    case ValueKind::List: {
      std::string out;
      const ValueSpec elem = spec.element ? *spec.element : ValueSpec{};
      for (std::size_t i = 0; i < v.as_list().size(); ++i) {
        if (i) out += ',';
        out += render_argument(elem, v.as_list()[i]);
      }
      return out;
    }
    default:
      throw ValidationError(KeyPath(), std::string(kind_name(v.kind())) +
                                           " cannot be written in a URI");
  }
}

}  // namespace

std::string to_patch_uri(const TypeRegistry& types,
                         const PatcherRegistry& patchers, const Value& bound) {
  const PatcherDef& def = patchers.definition_of(bound);
  PatchUri uri;
  uri.name = def.name;
  for (const FieldSpec& p : types.effective_fields(
           PatcherRegistry::type_name_for(def.name))) {
    const Value* v = bound.as_object().fields.find(p.name);
    if (!v) continue;
    if (!p.required && p.spec.default_value &&
        sym_eq(*v, *p.spec.default_value))
      continue;
    uri.args.emplace_back(p.name, render_argument(p.spec, *v));
  }
  return uri.to_string();
}

}  // namespace symml
