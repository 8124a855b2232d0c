#include "symml/symtree.hpp"

#include <algorithm>
#include <bit>
#include <cstring>

#include "symml/error.hpp"

namespace symml {

Value instantiate(const TypeRegistry& registry, const std::string& type_name,
                  FieldMap field_values) {
  if (!registry.contains(type_name)) throw UnknownType({type_name});
  Value v = canonicalize(registry,
                         make_object(type_name, std::move(field_values)));
  validate_tree(registry, v);
  return v;
}

const Value* find(const Value& root, const KeyPath& path) noexcept {
  const Value* node = &root;
  for (const Segment& seg : path.segments()) {
    node = node->child(seg);
    if (!node) return nullptr;
  }
  return node;
}

const Value& get(const Value& root, const KeyPath& path) {
  const Value* node = &root;
  KeyPath walked;
  for (const Segment& seg : path.segments()) {
    const Value* next = node->child(seg);
    KeyPath here = std::holds_alternative<std::string>(seg)
                       ? walked.child(std::get<std::string>(seg))
                       : walked.child(std::get<std::size_t>(seg));
    if (!next) {
      std::string why;
      if (std::holds_alternative<std::size_t>(seg) &&
          (node->is_list() || node->kind() == ValueKind::OneOf))
        why = "index out of range";
      else if (std::holds_alternative<std::string>(seg) &&
               (node->is_object() || node->is_dict()))
        why = "no such field";
      else
        why = "cannot descend into " + std::string(kind_name(node->kind()));
      throw PathNotFound(here, why);
    }
    node = next;
    walked = std::move(here);
  }
  return *node;
}

// ---------------------------------------------------------------------------

namespace {

bool same_fields(const FieldMap& a, const FieldMap& b) {
  if (a.size() != b.size()) return false;
  for (const auto& [k, v] : a) {
    const Value* other = b.find(k);
    if (!other || !sym_eq(v, *other)) return false;
  }
  return true;
}

bool same_list(const List& a, const List& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!sym_eq(a[i], b[i])) return false;
  return true;
}

std::uint64_t bits_of(double d) { return std::bit_cast<std::uint64_t>(d); }

}  // namespace

bool sym_eq(const Value& a, const Value& b) {
  if (a.kind() != b.kind()) return false;
  switch (a.kind()) {
    case ValueKind::Int: return a.as_int() == b.as_int();
    case ValueKind::Float: return bits_of(a.as_float()) == bits_of(b.as_float());
    case ValueKind::Bool: return a.as_bool() == b.as_bool();
    case ValueKind::Str: return a.as_str() == b.as_str();
    case ValueKind::List: return same_list(a.as_list(), b.as_list());
    case ValueKind::Dict:
      return same_fields(a.as_dict().entries, b.as_dict().entries);
    case ValueKind::Object:
      return a.as_object().type == b.as_object().type &&
             same_fields(a.as_object().fields, b.as_object().fields);
    case ValueKind::OneOf:
      return same_list(a.as_one_of().candidates, b.as_one_of().candidates);
    case ValueKind::FloatRange:
      return bits_of(a.as_float_range().min) == bits_of(b.as_float_range().min) &&
             bits_of(a.as_float_range().max) == bits_of(b.as_float_range().max);
    case ValueKind::IntRange:
      return a.as_int_range().min == b.as_int_range().min &&
             a.as_int_range().max == b.as_int_range().max;
  }
  return false;
}

// ---------------------------------------------------------------------------
// Hashing: FNV-1a over a tagged structural encoding. Field maps hash their
// (key, value) digests in sorted order so the result ignores field order.

namespace {

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

class Hasher {
 public:
  void byte(std::uint8_t b) {
    h_ ^= b;
    h_ *= kFnvPrime;
  }
  void u64(std::uint64_t x) {
    for (int i = 0; i < 8; ++i) byte(static_cast<std::uint8_t>(x >> (8 * i)));
  }
  void str(const std::string& s) {
    u64(s.size());
    for (char c : s) byte(static_cast<std::uint8_t>(c));
  }
  std::uint64_t digest() const { return h_; }

 private:
  std::uint64_t h_ = kFnvOffset;
};

std::uint64_t hash_value(const Value& v);

std::uint64_t hash_fields(const FieldMap& fields) {
  std::vector<std::uint64_t> parts;
  parts.reserve(fields.size());
  for (const auto& [k, child] : fields) {
    Hasher h;
    h.str(k);
    h.u64(hash_value(child));
    parts.push_back(h.digest());
  }
  std::sort(parts.begin(), parts.end());
  Hasher h;
  h.u64(parts.size());
  for (std::uint64_t p : parts) h.u64(p);
  return h.digest();
}

std::uint64_t hash_value(const Value& v) {
  Hasher h;
  h.byte(static_cast<std::uint8_t>(v.kind()));
  switch (v.kind()) {
    case ValueKind::Int: h.u64(static_cast<std::uint64_t>(v.as_int())); break;
    case ValueKind::Float: h.u64(bits_of(v.as_float())); break;
    case ValueKind::Bool: h.byte(v.as_bool() ? 1 : 0); break;
    case ValueKind::Str: h.str(v.as_str()); break;
    case ValueKind::List:
      h.u64(v.as_list().size());
      for (const Value& c : v.as_list()) h.u64(hash_value(c));
      break;
    case ValueKind::Dict: h.u64(hash_fields(v.as_dict().entries)); break;
    case ValueKind::Object:
      h.str(v.as_object().type);
      h.u64(hash_fields(v.as_object().fields));
      break;
    case ValueKind::OneOf:
      h.u64(v.as_one_of().candidates.size());
      for (const Value& c : v.as_one_of().candidates) h.u64(hash_value(c));
      break;
    case ValueKind::FloatRange:
      h.u64(bits_of(v.as_float_range().min));
      h.u64(bits_of(v.as_float_range().max));
      break;
    case ValueKind::IntRange:
      h.u64(static_cast<std::uint64_t>(v.as_int_range().min));
      h.u64(static_cast<std::uint64_t>(v.as_int_range().max));
      break;
  }
  return h.digest();
}

}  // namespace

std::uint64_t sym_hash(const Value& v) { return hash_value(v); }

// ---------------------------------------------------------------------------

namespace {

void diff_into(const Value& a, const Value& b, const KeyPath& at,
               std::vector<DiffEntry>& out);

void diff_fields(const FieldMap& a, const FieldMap& b, const KeyPath& at,
                 std::vector<DiffEntry>& out) {
  for (const auto& [k, av] : a) {
    if (const Value* bv = b.find(k))
      diff_into(av, *bv, at.child(k), out);
    else
      out.push_back({at.child(k), av, std::nullopt});
  }
  for (const auto& [k, bv] : b)
    if (!a.contains(k)) out.push_back({at.child(k), std::nullopt, bv});
}

void diff_into(const Value& a, const Value& b, const KeyPath& at,
               std::vector<DiffEntry>& out) {
  if (a.kind() != b.kind()) {
    out.push_back({at, a, b});
    return;
  }
  switch (a.kind()) {
    case ValueKind::Object:
      if (a.as_object().type != b.as_object().type) {
        out.push_back({at, a, b});
        return;
      }
      diff_fields(a.as_object().fields, b.as_object().fields, at, out);
      return;
    case ValueKind::Dict:
      diff_fields(a.as_dict().entries, b.as_dict().entries, at, out);
      return;
    case ValueKind::List: {
      const List& la = a.as_list();
      const List& lb = b.as_list();
      std::size_t common = std::min(la.size(), lb.size());
      for (std::size_t i = 0; i < common; ++i)
        diff_into(la[i], lb[i], at.child(i), out);
      for (std::size_t i = common; i < la.size(); ++i)
        out.push_back({at.child(i), la[i], std::nullopt});
      for (std::size_t i = common; i < lb.size(); ++i)
        out.push_back({at.child(i), std::nullopt, lb[i]});
      return;
    }
    default:
      if (!sym_eq(a, b)) out.push_back({at, a, b});
      return;
  }
}

}  // namespace

std::vector<DiffEntry> diff(const Value& a, const Value& b) {
  std::vector<DiffEntry> out;
  diff_into(a, b, KeyPath(), out);
  return out;
}

// ---------------------------------------------------------------------------

void CachedState::put(const KeyPath& path, std::any payload) {
  payload_[path] = std::move(payload);
}

const std::any* CachedState::find(const KeyPath& path) const {
  auto it = payload_.find(path);
  return it == payload_.end() ? nullptr : &it->second;
}

void CachedState::invalidate(const KeyPath& path) {
  for (auto it = payload_.begin(); it != payload_.end();) {
    if (it->first.is_prefix_of(path) || path.is_prefix_of(it->first))
      it = payload_.erase(it);
    else
      ++it;
  }
}

}  // namespace symml
