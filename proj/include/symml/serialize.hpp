#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "symml/schema.hpp"
#include "symml/value.hpp"

namespace symml {

inline constexpr std::string_view kFormatVersion = "1";
inline constexpr std::string_view kTypeKey = "_type";

// Compact canonical JSON: `_type` first, fields in stored order, floats in
// shortest round-trip form. serialize(Value(5)) == "5".
std::string serialize(const Value& value);

// Same encoding with line breaks; `indent` < 0 means compact.
std::string to_json(const Value& value, int indent);

// Object type names reachable from `payload`, sorted, without placeholder
// tags.
std::vector<std::string> required_types(const Value& payload);

// {"format_version": "1", "requires": [...], "payload": ...}, two-space
// indent, trailing newline.
std::string write_document(const Value& payload);

// JSON text to a raw tree; no registry involved, nothing canonicalized.
// Throws SyntaxError.
Value decode(std::string_view text);

struct RawDocument {
  bool wrapped = false;  // false when the text was a bare payload
  std::vector<std::string> required;
  Value payload;
};

// Throws SyntaxError.
RawDocument parse_document(std::string_view text);

// Reads a document (or a bare payload), checks that every required type is
// registered, then canonicalizes and validates.
// Throws SyntaxError, UnknownType, ValidationError.
Value deserialize(const TypeRegistry& registry, std::string_view text);

// Schema bundles: documents whose payload lists TypeSchema objects.
Value schema_to_value(const TypeSchema& schema);
TypeSchema schema_from_value(const Value& v);
Value spec_to_value(const ValueSpec& spec);
ValueSpec spec_from_value(const Value& v);

std::string write_schema_bundle(const std::vector<TypeSchema>& schemas);
// Throws SyntaxError.
std::vector<TypeSchema> read_schema_bundle(std::string_view text);
// Registers every schema in bundle order.
void load_schema_bundle(TypeRegistry& registry, std::string_view text);

// Throws IoError.
std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

}  // namespace symml
