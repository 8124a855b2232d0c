#pragma once

#include <compare>
#include <cstddef>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace symml {

// A field name or a list/candidate index.
using Segment = std::variant<std::string, std::size_t>;

// Address of a node inside a symbolic tree.
//
// Textual grammar:
//   path    := '$' | segment (('.' field) | index)*
//   segment := field | '$' index
//   field   := [A-Za-z_][A-Za-z0-9_]*
//   index   := '[' digits ']'
//
// The root is the empty path and prints as `$`.
class KeyPath {
 public:
  KeyPath() = default;
  explicit KeyPath(std::vector<Segment> segments)
      : segments_(std::move(segments)) {}

  // Throws KeyPathSyntaxError.
  static KeyPath parse(std::string_view text);

  std::string to_string() const;

  const std::vector<Segment>& segments() const noexcept { return segments_; }
  std::size_t size() const noexcept { return segments_.size(); }
  bool is_root() const noexcept { return segments_.empty(); }

  KeyPath child(std::string field) const;
  KeyPath child(std::size_t index) const;
  KeyPath parent() const;
  const Segment& back() const { return segments_.back(); }

  // Reflexive: a path is a prefix of itself.
  bool is_prefix_of(const KeyPath& other) const noexcept;
  bool ends_with(const KeyPath& suffix) const noexcept;

  friend bool operator==(const KeyPath&, const KeyPath&) = default;
  friend std::strong_ordering operator<=>(const KeyPath& a, const KeyPath& b) {
    return a.segments_ <=> b.segments_;
  }

 private:
  std::vector<Segment> segments_;
};

bool is_identifier(std::string_view s) noexcept;

}  // namespace symml
