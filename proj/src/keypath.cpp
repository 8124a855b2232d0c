#include "symml/keypath.hpp"

#include <cctype>
#include <charconv>

#include "symml/error.hpp"

namespace symml {
namespace {

bool ident_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}
bool ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  KeyPath run() {
    if (text_ == "$") return KeyPath();
    if (text_.empty()) fail("empty path");
    std::vector<Segment> segs;
    if (peek() == '$') {
      ++pos_;
      if (peek() != '[') fail("expected '[' after '$'");
      segs.emplace_back(index());
    } else {
      segs.emplace_back(field());
    }
    while (pos_ < text_.size()) {
      if (peek() == '.') {
        ++pos_;
        segs.emplace_back(field());
      } else if (peek() == '[') {
        segs.emplace_back(index());
      } else {
        fail("unexpected character");
      }
    }
    return KeyPath(std::move(segs));
  }

 private:
  char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }

  [[noreturn]] void fail(const std::string& why) const {
    throw KeyPathSyntaxError("invalid key path '" + std::string(text_) +
                             "' at offset " + std::to_string(pos_) + ": " +
                             why);
  }

  std::string field() {
    std::size_t start = pos_;
    if (!ident_start(peek())) fail("expected field name");
    while (pos_ < text_.size() && ident_char(text_[pos_])) ++pos_;
    return std::string(text_.substr(start, pos_ - start));
  }

  std::size_t index() {
    ++pos_;  // '['
    std::size_t start = pos_;
    while (pos_ < text_.size() &&
           std::isdigit(static_cast<unsigned char>(text_[pos_])))
      ++pos_;
    if (pos_ == start) fail("expected digits");
    std::size_t value = 0;
    auto [ptr, ec] =
        std::from_chars(text_.data() + start, text_.data() + pos_, value);
    if (ec != std::errc{}) fail("index out of range");
    if (peek() != ']') fail("expected ']'");
    ++pos_;
    return value;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

bool is_identifier(std::string_view s) noexcept {
  if (s.empty() || !ident_start(s.front())) return false;
  for (char c : s)
    if (!ident_char(c)) return false;
  return true;
}

KeyPath KeyPath::parse(std::string_view text) { return Parser(text).run(); }

std::string KeyPath::to_string() const {
  if (segments_.empty()) return "$";
  std::string out;
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    if (const auto* name = std::get_if<std::string>(&segments_[i])) {
      if (i > 0) out += '.';
      out += *name;
    } else {
      if (i == 0) out += '$';
      out += '[';
      out += std::to_string(std::get<std::size_t>(segments_[i]));
      out += ']';
    }
  }
  return out;
}

KeyPath KeyPath::child(std::string field) const {
  KeyPath p = *this;
  p.segments_.emplace_back(std::move(field));
  return p;
}

KeyPath KeyPath::child(std::size_t index) const {
  KeyPath p = *this;
  p.segments_.emplace_back(index);
  return p;
}

KeyPath KeyPath::parent() const {
  KeyPath p = *this;
  if (!p.segments_.empty()) p.segments_.pop_back();
  return p;
}

bool KeyPath::is_prefix_of(const KeyPath& other) const noexcept {
  if (segments_.size() > other.segments_.size()) return false;
  for (std::size_t i = 0; i < segments_.size(); ++i)
    if (segments_[i] != other.segments_[i]) return false;
  return true;
}

bool KeyPath::ends_with(const KeyPath& suffix) const noexcept {
  if (suffix.segments_.size() > segments_.size()) return false;
  std::size_t off = segments_.size() - suffix.segments_.size();
  for (std::size_t i = 0; i < suffix.segments_.size(); ++i)
    if (segments_[off + i] != suffix.segments_[i]) return false;
  return true;
}

}  // namespace symml
