#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "symml/keypath.hpp"
#include "symml/schema.hpp"
#include "symml/value.hpp"

namespace symml {

// Location, value and parent of a visited node. The pointers borrow from the
// tree being traversed and stay valid while that tree is alive and unchanged.
struct MatchContext {
  KeyPath path;
  const Value* value = nullptr;
  const Value* parent = nullptr;  // null at the root

  const Value& node() const { return *value; }
  // Name of the field or key this node sits under, if any.
  std::optional<std::string_view> key() const;
};

// Pure boolean test over a MatchContext.
//
// by_type / by_key match on what a node is; by_path matches on where it is.
// Path patterns are either an exact key path or `**.` followed by a suffix.
class NodePredicate {
 public:
  static NodePredicate by_type(std::string type_name,
                               bool include_subtypes = false);
  static NodePredicate by_key(std::set<std::string> keys);
  // Throws KeyPathSyntaxError.
  static NodePredicate by_path(std::string_view pattern);
  static NodePredicate custom(std::function<bool(const MatchContext&)> fn);
  static NodePredicate anything();

  static NodePredicate all_of(NodePredicate a, NodePredicate b);
  static NodePredicate any_of(NodePredicate a, NodePredicate b);
  static NodePredicate negate(NodePredicate a);

  bool matches(const TypeRegistry& registry, const MatchContext& ctx) const;

 private:
  struct Node;
  explicit NodePredicate(std::shared_ptr<const Node> node)
      : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

// Depth-first pre-order; object fields in schema order, list elements and
// placeholder candidates in index order.
std::vector<MatchContext> query(const TypeRegistry& registry, const Value& root,
                                const NodePredicate& pred);

std::optional<MatchContext> query_last(const TypeRegistry& registry,
                                       const Value& root,
                                       const NodePredicate& pred);

// Returns a replacement for the node, or nullopt to keep it.
using TransformFn = std::function<std::optional<Value>(const MatchContext&)>;

// Bottom-up rewrite: `fn` sees each node after its children were rewritten,
// with the original (pre-transform) parent. The result is canonicalized and
// validated; the input is never touched. Throws ValidationError, or whatever
// `fn` throws.
Value traverse_transform(const TypeRegistry& registry, const Value& root,
                         const TransformFn& fn);

}  // namespace symml
