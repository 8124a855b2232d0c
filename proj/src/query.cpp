#include "symml/query.hpp"

#include <variant>

#include "symml/error.hpp"

namespace symml {

std::optional<std::string_view> MatchContext::key() const {
  if (path.is_root()) return std::nullopt;
  if (const auto* name = std::get_if<std::string>(&path.back()))
    return std::string_view(*name);
  return std::nullopt;
}

struct NodePredicate::Node {
  struct ByType {
    std::string type;
    bool include_subtypes;
  };
  struct ByKey {
    std::set<std::string, std::less<>> keys;
  };
  struct ByPath {
    KeyPath path;
    bool suffix;
  };
  struct Custom {
    std::function<bool(const MatchContext&)> fn;
  };
  struct Anything {};
  struct And {
    NodePredicate a, b;
  };
  struct Or {
    NodePredicate a, b;
  };
  struct Not {
    NodePredicate a;
  };
  std::variant<ByType, ByKey, ByPath, Custom, Anything, And, Or, Not> op;
};

NodePredicate NodePredicate::by_type(std::string type_name,
                                     bool include_subtypes) {
  return NodePredicate(std::make_shared<const Node>(
      Node{Node::ByType{std::move(type_name), include_subtypes}}));
}

NodePredicate NodePredicate::by_key(std::set<std::string> keys) {
  Node::ByKey k;
  k.keys.insert(keys.begin(), keys.end());
  return NodePredicate(std::make_shared<const Node>(Node{std::move(k)}));
}

NodePredicate NodePredicate::by_path(std::string_view pattern) {
  constexpr std::string_view kWildcard = "**.";
  bool suffix = pattern.substr(0, kWildcard.size()) == kWildcard;
  if (suffix) pattern.remove_prefix(kWildcard.size());
  return NodePredicate(std::make_shared<const Node>(
      Node{Node::ByPath{KeyPath::parse(pattern), suffix}}));
}

NodePredicate NodePredicate::custom(
    std::function<bool(const MatchContext&)> fn) {
  return NodePredicate(
      std::make_shared<const Node>(Node{Node::Custom{std::move(fn)}}));
}

NodePredicate NodePredicate::anything() {
  return NodePredicate(std::make_shared<const Node>(Node{Node::Anything{}}));
}

NodePredicate NodePredicate::all_of(NodePredicate a, NodePredicate b) {
  return NodePredicate(std::make_shared<const Node>(
      Node{Node::And{std::move(a), std::move(b)}}));
}

NodePredicate NodePredicate::any_of(NodePredicate a, NodePredicate b) {
  return NodePredicate(std::make_shared<const Node>(
      Node{Node::Or{std::move(a), std::move(b)}}));
}

NodePredicate NodePredicate::negate(NodePredicate a) {
  return NodePredicate(
      std::make_shared<const Node>(Node{Node::Not{std::move(a)}}));
}

bool NodePredicate::matches(const TypeRegistry& registry,
                            const MatchContext& ctx) const {
  struct Visitor {
    const TypeRegistry& registry;
    const MatchContext& ctx;

    bool operator()(const Node::ByType& t) const {
      const auto* obj = ctx.value->get_if<Object>();
      if (!obj) return false;
      if (obj->type == t.type) return true;
      if (!t.include_subtypes) return false;
      if (!registry.contains(obj->type) || !registry.contains(t.type))
        return false;
      return registry.is_subtype(obj->type, t.type);
    }
    bool operator()(const Node::ByKey& k) const {
      auto key = ctx.key();
      return key && k.keys.find(*key) != k.keys.end();
    }
    bool operator()(const Node::ByPath& p) const {
      return p.suffix ? ctx.path.ends_with(p.path) : ctx.path == p.path;
    }
    bool operator()(const Node::Custom& c) const { return c.fn(ctx); }
    bool operator()(const Node::Anything&) const { return true; }
    bool operator()(const Node::And& n) const {
      return n.a.matches(registry, ctx) && n.b.matches(registry, ctx);
    }
    bool operator()(const Node::Or& n) const {
      return n.a.matches(registry, ctx) || n.b.matches(registry, ctx);
    }
    bool operator()(const Node::Not& n) const {
      return !n.a.matches(registry, ctx);
    }
  };
  return std::visit(Visitor{registry, ctx}, node_->op);
}

namespace {

void walk(const TypeRegistry& registry, const Value& node, const Value* parent,
          const KeyPath& path, const NodePredicate& pred,
          std::vector<MatchContext>& out) {
  MatchContext ctx{path, &node, parent};
  if (pred.matches(registry, ctx)) out.push_back(ctx);
  for_each_child(node, [&](const Segment& seg, const Value& child) {
    KeyPath sub = std::holds_alternative<std::string>(seg)
                      ? path.child(std::get<std::string>(seg))
                      : path.child(std::get<std::size_t>(seg));
    walk(registry, child, &node, sub, pred, out);
  });
}

Value rewrite(const Value& node, const Value* parent, const KeyPath& path,
              const TransformFn& fn) {
  Value copy = node;
  for_each_child(node, [&](const Segment& seg, const Value& child) {
    KeyPath sub = std::holds_alternative<std::string>(seg)
                      ? path.child(std::get<std::string>(seg))
                      : path.child(std::get<std::size_t>(seg));
    *copy.child(seg) = rewrite(child, &node, sub, fn);
  });
  MatchContext ctx{path, &copy, parent};
  if (std::optional<Value> replacement = fn(ctx)) return std::move(*replacement);
  return copy;
}

}  // namespace

std::vector<MatchContext> query(const TypeRegistry& registry, const Value& root,
                                const NodePredicate& pred) {
  std::vector<MatchContext> out;
  walk(registry, root, nullptr, KeyPath(), pred, out);
  return out;
}

std::optional<MatchContext> query_last(const TypeRegistry& registry,
                                       const Value& root,
                                       const NodePredicate& pred) {
  auto all = query(registry, root, pred);
  if (all.empty()) return std::nullopt;
  return all.back();
}

Value traverse_transform(const TypeRegistry& registry, const Value& root,
                         const TransformFn& fn) {
  Value out = canonicalize(registry, rewrite(root, nullptr, KeyPath(), fn));
  validate_tree(registry, out);
  return out;
}

}  // namespace symml
