#include "symml/placehold.hpp"

#include <charconv>
#include <cmath>
#include <map>

#include "symml/error.hpp"

namespace symml {
namespace {

void collect(const Value& node, const KeyPath& path,
             std::optional<Condition> condition, DecisionSpec& out) {
  switch (node.kind()) {
    case ValueKind::OneOf: {
      std::size_t index = out.points.size();
      const auto& cands = node.as_one_of().candidates;
      out.points.push_back({path, ChoiceDim{cands.size()}, condition});
      for (std::size_t c = 0; c < cands.size(); ++c)
        collect(cands[c], path.child(c), Condition{index, c}, out);
      return;
    }
    case ValueKind::IntRange:
      out.points.push_back(
          {path, IntDim{node.as_int_range().min, node.as_int_range().max},
           condition});
      return;
    case ValueKind::FloatRange:
      out.points.push_back(
          {path,
           FloatDim{node.as_float_range().min, node.as_float_range().max},
           condition});
      return;
    default:
      for_each_child(node, [&](const Segment& seg, const Value& child) {
        KeyPath sub = std::holds_alternative<std::string>(seg)
                          ? path.child(std::get<std::string>(seg))
                          : path.child(std::get<std::size_t>(seg));
        collect(child, sub, condition, out);
      });
  }
}

Decision lowest(const DecisionPoint& p) {
  if (std::holds_alternative<ChoiceDim>(p.dim)) return Choice{0};
  if (const auto* f = std::get_if<FloatDim>(&p.dim)) return f->min;
  return std::get<IntDim>(p.dim).min;
}

bool mul(std::uint64_t a, std::uint64_t b, std::uint64_t& out) {
  return !__builtin_mul_overflow(a, b, &out);
}

std::optional<std::uint64_t> point_size(const DecisionSpec& spec,
                                        std::size_t k) {
  const DecisionPoint& p = spec.points[k];
  if (std::holds_alternative<FloatDim>(p.dim)) return std::nullopt;
  if (const auto* d = std::get_if<IntDim>(&p.dim)) {
    __int128 width = static_cast<__int128>(d->max) - d->min + 1;
    if (width > static_cast<__int128>(UINT64_MAX)) return std::nullopt;
    return static_cast<std::uint64_t>(width);
  }
  std::size_t arity = std::get<ChoiceDim>(p.dim).arity;
  std::uint64_t total = 0;
  for (std::size_t c = 0; c < arity; ++c) {
    std::uint64_t branch = 1;
    for (std::size_t j = k + 1; j < spec.points.size(); ++j) {
      const auto& cond = spec.points[j].condition;
      if (!cond || cond->parent != k || cond->candidate != c) continue;
      auto sub = point_size(spec, j);
      if (!sub || !mul(branch, *sub, branch)) return std::nullopt;
    }
    if (__builtin_add_overflow(total, branch, &total)) return std::nullopt;
  }
  return total;
}

}  // namespace

DecisionSpec derive_space(const Value& root) {
  DecisionSpec spec;
  collect(root, KeyPath(), std::nullopt, spec);
  return spec;
}

void check_decisions(const DecisionSpec& spec,
                     const DecisionVector& decisions) {
  if (decisions.size() != spec.size())
    throw SpecMismatch("expected " + std::to_string(spec.size()) +
                       " decisions, got " + std::to_string(decisions.size()));
  for (std::size_t k = 0; k < spec.size(); ++k) {
    const DecisionPoint& p = spec.points[k];
    const Decision& d = decisions[k];
    const std::string where =
        "decision " + std::to_string(k) + " (" + p.path.to_string() + ")";
    if (const auto* c = std::get_if<ChoiceDim>(&p.dim)) {
      const auto* v = std::get_if<Choice>(&d);
      if (!v) throw SpecMismatch(where + ": expected a choice index");
      if (v->index >= c->arity)
        throw SpecMismatch(where + ": choice " + std::to_string(v->index) +
                           " out of range");
    } else if (const auto* f = std::get_if<FloatDim>(&p.dim)) {
      const auto* v = std::get_if<double>(&d);
      if (!v) throw SpecMismatch(where + ": expected a float");
      if (!(*v >= f->min && *v <= f->max))
        throw SpecMismatch(where + ": " + format_float(*v) + " out of range");
    } else {
      const auto& r = std::get<IntDim>(p.dim);
      const auto* v = std::get_if<std::int64_t>(&d);
      if (!v) throw SpecMismatch(where + ": expected an integer");
      if (*v < r.min || *v > r.max)
        throw SpecMismatch(where + ": " + std::to_string(*v) +
                           " out of range");
    }
  }
}

bool is_active(const DecisionSpec& spec, const DecisionVector& decisions,
               std::size_t point) {
  const auto& cond = spec.points[point].condition;
  if (!cond) return true;
  const auto* chosen = std::get_if<Choice>(&decisions[cond->parent]);
  return chosen && chosen->index == cond->candidate &&
         is_active(spec, decisions, cond->parent);
}

DecisionVector normalize(const DecisionSpec& spec, DecisionVector decisions) {
  for (std::size_t k = 0; k < spec.size() && k < decisions.size(); ++k)
    if (!is_active(spec, decisions, k)) decisions[k] = lowest(spec.points[k]);
  return decisions;
}

namespace {

class Materializer {
 public:
  Materializer(const DecisionSpec& spec, const DecisionVector& decisions) {
    for (std::size_t k = 0; k < spec.size(); ++k)
      by_path_.emplace(spec.points[k].path, &decisions[k]);
  }

  Value run(const Value& node, const KeyPath& path) const {
    switch (node.kind()) {
      case ValueKind::OneOf: {
        std::size_t c = std::get<Choice>(at(path)).index;
        return run(node.as_one_of().candidates[c], path.child(c));
      }
      case ValueKind::IntRange:
        return Value(std::get<std::int64_t>(at(path)));
      case ValueKind::FloatRange:
        return Value(std::get<double>(at(path)));
      default: {
        Value out = node;
        for_each_child(node, [&](const Segment& seg, const Value& child) {
          KeyPath sub = std::holds_alternative<std::string>(seg)
                            ? path.child(std::get<std::string>(seg))
                            : path.child(std::get<std::size_t>(seg));
          *out.child(seg) = run(child, sub);
        });
        return out;
      }
    }
  }

 private:
  const Decision& at(const KeyPath& path) const { return *by_path_.at(path); }
  std::map<KeyPath, const Decision*> by_path_;
};

}  // namespace

Value materialize(const TypeRegistry& registry, const Value& root,
                  const DecisionVector& decisions) {
  DecisionSpec spec = derive_space(root);
  check_decisions(spec, decisions);
  Value out =
      canonicalize(registry, Materializer(spec, decisions).run(root, KeyPath()));
  validate_tree(registry, out);
  return out;
}

std::optional<std::uint64_t> space_size(const DecisionSpec& spec) {
  std::uint64_t total = 1;
  for (std::size_t k = 0; k < spec.size(); ++k) {
    if (spec.points[k].condition) continue;
    auto s = point_size(spec, k);
    if (!s || !mul(total, *s, total)) return std::nullopt;
  }
  return total;
}

DecisionVector lowest_decisions(const DecisionSpec& spec) {
  DecisionVector out;
  out.reserve(spec.size());
  for (const auto& p : spec.points) out.push_back(lowest(p));
  return out;
}

SpaceEnumerator::SpaceEnumerator(DecisionSpec spec) : spec_(std::move(spec)) {
  if (!space_size(spec_)) throw InfiniteSpace();
  current_ = lowest_decisions(spec_);
}

bool SpaceEnumerator::advance(std::size_t k) {
  const DecisionPoint& p = spec_.points[k];
  Decision& d = current_[k];
  if (const auto* c = std::get_if<ChoiceDim>(&p.dim)) {
    auto& v = std::get<Choice>(d);
    if (v.index + 1 >= c->arity) return false;
    ++v.index;
    return true;
  }
  auto& v = std::get<std::int64_t>(d);
  if (v >= std::get<IntDim>(p.dim).max) return false;
  ++v;
  return true;
}

std::optional<DecisionVector> SpaceEnumerator::next() {
  if (done_) return std::nullopt;
  if (!started_) {
    started_ = true;
    return current_;
  }
  for (std::size_t k = spec_.size(); k-- > 0;) {
    if (!is_active(spec_, current_, k)) continue;
    if (!advance(k)) continue;
    for (std::size_t j = k + 1; j < spec_.size(); ++j)
      current_[j] = lowest(spec_.points[j]);
    return current_;
  }
  done_ = true;
  return std::nullopt;
}

std::vector<DecisionVector> enumerate_space(const DecisionSpec& spec) {
  SpaceEnumerator it(spec);
  std::vector<DecisionVector> out;
  while (auto v = it.next()) out.push_back(std::move(*v));
  return out;
}

Value decisions_to_value(const DecisionVector& decisions) {
  List out;
  out.reserve(decisions.size());
  for (const Decision& d : decisions) {
    if (const auto* c = std::get_if<Choice>(&d))
      out.emplace_back(static_cast<std::int64_t>(c->index));
    else if (const auto* f = std::get_if<double>(&d))
      out.emplace_back(*f);
    else
      out.emplace_back(std::get<std::int64_t>(d));
  }
  return Value(std::move(out));
}

DecisionVector decisions_from_value(const DecisionSpec& spec, const Value& v) {
  if (!v.is_list()) throw SpecMismatch("decisions must be a list");
  const List& items = v.as_list();
  if (items.size() != spec.size())
    throw SpecMismatch("expected " + std::to_string(spec.size()) +
                       " decisions, got " + std::to_string(items.size()));
  DecisionVector out;
  for (std::size_t k = 0; k < items.size(); ++k) {
    const Value& item = items[k];
    const auto& dim = spec.points[k].dim;
    if (std::holds_alternative<ChoiceDim>(dim)) {
      if (!item.is_int() || item.as_int() < 0)
        throw SpecMismatch("decision " + std::to_string(k) +
                           ": expected a choice index");
      out.emplace_back(Choice{static_cast<std::size_t>(item.as_int())});
    } else if (std::holds_alternative<FloatDim>(dim)) {
      if (item.is_float())
        out.emplace_back(item.as_float());
      else if (item.is_int())
        out.emplace_back(static_cast<double>(item.as_int()));
      else
        throw SpecMismatch("decision " + std::to_string(k) +
                           ": expected a float");
    } else {
      if (!item.is_int())
        throw SpecMismatch("decision " + std::to_string(k) +
                           ": expected an integer");
      out.emplace_back(item.as_int());
    }
  }
  check_decisions(spec, out);
  return out;
}

std::string format_decisions(const DecisionVector& decisions) {
  std::string out;
  for (std::size_t k = 0; k < decisions.size(); ++k) {
    if (k) out += ',';
    const Decision& d = decisions[k];
    if (const auto* c = std::get_if<Choice>(&d))
      out += std::to_string(c->index);
    else if (const auto* f = std::get_if<double>(&d))
      out += format_float(*f);
    else
      out += std::to_string(std::get<std::int64_t>(d));
  }
  return out;
}

DecisionVector parse_decisions(const DecisionSpec& spec,
                               std::string_view text) {
  List items;
  std::size_t start = 0;
  while (!text.empty() && start <= text.size()) {
    std::size_t comma = text.find(',', start);
    std::string_view part = text.substr(
        start, comma == std::string_view::npos ? std::string_view::npos
                                               : comma - start);
    std::int64_t i = 0;
    auto [ip, iec] = std::from_chars(part.data(), part.data() + part.size(), i);
    if (iec == std::errc{} && ip == part.data() + part.size() && !part.empty()) {
      items.emplace_back(i);
    } else {
      double f = 0;
      auto [fp, fec] =
          std::from_chars(part.data(), part.data() + part.size(), f);
      if (fec != std::errc{} || fp != part.data() + part.size() ||
          part.empty() || !std::isfinite(f))
        throw SpecMismatch("cannot read decision '" + std::string(part) + "'");
      items.emplace_back(f);
    }
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return decisions_from_value(spec, Value(std::move(items)));
}

std::string describe_dim(const DecisionPoint& point) {
  if (const auto* c = std::get_if<ChoiceDim>(&point.dim))
    return "Choice(" + std::to_string(c->arity) + ")";
  if (const auto* f = std::get_if<FloatDim>(&point.dim))
    return "Float(" + format_float(f->min) + "," + format_float(f->max) + ")";
  const auto& r = std::get<IntDim>(point.dim);
  return "Int(" + std::to_string(r.min) + "," + std::to_string(r.max) + ")";
}

}  // namespace symml
