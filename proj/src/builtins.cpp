#include "symml/builtins.hpp"

#include <cmath>

#include "symml/error.hpp"
#include "symml/zoo.hpp"

namespace symml {
namespace {

const NodePredicate& exact_conv() {
  static const NodePredicate p = NodePredicate::by_type("Conv");
  return p;
}

std::optional<KeyPath> head_units(const TypeRegistry& types,
                                  const Value& target) {
  auto last = query_last(types, target, NodePredicate::by_type("Dense", true));
  if (!last) return std::nullopt;
  return last->path.child("units");
}

NodePredicate width_fields(const TypeRegistry& types) {
  return NodePredicate::custom(
      [&types](const MatchContext& ctx) { return is_width_field(types, ctx); });
}

Value activation_named(const TypeRegistry& types, std::string_view name) {
  if (name == "swish") return instantiate(types, "Swish");
  if (name == "gelu") return instantiate(types, "GELU");
  return instantiate(types, "ReLU");
}

}  // namespace

bool is_width_field(const TypeRegistry& types, const MatchContext& ctx) {
  auto key = ctx.key();
  if (!key || (*key != "filters" && *key != "units" && *key != "channels"))
    return false;
  if (!ctx.value->is_int() || !ctx.parent || !ctx.parent->is_object())
    return false;
  const std::string& type = ctx.parent->as_object().type;
  if (!types.contains(type)) return false;
  return types.is_subtype(type, "Conv") || types.is_subtype(type, "Dense");
}

std::int64_t scaled_width(const TypeRegistry& types, const MatchContext& ctx,
                          double factor) {
  double raw = std::floor(static_cast<double>(ctx.value->as_int()) * factor + 0.5);
  const FieldSpec* fs =
      types.find_field(ctx.parent->as_object().type, *ctx.key());
  double lo = fs && fs->spec.min ? *fs->spec.min : 1.0;
  double hi = fs && fs->spec.max ? *fs->spec.max : 9.0e18;
  return static_cast<std::int64_t>(std::clamp(raw, lo, hi));
}

void register_builtin_patchers(TypeRegistry& types, PatcherRegistry& patchers) {
  patchers.add(
      types,
      {"apply_sepconv",
       {},
       "Replace every Conv (exact type) with a SepConv of the same shape.",
       TransformBody([](const PatchContext& pc) -> TransformFn {
         const TypeRegistry& t = pc.types;
         return [&t](const MatchContext& ctx) -> std::optional<Value> {
           if (!exact_conv().matches(t, ctx)) return std::nullopt;
           Object sep = ctx.value->as_object();
           sep.type = "SepConv";
           return Value(std::move(sep));
         };
       })});

  patchers.add(
      types,
      {"change_dataset",
       {required_field("name", ValueSpec::Enum(zoo::preset_names()),
                       "dataset preset")},
       "Switch the dataset and resize the last Dense layer to its class count.",
       UpdateBody([](const PatchContext& pc) {
         Value ds = zoo::dataset_preset(pc.types, pc.param("name").as_str());
         Value classes = pc.types.derived(ds, "num_classes");
         UpdateSet updates;
         auto found = query(pc.types, pc.target,
                            NodePredicate::by_type("Dataset", true));
         if (found.empty()) {
           updates.set(KeyPath::parse("dataset"), ds);
         } else {
           for (const auto& m : found) updates.set(m.path, ds);
         }
         if (auto head = head_units(pc.types, pc.target))
           updates.set(*head, classes);
         return updates;
       })});

  patchers.add(
      types,
      {"scale_width",
       {required_field("factor", ValueSpec::Float(0.01, 100.0),
                       "width multiplier"),
        optional_field("include_head", ValueSpec::Bool(), Value(true),
                       "also scale the last Dense layer")},
       "Multiply every Conv/Dense width by a factor (half-up, clamped).",
       TransformBody([](const PatchContext& pc) -> TransformFn {
         const TypeRegistry& t = pc.types;
         double factor = pc.param("factor").as_float();
         std::optional<KeyPath> skip;
         if (!pc.param("include_head").as_bool())
           skip = head_units(t, pc.target);
         return [&t, factor, skip](const MatchContext& ctx)
                    -> std::optional<Value> {
           if (!is_width_field(t, ctx) || (skip && ctx.path == *skip))
             return std::nullopt;
           return Value(scaled_width(t, ctx, factor));
         };
       })});

  patchers.add(
      types,
      {"auto_scale",
       {required_field("target_flops", ValueSpec::Int(0.0),
                       "largest estimated flops a trial may use"),
        optional_field("include_head", ValueSpec::Bool(), Value(false),
                       "also search the last Dense layer's width")},
       "Turn widths into a search over {x0.5, x1, x1.5, x2} under a flops "
       "budget.",
       UpdateBody([](const PatchContext& pc) {
         std::optional<KeyPath> skip;
         if (!pc.param("include_head").as_bool())
           skip = head_units(pc.types, pc.target);
         UpdateSet updates;
         for (const auto& m :
              query(pc.types, pc.target, width_fields(pc.types))) {
           if (skip && m.path == *skip) continue;
           List cands;
           for (double f : {0.5, 1.0, 1.5, 2.0})
             cands.emplace_back(scaled_width(pc.types, m, f));
           updates.set(m.path, Value(OneOf{std::move(cands)}));
         }
         updates.set(KeyPath::parse("trainer.flops_budget"),
                     pc.param("target_flops"));
         return updates;
       })});

  patchers.add(
      types,
      {"change_lr",
       {required_field("value", ValueSpec::Float(1e-6, 10.0), "learning rate")},
       "Set every field keyed `learning_rate` or `lr`.",
       UpdateBody([](const PatchContext& pc) {
         UpdateSet updates;
         for (const auto& m :
              query(pc.types, pc.target,
                    NodePredicate::by_key({"learning_rate", "lr"})))
           updates.set(m.path, pc.param("value"));
         return updates;
       })});

  patchers.add(
      types,
      {"swap_relu",
       {required_field("to", ValueSpec::Enum({"swish", "gelu", "relu"}),
                       "replacement activation")},
       "Replace every ReLU activation object.",
       TransformBody([](const PatchContext& pc) -> TransformFn {
         const TypeRegistry& t = pc.types;
         Value replacement = activation_named(t, pc.param("to").as_str());
         return [replacement](const MatchContext& ctx) -> std::optional<Value> {
           if (!ctx.value->is_object_of("ReLU")) return std::nullopt;
           return replacement;
         };
       })});
}

}  // namespace symml
