#pragma once

#include <string_view>

#include "symml/patch.hpp"
#include "symml/schema.hpp"

namespace symml {

// Registers the stock patchers against the zoo types:
//   apply_sepconv                  exact-type Conv -> SepConv
//   change_dataset?name=N          dataset preset + matching head width
//   scale_width?factor=F           multiply Conv/Dense widths (half-up, clamped)
//   auto_scale?target_flops=T      width fields -> OneOf{x0.5,x1,x1.5,x2}
//   change_lr?value=V              any `learning_rate` or `lr` field
//   swap_relu?to=A                 ReLU objects -> swish|gelu|relu
void register_builtin_patchers(TypeRegistry& types, PatcherRegistry& patchers);

// Width-role field of a Conv or Dense node (`filters`, `units`, `channels`).
bool is_width_field(const TypeRegistry& types, const MatchContext& ctx);

// half-up rounding of value * factor, clamped into the field's bounds.
std::int64_t scaled_width(const TypeRegistry& types, const MatchContext& ctx,
                          double factor);

}  // namespace symml
