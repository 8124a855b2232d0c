#include <set>

#include "doctest.h"
#include "fixture.hpp"
#include "gen.hpp"
#include "symml/patch.hpp"
#include "symml/placehold.hpp"
#include "symml/query.hpp"
#include "symml/serialize.hpp"
#include "symml/symtree.hpp"

using namespace symml;
using namespace symml::testing;

namespace {

// mlp_toy with a three-way optimizer choice and a three-way activation choice.
Value nine_point_space() {
  Value exp = zoo::example(types(), "mlp_toy");
  return rebind(types(), exp,
                {{KeyPath::parse("optimizer"),
                  Value(OneOf{{make_object("SGD", {{"learning_rate", 0.1}}),
                               make_object("SGD", {{"learning_rate", 0.5}}),
                               make_object("Adam", {{"lr", 0.01}})}})},
                 {KeyPath::parse("model.layers[0].activation"),
                  Value(OneOf{{make_object("ReLU"), make_object("Swish"), make_object("GELU")}})}});
}

bool has_placeholder(const Value& v) {
  for (const auto& n : naive_walk(v))
    if (n.value->is_placeholder()) return true;
  return false;
}

bool candidates_distinct(const Value& v) {
  for (const auto& n : naive_walk(v)) {
    if (const auto* o = n.value->get_if<OneOf>()) {
      for (std::size_t i = 0; i < o->candidates.size(); ++i)
        for (std::size_t j = i + 1; j < o->candidates.size(); ++j)
          if (sym_eq(o->candidates[i], o->candidates[j])) return false;
    }
  }
  return true;
}

std::string describe_spec(const DecisionSpec& s) {
  std::string out;
  for (const auto& p : s.points) {
    out += p.path.to_string() + " " + describe_dim(p);
    if (p.condition)
      out += " if #" + std::to_string(p.condition->parent) + "=" + std::to_string(p.condition->candidate);
    out += "\n";
  }
  return out;
}

DecisionSpec choices(std::initializer_list<std::size_t> arities) {
  DecisionSpec s;
  std::size_t i = 0;
  for (auto a : arities) s.points.push_back({KeyPath().child(i++), ChoiceDim{a}, std::nullopt});
  return s;
}

}  // namespace

TEST_SUITE("placehold") {
  TEST_CASE("a tree without placeholders has an empty space") {
    Value exp = zoo::example(types(), "resnet_toy");
    DecisionSpec s = derive_space(exp);
    CHECK(s.empty());
    CHECK(space_size(s) == 1u);
    CHECK(sym_eq(materialize(types(), exp, {}), exp));
    auto all = enumerate_space(s);
    REQUIRE(all.size() == 1);
    CHECK(all[0].empty());
  }

  TEST_CASE("three by three choices") {
    Value space = nine_point_space();
    DecisionSpec s = derive_space(space);
    REQUIRE(s.size() == 2);
    CHECK(s.points[0].path.to_string() == "model.layers[0].activation");
    CHECK(s.points[1].path.to_string() == "optimizer");
    CHECK(describe_dim(s.points[0]) == "Choice(3)");
    CHECK(space_size(s) == 9u);
    auto all = enumerate_space(s);
    REQUIRE(all.size() == 9);
    std::vector<Value> made;
    for (const auto& v : all) made.push_back(materialize(types(), space, v));
    for (std::size_t i = 0; i < made.size(); ++i)
      for (std::size_t j = i + 1; j < made.size(); ++j) CHECK_FALSE(sym_eq(made[i], made[j]));
  }

  TEST_CASE("choice substitution") {
    Value exp = zoo::example(types(), "mlp_toy");
    Value space = rebind(types(), exp,
                         {{KeyPath::parse("model.layers[0].activation"),
                           Value(OneOf{{make_object("ReLU"), make_object("Swish")}})}});
    Value out = materialize(types(), space, {Choice{1}});
    CHECK(get(out, KeyPath::parse("model.layers[0].activation")).is_object_of("Swish"));
    CHECK(diff(exp, out).size() == 1);
  }

  TEST_CASE("mismatched decisions are rejected") {
    Value space = nine_point_space();
    auto mismatch = [&](DecisionVector d) {
      return error_kind([&] { (void)materialize(types(), space, d); });
    };
    CHECK(mismatch({}) == "SpecMismatch");
    CHECK(mismatch({Choice{0}}) == "SpecMismatch");
    CHECK(mismatch({Choice{0}, Choice{3}}) == "SpecMismatch");
    CHECK(mismatch({Choice{0}, 1.0}) == "SpecMismatch");
    CHECK(mismatch({Choice{0}, std::int64_t{1}}) == "SpecMismatch");
    CHECK(mismatch({Choice{0}, Choice{0}, Choice{0}}) == "SpecMismatch");
    DecisionSpec r;
    r.points.push_back({KeyPath::parse("x"), FloatDim{0.0, 1.0}, std::nullopt});
    r.points.push_back({KeyPath::parse("y"), IntDim{1, 3}, std::nullopt});
    CHECK_NOTHROW(check_decisions(r, {0.0, std::int64_t{3}}));
    CHECK_NOTHROW(check_decisions(r, {1.0, std::int64_t{1}}));
    CHECK(error_kind([&] { check_decisions(r, {1.5, std::int64_t{1}}); }) == "SpecMismatch");
    CHECK(error_kind([&] { check_decisions(r, {0.5, std::int64_t{4}}); }) == "SpecMismatch");
    CHECK(error_kind([&] { check_decisions(r, {std::nan(""), std::int64_t{1}}); }) == "SpecMismatch");
  }

  TEST_CASE("ranges materialize to their decided value") {
    Value exp = zoo::example(types(), "mlp_toy");
    Value space = rebind(types(), exp,
                         {{KeyPath::parse("optimizer.learning_rate"), Value(FloatRange{0.001, 1.0})},
                          {KeyPath::parse("trainer.epochs"), Value(IntRange{1, 5})}});
    DecisionSpec s = derive_space(space);
    REQUIRE(s.size() == 2);
    CHECK(describe_dim(s.points[0]) == "Float(0.001,1.0)");
    CHECK(describe_dim(s.points[1]) == "Int(1,5)");
    CHECK_FALSE(space_size(s).has_value());
    CHECK(error_kind([&] { SpaceEnumerator e(s); }) == "InfiniteSpace");
    Value out = materialize(types(), space, {0.25, std::int64_t{4}});
    CHECK(get(out, KeyPath::parse("optimizer.learning_rate")).as_float() == 0.25);
    CHECK(get(out, KeyPath::parse("trainer.epochs")).as_int() == 4);
  }

  TEST_CASE("integer ranges are finite") {
    DecisionSpec s;
    s.points.push_back({KeyPath::parse("a"), IntDim{1, 5}, std::nullopt});
    s.points.push_back({KeyPath::parse("b"), IntDim{7, 7}, std::nullopt});
    s.points.push_back({KeyPath::parse("c"), ChoiceDim{2}, std::nullopt});
    CHECK(space_size(s) == 10u);
    auto all = enumerate_space(s);
    REQUIRE(all.size() == 10);
    CHECK(format_decisions(all.front()) == "1,7,0");
    CHECK(format_decisions(all[1]) == "1,7,1");
    CHECK(format_decisions(all.back()) == "5,7,1");
    DecisionSpec huge;
    huge.points.push_back({KeyPath::parse("a"), IntDim{INT64_MIN, INT64_MAX}, std::nullopt});
    CHECK_FALSE(space_size(huge).has_value());
    DecisionSpec wide;
    for (int i = 0; i < 70; ++i) wide.points.push_back({KeyPath().child(std::size_t(i)), ChoiceDim{2}, std::nullopt});
    CHECK_FALSE(space_size(wide).has_value());
  }

  TEST_CASE("enumeration is lexicographic") {
    auto all = enumerate_space(choices({2, 2}));
    REQUIRE(all.size() == 4);
    std::vector<std::string> text;
    for (const auto& v : all) text.push_back(format_decisions(v));
    CHECK(text == std::vector<std::string>{"0,0", "0,1", "1,0", "1,1"});
  }

  TEST_CASE("property: enumeration equals the Cartesian product") {
    SplitMix64 rng(17);
    for (int i = 0; i < 200; ++i) {
      std::vector<std::int64_t> ar;
      DecisionSpec s;
      auto n = rng.between(0, 5);
      for (std::int64_t k = 0; k < n; ++k) {
        ar.push_back(rng.between(1, 4));
        s.points.push_back({KeyPath().child(std::size_t(k)), ChoiceDim{std::size_t(ar.back())}, std::nullopt});
      }
      auto want = naive_product(ar);
      auto got = enumerate_space(s);
      REQUIRE(got.size() == want.size());
      CHECK(space_size(s) == want.size());
      for (std::size_t r = 0; r < got.size(); ++r)
        for (std::size_t c = 0; c < want[r].size(); ++c)
          CHECK(std::get<Choice>(got[r][c]).index == std::size_t(want[r][c]));
    }
  }

  TEST_CASE("conditional points follow their choice") {
    Value exp = zoo::example(types(), "mlp_toy");
    Value space = rebind(
        types(), exp,
        {{KeyPath::parse("model.layers[0]"),
          Value(OneOf{{make_object("Dense", {{"units", Value(OneOf{{16, 32, 64}})}}),
                       make_object("Conv", {{"filters", Value(IntRange{4, 5})},
                                            {"kernel", Value(OneOf{{1, 3}})}})}})}});
    DecisionSpec s = derive_space(space);
    CHECK(describe_spec(s) ==
          "model.layers[0] Choice(2)\n"
          "model.layers[0][0].units Choice(3) if #0=0\n"
          "model.layers[0][1].filters Int(4,5) if #0=1\n"
          "model.layers[0][1].kernel Choice(2) if #0=1\n");
    CHECK(space_size(s) == 3u + 2u * 2u);
    auto all = enumerate_space(s);
    REQUIRE(all.size() == 7);
    std::vector<Value> made;
    for (const auto& v : all) {
      Value m = materialize(types(), space, v);
      CHECK_FALSE(has_placeholder(m));
      for (const auto& prev : made) CHECK_FALSE(sym_eq(prev, m));
      made.push_back(m);
    }
    DecisionVector v = {Choice{0}, Choice{2}, std::int64_t{5}, Choice{1}};
    CHECK(is_active(s, v, 1));
    CHECK_FALSE(is_active(s, v, 2));
    CHECK(format_decisions(normalize(s, v)) == "0,2,4,0");
    Value m = materialize(types(), space, v);
    CHECK(get(m, KeyPath::parse("model.layers[0].units")).as_int() == 64);
    CHECK(sym_eq(m, materialize(types(), space, normalize(s, v))));
    // Inactive points are still range-checked.
    CHECK(error_kind([&] { check_decisions(s, {Choice{0}, Choice{2}, std::int64_t{9}, Choice{1}}); }) ==
          "SpecMismatch");
  }

  TEST_CASE("decision vectors serialize as flat lists") {
    DecisionSpec s;
    s.points.push_back({KeyPath::parse("a"), ChoiceDim{3}, std::nullopt});
    s.points.push_back({KeyPath::parse("b"), FloatDim{0, 2}, std::nullopt});
    s.points.push_back({KeyPath::parse("c"), IntDim{-3, 3}, std::nullopt});
    DecisionVector v = {Choice{2}, 1.0, std::int64_t{-3}};
    Value flat = decisions_to_value(v);
    CHECK(serialize(flat) == "[2,1.0,-3]");
    CHECK(decisions_from_value(s, flat) == v);
    CHECK(format_decisions(v) == "2,1.0,-3");
    CHECK(parse_decisions(s, "2,1.0,-3") == v);
    CHECK(parse_decisions(s, "2,1,-3") == v);
    CHECK(error_kind([&] { (void)parse_decisions(s, ""); }) == "SpecMismatch");
    CHECK(error_kind([&] { (void)parse_decisions(s, "2,1.0"); }) == "SpecMismatch");
    CHECK(error_kind([&] { (void)parse_decisions(s, "x,1.0,0"); }) == "SpecMismatch");
    CHECK(error_kind([&] { (void)decisions_from_value(s, make_list({2, 1.0, 0.5})); }) == "SpecMismatch");
    CHECK(parse_decisions(DecisionSpec{}, "").empty());
  }

  TEST_CASE("property: materialized trees are concrete and distinct") {
    TreeGen gen(ws(), 9001);
    int checked = 0;
    for (int i = 0; i < 300; ++i) {
      GenOptions opt;
      opt.placeholders = true;
      opt.max_layers = 4;
      Value space = gen.experiment(opt);
      DecisionSpec s = derive_space(space);
      SplitMix64 rng(i);
      DecisionVector v = lowest_decisions(s);
      for (std::size_t k = 0; k < s.size(); ++k) {
        const auto& dim = s.points[k].dim;
        if (auto* c = std::get_if<ChoiceDim>(&dim)) v[k] = Choice{rng.below(c->arity)};
        if (auto* f = std::get_if<FloatDim>(&dim)) v[k] = rng.uniform(f->min, f->max);
        if (auto* n = std::get_if<IntDim>(&dim)) v[k] = rng.between(n->min, n->max);
      }
      Value m = materialize(types(), space, v);
      CHECK_FALSE(has_placeholder(m));
      CHECK(derive_space(m).empty());
      CHECK_NOTHROW(validate_tree(types(), m));
      auto size = space_size(s);
      if (!size || *size > 3000) continue;
      std::vector<Value> made;
      for (const auto& d : enumerate_space(s)) made.push_back(materialize(types(), space, d));
      CHECK(made.size() == *size);
      std::set<std::string> distinct;
      for (const auto& x : made) distinct.insert(serialize(x));
      if (candidates_distinct(space)) {
        CHECK(distinct.size() == *size);
        ++checked;
      } else {
        CHECK(distinct.size() <= *size);
      }
    }
    CHECK(checked > 50);
  }

  TEST_CASE("property: the space survives a serialization round trip") {
    TreeGen gen(ws(), 1234);
    for (int i = 0; i < 200; ++i) {
      GenOptions opt;
      opt.placeholders = true;
      Value space = gen.experiment(opt);
      Value back = deserialize(types(), serialize(space));
      CHECK(sym_eq(space, back));
      CHECK(describe_spec(derive_space(space)) == describe_spec(derive_space(back)));
    }
  }
}
