#include "doctest.h"
#include "fixture.hpp"
#include "gen.hpp"
#include "symml/query.hpp"
#include "symml/serialize.hpp"
#include "symml/symtree.hpp"

using namespace symml;
using namespace symml::testing;

namespace {

std::vector<std::string> paths(const std::vector<MatchContext>& ms) {
  std::vector<std::string> out;
  for (const auto& m : ms) out.push_back(m.path.to_string());
  return out;
}

}  // namespace

TEST_SUITE("query") {
  TEST_CASE("exact type query on the resnet example") {
    Value exp = zoo::example(types(), "resnet_toy");
    auto ms = query(types(), exp, NodePredicate::by_type("Conv"));
    // Hand enumeration of the example: three Conv layers, then the head.
    CHECK(paths(ms) == std::vector<std::string>{"model.layers[0]", "model.layers[1]",
                                                "model.layers[2]"});
    for (const auto& m : ms) {
      CHECK(sym_eq(*m.value, get(exp, m.path)));
      CHECK(m.parent->is_list());
    }
  }

  TEST_CASE("subtype query includes SepConv only when asked") {
    Value exp = zoo::example(types(), "mobilenet_toy");
    CHECK(query(types(), exp, NodePredicate::by_type("Conv")).size() == 1);
    CHECK(query(types(), exp, NodePredicate::by_type("Conv", true)).size() == 2);
    CHECK(query(types(), exp, NodePredicate::by_type("Layer", true)).size() == 3);
  }

  TEST_CASE("negated anything matches nothing") {
    Value exp = zoo::example(types(), "mlp_toy");
    CHECK(query(types(), exp, NodePredicate::negate(NodePredicate::anything())).empty());
    CHECK(query(types(), exp, NodePredicate::anything()).size() == count_nodes(exp));
  }

  TEST_CASE("key query finds the learning rate wherever it nests") {
    for (const char* name : {"mlp_toy", "transformer_toy"}) {
      Value exp = zoo::example(types(), name);
      auto ms = query(types(), exp, NodePredicate::by_key({"learning_rate", "lr"}));
      REQUIRE(ms.size() == 1);
      CHECK(ms[0].value->is_float());
      CHECK(ms[0].parent->as_object().type == (std::string(name) == "mlp_toy" ? "SGD" : "Adam"));
      CHECK(*ms[0].key() == (std::string(name) == "mlp_toy" ? "learning_rate" : "lr"));
    }
  }

  TEST_CASE("path predicates: exact and suffix") {
    Value exp = zoo::example(types(), "resnet_toy");
    auto exact = query(types(), exp, NodePredicate::by_path("model.layers[1].filters"));
    REQUIRE(exact.size() == 1);
    CHECK(exact[0].value->as_int() == 32);
    auto suffix = query(types(), exp, NodePredicate::by_path("**.filters"));
    CHECK(suffix.size() == 3);
    auto root = query(types(), exp, NodePredicate::by_path("$"));
    REQUIRE(root.size() == 1);
    CHECK(root[0].parent == nullptr);
    CHECK_FALSE(root[0].key().has_value());
    CHECK(error_kind([] { (void)NodePredicate::by_path("**filters"); }) == "KeyPathSyntaxError");
  }

  TEST_CASE("the last Dense is the head") {
    Value exp = zoo::example(types(), "resnet_toy");
    auto last = query_last(types(), exp, NodePredicate::by_type("Dense"));
    REQUIRE(last);
    CHECK(last->path.to_string() == "model.layers[3]");
    CHECK(get(*last->value, KeyPath::parse("units")).as_int() == 1000);
    Value no_dense = zoo::example(types(), "vgg_toy");
    CHECK_FALSE(query_last(types(), get(no_dense, KeyPath::parse("model.layers[0]")),
                           NodePredicate::by_type("Dense")));
    // A single match is the same as the first of query().
    auto one = query(types(), exp, NodePredicate::by_type("ImageNet"));
    REQUIRE(one.size() == 1);
    CHECK(query_last(types(), exp, NodePredicate::by_type("ImageNet"))->path == one[0].path);
  }

  TEST_CASE("combinators") {
    Value exp = zoo::example(types(), "resnet_toy");
    auto conv_filters = NodePredicate::all_of(
        NodePredicate::by_key({"filters"}),
        NodePredicate::custom([](const MatchContext& c) { return c.value->as_int() >= 32; }));
    CHECK(paths(query(types(), exp, conv_filters)) ==
          std::vector<std::string>{"model.layers[1].filters", "model.layers[2].filters"});
    auto either = NodePredicate::any_of(NodePredicate::by_type("SGD"),
                                        NodePredicate::by_type("ImageNet"));
    CHECK(paths(query(types(), exp, either)) == std::vector<std::string>{"dataset", "optimizer"});
  }

  TEST_CASE("placeholder candidates are traversed by index") {
    Value space = rebind(types(), zoo::example(types(), "mlp_toy"),
                         {{KeyPath::parse("model.layers[0].activation"),
                           Value(OneOf{{make_object("ReLU"), make_object("GELU")}})}});
    auto ms = query(types(), space, NodePredicate::by_type("GELU"));
    REQUIRE(ms.size() == 1);
    CHECK(ms[0].path.to_string() == "model.layers[0].activation[1]");
    CHECK(ms[0].parent->kind() == ValueKind::OneOf);
  }

  TEST_CASE("identity transform") {
    Value exp = zoo::example(types(), "transformer_toy");
    Value out = traverse_transform(types(), exp, [](const MatchContext&) { return std::nullopt; });
    CHECK(sym_eq(out, exp));
    CHECK(&out != &exp);
  }

  TEST_CASE("transform doubling widths and swapping activations") {
    Value exp = zoo::example(types(), "resnet_toy");
    Value doubled = traverse_transform(types(), exp, [](const MatchContext& c) -> std::optional<Value> {
      auto k = c.key();
      if (k && (*k == "filters" || *k == "units") && c.value->is_int())
        return Value(c.value->as_int() * 2);
      return std::nullopt;
    });
    CHECK(get(doubled, KeyPath::parse("model.layers[0].filters")).as_int() == 32);
    CHECK(get(doubled, KeyPath::parse("model.layers[3].units")).as_int() == 2000);
    Value swished = traverse_transform(types(), exp, [](const MatchContext& c) -> std::optional<Value> {
      if (c.value->is_object_of("ReLU")) return make_object("Swish");
      return std::nullopt;
    });
    CHECK(query(types(), swished, NodePredicate::by_type("ReLU")).empty());
    CHECK(query(types(), swished, NodePredicate::by_type("Swish")).size() == 4);
  }

  TEST_CASE("transform is bottom-up and sees the original parent") {
    Value exp = zoo::example(types(), "mlp_toy");
    std::vector<std::string> order;
    Value out = traverse_transform(types(), exp, [&](const MatchContext& c) -> std::optional<Value> {
      order.push_back(c.path.to_string());
      if (c.key() && *c.key() == "units" && c.parent) {
        // The parent is the untouched original.
        CHECK(sym_eq(*c.parent, get(exp, c.path.parent())));
        return Value(c.value->as_int() + 1);
      }
      if (c.value->is_object_of("Dense")) {
        // The node handed in already carries the rewritten child.
        CHECK(get(*c.value, KeyPath::parse("units")).as_int() ==
              get(exp, c.path.child("units")).as_int() + 1);
      }
      return std::nullopt;
    });
    auto pos = [&](const std::string& p) {
      return std::find(order.begin(), order.end(), p) - order.begin();
    };
    CHECK(pos("model.layers[0].units") < pos("model.layers[0]"));
    CHECK(pos("model.layers[0]") < pos("model.layers"));
    CHECK(order.back() == "$");
    CHECK(get(out, KeyPath::parse("model.layers[1].units")).as_int() == 11);
  }

  TEST_CASE("an invalid rewrite aborts with the offending path; input untouched") {
    Value exp = zoo::example(types(), "resnet_toy");
    std::string before = serialize(exp);
    try {
      (void)traverse_transform(types(), exp, [](const MatchContext& c) -> std::optional<Value> {
        if (c.key() && *c.key() == "kernel") return Value("big");
        return std::nullopt;
      });
      FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
      CHECK(e.path().to_string() == "model.layers[0].kernel");
    }
    CHECK_THROWS_AS(traverse_transform(types(), exp,
                                       [](const MatchContext& c) -> std::optional<Value> {
                                         if (c.path.size() == 3) throw std::runtime_error("boom");
                                         return std::nullopt;
                                       }),
                    std::runtime_error);
    CHECK(serialize(exp) == before);
  }

  TEST_CASE("property: query equals a naive walk for type, key and path predicates") {
    TreeGen gen(ws(), 0xA11CE);
    const std::vector<std::string> type_names = {"Conv", "SepConv", "Dense", "Layer", "ReLU",
                                                 "Activation", "Dataset", "SGD", "Optimizer"};
    const std::vector<std::set<std::string>> key_sets = {
        {"filters"}, {"units", "kernel"}, {"learning_rate", "lr"}, {"k0", "_v1"}, {"factor"}};
    for (int i = 0; i < 150; ++i) {
      GenOptions opt;
      opt.placeholders = gen.coin();
      Value root = gen.mixed(opt);
      auto walk = naive_walk(root);
      for (const auto& t : type_names) {
        for (bool sub : {false, true}) {
          auto got = query(types(), root, NodePredicate::by_type(t, sub));
          std::vector<std::string> want;
          for (const auto& n : walk)
            if (n.value->is_object() &&
                (n.value->as_object().type == t ||
                 (sub && naive_is_subtype(types(), n.value->as_object().type, t))))
              want.push_back(n.path.to_string());
          CHECK(paths(got) == want);
        }
      }
      for (const auto& ks : key_sets) {
        std::vector<std::string> want;
        for (const auto& n : walk)
          if (!n.path.is_root() && std::holds_alternative<std::string>(n.path.back()) &&
              ks.count(std::get<std::string>(n.path.back())))
            want.push_back(n.path.to_string());
        CHECK(paths(query(types(), root, NodePredicate::by_key(ks))) == want);
      }
      // Exact path of a random node, and a suffix made of its last segment(s).
      const auto& pick = walk[gen.rng().below(walk.size())];
      auto exact = query(types(), root, NodePredicate::by_path(pick.path.to_string()));
      REQUIRE(exact.size() == 1);
      CHECK(exact[0].path == pick.path);
      CHECK(exact[0].value == pick.value);
      CHECK(exact[0].parent == pick.parent);
      if (pick.path.size() >= 2 && std::holds_alternative<std::string>(pick.path.segments()[pick.path.size() - 2])) {
        KeyPath suffix(std::vector<Segment>(pick.path.segments().end() - 2, pick.path.segments().end()));
        std::vector<std::string> want;
        for (const auto& n : walk)
          if (n.path.size() >= 2 && n.path.segments()[n.path.size() - 2] == suffix.segments()[0] &&
              n.path.segments().back() == suffix.segments()[1])
            want.push_back(n.path.to_string());
        CHECK(paths(query(types(), root, NodePredicate::by_path("**." + suffix.to_string()))) == want);
      }
    }
  }

  TEST_CASE("property: match order survives a serialization round trip") {
    TreeGen gen(ws(), 99);
    for (int i = 0; i < 100; ++i) {
      Value v = gen.mixed();
      Value back = deserialize(types(), serialize(v));
      auto all = NodePredicate::anything();
      CHECK(paths(query(types(), v, all)) == paths(query(types(), back, all)));
    }
  }
}
