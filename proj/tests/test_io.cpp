#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "treeforge/dot.hpp"
#include "treeforge/json_io.hpp"
#include "treeforge/scenario.hpp"

using namespace treeforge;
using treeforge::io::json;

namespace {

std::vector<std::uint64_t> ram_levels(const finite_tree& T) {
  std::set<std::uint64_t> levels;
  for (const node& t : ramification_points(T)) levels.insert(t.size());
  return {levels.begin(), levels.end()};
}

std::size_t count_occurrences(const std::string& text,
                              const std::string& needle) {
  std::size_t n = 0;
  for (std::size_t pos = text.find(needle); pos != std::string::npos;
       pos = text.find(needle, pos + needle.size()))
    ++n;
  return n;
}

json thin_doc() {
  return json::parse(R"({
    "kind": "thin",
    "label": "sacks example",
    "flavor": "sacks",
    "base": "full-binary",
    "plan": {
      "X": {"affine": {"a": 2, "b": 0}},
      "h": {"modular": 0},
      "enforced": [0, 1, 2, 3],
      "low_policy": "keep"
    },
    "horizons": {"depth": 18}
  })");
}

}  // namespace

TEST_CASE("finite trees survive the JSON round trip") {
  finite_tree T = finite_tree::closure(
      width_t::binary, {node({0, 0}), node({0, 1}), node({1})});
  json j = io::finite_tree_to_json(T);
  CHECK(j.at("width") == 2);
  CHECK(io::finite_tree_from_json(j) == T);

  // The node list is emitted in the tree's own lexicographic order.
  std::vector<node> listed;
  for (const json& n : j.at("nodes")) listed.push_back(io::node_from_json(n));
  CHECK(listed == T.nodes());

  finite_tree W = finite_tree::closure(width_t::omega, {node({3, 7})});
  json jw = io::finite_tree_to_json(W);
  CHECK(jw.at("width") == "omega");
  CHECK(io::finite_tree_from_json(jw) == W);

  json bad = j;
  bad["width"] = 3;
  CHECK_THROWS_WITH(io::finite_tree_from_json(bad),
                    Catch::Matchers::ContainsSubstring("width must be 2"));
}

TEST_CASE("tree references cover the registry") {
  CHECK(io::tree_from_ref(json("full-binary")).width() == width_t::binary);
  CHECK(io::tree_from_ref(json("full-omega")).width() == width_t::omega);
  CHECK(io::tree_from_ref(json("chain")).children(node::root()) ==
        std::vector<std::uint32_t>{0});

  lazy_tree cone = io::tree_from_ref(json("cone:011"));
  CHECK(cone.cone() == node({0, 1, 1}));
  CHECK(cone.contains(node({0, 1, 1, 0})));
  CHECK_FALSE(cone.contains(node({1})));

  lazy_tree arith = io::tree_from_ref(json("arithmetic:3,2"));
  CHECK(arith.children(node::root(), 18) ==
        std::vector<std::uint32_t>{2, 5, 8, 11, 14, 17});
  CHECK(io::tree_from_ref(json::parse(R"({"arithmetic":{"a":3,"b":2}})"))
            .children(node::root(), 9) ==
        std::vector<std::uint32_t>{2, 5, 8});

  lazy_tree obj_cone = io::tree_from_ref(
      json::parse(R"({"cone": [1, 0], "base": "full-binary"})"));
  CHECK(obj_cone.cone() == node({1, 0}));

  finite_tree small =
      finite_tree::closure(width_t::binary, {node({0, 0}), node({0, 1})});
  json explicit_ref;
  explicit_ref["explicit"] = io::finite_tree_to_json(small);
  lazy_tree padded = io::tree_from_ref(explicit_ref);
  CHECK(padded.contains(node({0, 1})));
  // Below the finite part every branch continues as a 0-chain.
  CHECK(padded.children(node({0, 1})) == std::vector<std::uint32_t>{0});

  lazy_tree thinned = io::tree_from_ref(json::parse(R"({
    "thinned": {
      "base": "full-binary",
      "plan": {
        "X": {"affine": {"a": 2, "b": 0}},
        "h": {"modular": 0},
        "enforced": [0, 1, 2, 3],
        "low_policy": "keep"
      }
    }
  })"));
  finite_tree cut = truncate(thinned, 16);
  CHECK(ram_levels(cut) == std::vector<std::uint64_t>{0, 1, 2, 4, 8});
  CHECK(cut.at_level(16).size() == 32);

  CHECK_THROWS_WITH(io::tree_from_ref(json("no-such-tree")),
                    Catch::Matchers::ContainsSubstring("unknown tree name"));
  CHECK_THROWS_WITH(io::tree_from_ref(json("cone:012")),
                    Catch::Matchers::ContainsSubstring("binary digits"));
  CHECK_THROWS_WITH(io::tree_from_ref(json("arithmetic:5")),
                    Catch::Matchers::ContainsSubstring("arithmetic:a,b"));
  CHECK_THROWS_WITH(io::tree_from_ref(json(42)),
                    Catch::Matchers::ContainsSubstring("unrecognized"));
}

TEST_CASE("sets, colorings and plans validate while parsing") {
  baire::enumerated_set X =
      io::enumerated_set_from_json(json::parse(R"({"affine":{"a":2,"b":1}})"));
  CHECK(X.mu(3) == 7);
  baire::enumerated_set E = io::enumerated_set_from_json(
      json::parse(R"({"explicit":[0, 4, 9]})"));
  CHECK(E.mu(2) == 9);

  CHECK_THROWS_WITH(
      io::enumerated_set_from_json(json::parse(R"({"affine":{"a":0,"b":1}})")),
      Catch::Matchers::ContainsSubstring("slope"));
  CHECK_THROWS_WITH(io::enumerated_set_from_json(json::parse(R"({"x": 1})")),
                    Catch::Matchers::ContainsSubstring("expected"));

  surgery::coloring h =
      io::coloring_from_json(json::parse(R"({"modular": 5})"));
  CHECK(h.at(3) == 5);
  CHECK(h.name() == "mod:5");

  surgery::thin_plan plan = io::thin_plan_from_json(json::parse(R"({
    "X": {"affine": {"a": 2, "b": 0}},
    "h": {"modular": 0},
    "enforced": [0, 1],
    "low_policy": "leftmost"
  })"));
  CHECK(plan.low == surgery::low_policy::leftmost);
  CHECK(plan.enforced == std::vector<std::uint64_t>{0, 1});

  CHECK_THROWS_WITH(io::thin_plan_from_json(json::parse(R"({
    "X": {"affine": {"a": 2, "b": 0}},
    "h": {"modular": 0},
    "enforced": [0],
    "low_policy": "sideways"
  })")),
                    Catch::Matchers::ContainsSubstring("low_policy"));

  CHECK_THROWS_WITH(
      io::omega_horizon_from_json(json::parse(R"({"depth": 0})")),
      Catch::Matchers::ContainsSubstring("strictly positive"));
}

TEST_CASE("certificates serialize with their verdict") {
  lazy_tree fb = full_binary_tree();
  surgery::incompatibility_certificate ok = surgery::sacks_incompatibility(
      fb.restrict_to(node({0})), fb.restrict_to(node({1})), 1, 8);
  json j = io::certificate_to_json(ok);
  CHECK(j.at("kind") == "sacks");
  CHECK(j.at("divergence_level") == 1);
  CHECK(j.at("checked_to") == 8);
  CHECK(j.at("shared").empty());
  CHECK(j.at("violations").empty());
  CHECK(j.at("passed") == true);
  CHECK_FALSE(j.contains("value_bound"));

  surgery::incompatibility_certificate bad =
      surgery::sacks_incompatibility(fb, fb, 2, 4);
  json jb = io::certificate_to_json(bad);
  CHECK(jb.at("passed") == false);
  CHECK_FALSE(jb.at("violations").empty());
  CHECK(jb.at("violations")[0].contains("at"));
  CHECK(jb.at("violations")[0].contains("level"));
}

TEST_CASE("conditions load from side-tree references") {
  json doc = json::parse(R"({
    "n": 1,
    "F": {"width": 2, "nodes": [[], [0], [1]]},
    "side": [
      {"leaf": [1], "tree": {"cone": [1]}},
      {"leaf": [0], "tree": {"cone": [0]}}
    ]
  })");
  qforcing::q_condition c = io::q_condition_from_json(doc);
  CHECK(c.n == 1);
  CHECK(c.F.leaves() == std::vector<node>{node({0}), node({1})});
  // Side entries are sorted by leaf regardless of input order.
  CHECK(c.side[0].first == node({0}));
  CHECK(qforcing::q_validate(c, {}).ok);

  json back = io::q_condition_to_json(c);
  CHECK(back.at("n") == 1);
  CHECK(back.at("side").size() == 2);
  CHECK(back.at("side")[0].at("leaf") == json::array({0}));
  CHECK(back.at("side")[0].at("tree").contains("name"));
}

TEST_CASE("posets close under load") {
  namecraft::finite_poset P = io::poset_from_json(json::parse(R"({
    "elements": ["a", "b", "c"],
    "leq": [["a", "b"], ["b", "c"]]
  })"));
  CHECK(P.leq("a", "c"));
  CHECK(P.leq("b", "b"));
  CHECK_FALSE(P.leq("c", "a"));

  CHECK_THROWS_WITH(io::poset_from_json(json::parse(R"({
    "elements": ["a", "b"],
    "leq": [["a", "b"], ["b", "a"]]
  })")),
                    Catch::Matchers::ContainsSubstring("antisymmetric"));
}

TEST_CASE("digests freeze the scenario text") {
  CHECK(io::fnv1a64_hex("") == "cbf29ce484222325");
  CHECK(io::fnv1a64_hex("a") == "af63dc4c8601ec8c");
  CHECK(io::fnv1a64_hex("treeforge") != io::fnv1a64_hex("treeforgf"));
}

TEST_CASE("dot output is deterministic and marks ramification") {
  finite_tree fb2 = truncate(full_binary_tree(), 2);
  std::string dot = io::to_dot(fb2);
  CHECK(dot == io::to_dot(fb2));
  CHECK(count_occurrences(dot, "shape=") == 7);
  CHECK(count_occurrences(dot, "doublecircle") == 3);
  CHECK(count_occurrences(dot, " -> ") == 6);
  CHECK(dot.find("digraph tree") == 0);

  std::string captioned = io::to_dot(fb2, "window [2,4)");
  CHECK(captioned.find("label=\"window [2,4)\"") != std::string::npos);

  std::string caption = io::enforced_caption(
      baire::enumerated_set::affine(2, 0), surgery::coloring::modular(0),
      {0, 1});
  CHECK(caption.find("enforced") == 0);
  CHECK(caption.find("0:[2,4)") != std::string::npos);
}

TEST_CASE("thin scenarios judge the soundness clauses") {
  json doc = thin_doc();
  io::scenario_report rep = io::run_scenario(doc, {});
  CHECK(rep.pass);
  CHECK(rep.doc.at("verdict") == "pass");
  CHECK(rep.doc.at("kind") == "thin");
  CHECK(rep.doc.at("label") == "sacks example");
  CHECK(rep.doc.at("scenario_digest") == io::fnv1a64_hex(doc.dump()));
  CHECK(rep.doc.at("scenario") == doc);
  const json& detail = rep.doc.at("detail");
  CHECK(detail.at("containment") == true);
  CHECK(detail.at("single_child_where_forbidden") == true);
  CHECK(detail.at("ramification_levels") ==
        json::array({0, 1, 2, 4, 8, 16}));
  CHECK(detail.at("leaves_at_depth") == 64);
  for (const json& fam : detail.at("enforced")) CHECK(fam.at("holds") == true);

  SECTION("export artifacts are emitted on request") {
    doc["export"] = {{"dot", "thinned.dot"}};
    io::scenario_report with_dot = io::run_scenario(doc, {});
    REQUIRE(with_dot.files.size() == 1);
    CHECK(with_dot.files[0].name == "thinned.dot");
    CHECK(with_dot.files[0].content.find("doublecircle") != std::string::npos);
    CHECK(with_dot.files[0].content.find("enforced") != std::string::npos);
  }

  SECTION("an impossible plan fails the verdict, not the parse") {
    doc["base"] = "chain";
    io::scenario_report bad = io::run_scenario(doc, {});
    CHECK_FALSE(bad.pass);
    CHECK(bad.doc.at("verdict") == "fail");
    CHECK(bad.doc.contains("error"));
  }

  SECTION("a horizon that cannot cover the plan is an input error") {
    doc["horizons"]["depth"] = 10;
    CHECK_THROWS_WITH(io::run_scenario(doc, {}),
                      Catch::Matchers::ContainsSubstring("stops short"));
  }
}

TEST_CASE("omega thin scenarios validate the surviving shape") {
  json doc = json::parse(R"({
    "kind": "thin",
    "label": "laver",
    "flavor": "laver",
    "base": "full-omega",
    "plan": {
      "X": {"affine": {"a": 2, "b": 0}},
      "h": {"modular": 0},
      "enforced": [0, 1, 2]
    },
    "horizons": {"depth": 4, "value_bound": 16}
  })");
  io::scenario_report rep = io::run_scenario(doc, {});
  CHECK(rep.pass);
  CHECK(rep.doc.at("detail").at("stem") == json::array());
  CHECK(rep.doc.at("detail").at("stem_children") ==
        json::array({2, 3, 4, 5, 8, 9}));

  doc["flavor"] = "miller";
  doc["label"] = "miller";
  io::scenario_report miller = io::run_scenario(doc, {});
  CHECK(miller.pass);
  CHECK_FALSE(miller.doc.at("detail").at("branching").empty());
}

TEST_CASE("silver thin scenarios report the surviving free set") {
  json doc = json::parse(R"({
    "kind": "thin",
    "label": "silver",
    "flavor": "silver",
    "condition": {"free": {"affine": {"a": 1, "b": 0}}},
    "plan": {
      "X": {"affine": {"a": 2, "b": 0}},
      "h": {"modular": 0},
      "enforced": [0, 1, 2]
    },
    "horizons": {"depth": 10}
  })");
  io::scenario_report rep = io::run_scenario(doc, {});
  CHECK(rep.pass);
  CHECK(rep.doc.at("detail").at("free_values") ==
        json::array({0, 1, 2, 3, 4, 5, 8, 9}));
}

TEST_CASE("antichain scenarios carry every pairwise certificate") {
  json doc = json::parse(R"({
    "kind": "antichain",
    "label": "four binaries",
    "X": {"affine": {"a": 2, "b": 0}},
    "inputs": ["full-binary", "full-binary", "full-binary", "full-binary"],
    "i_max": 2,
    "depth": 16
  })");
  io::scenario_report rep = io::run_scenario(doc, {});
  CHECK(rep.pass);
  CHECK(rep.doc.at("detail").at("certificates").size() == 6);
  for (const json& c : rep.doc.at("detail").at("certificates"))
    CHECK(c.at("certificate").at("passed") == true);

  doc["export"] = {{"pair", {0, 1}}, {"depth", 8}, {"dot", "pair.dot"}};
  io::scenario_report with_dot = io::run_scenario(doc, {});
  REQUIRE(with_dot.files.size() == 1);
  CHECK(with_dot.files[0].content.find("intersection 0&1") !=
        std::string::npos);

  SECTION("an input with no good family fails the verdict") {
    doc.erase("export");
    doc["inputs"][2] = "chain";
    io::scenario_report bad = io::run_scenario(doc, {});
    CHECK_FALSE(bad.pass);
    CHECK(bad.doc.at("error") ==
          "antichain_build: input 2 has no good family up to 2");
  }
}

TEST_CASE("qrun scenarios trace, validate and avoid") {
  json doc = json::parse(R"({
    "kind": "qrun",
    "label": "grow then avoid",
    "seed": {"root": "full-binary"},
    "forbidden": {"trees": ["chain"], "depth": 8},
    "schedule": [
      {"task": "ensure-compatible", "leaf": "first"},
      {"task": "avoid", "index": 0}
    ],
    "horizon": 16
  })");
  io::scenario_report rep = io::run_scenario(doc, {});
  CHECK(rep.pass);
  const json& detail = rep.doc.at("detail");
  REQUIRE(detail.at("trace").size() == 2);
  CHECK(detail.at("trace")[0].at("task") == "ensure-compatible@e");
  CHECK(detail.at("trace")[0].at("valid") == true);
  CHECK(detail.at("trace")[1].at("task") == "avoid#0");
  CHECK(detail.at("final").at("n") == 2);
  REQUIRE(detail.at("avoid_checks").size() == 1);
  CHECK(detail.at("avoid_checks")[0].at("clean") == true);

  SECTION("an aborted run keeps the completed prefix") {
    doc["forbidden"]["trees"][0] = "full-binary";
    io::scenario_report bad = io::run_scenario(doc, {});
    CHECK_FALSE(bad.pass);
    CHECK(bad.doc.at("verdict") == "fail");
    CHECK(bad.doc.at("detail").at("trace").size() == 1);
    CHECK(bad.doc.at("detail").contains("abort"));
  }

  SECTION("conditions can seed a run directly") {
    doc["seed"] = json::parse(R"({
      "n": 1,
      "F": {"width": 2, "nodes": [[], [0], [1]]},
      "side": [
        {"leaf": [0], "tree": {"cone": [0]}},
        {"leaf": [1], "tree": {"cone": [1]}}
      ]
    })");
    io::scenario_report seeded = io::run_scenario(doc, {});
    CHECK(seeded.pass);
  }
}

TEST_CASE("name scenarios stand on the built assignment") {
  json doc = json::parse(R"({
    "kind": "name",
    "label": "fan",
    "poset": {
      "elements": ["r", "q1", "q2", "q3", "q4", "q5", "q6"],
      "leq": [["r","q1"],["r","q2"],["r","q3"],["r","q4"],["r","q5"],["r","q6"]]
    },
    "antichains": [["q1", "q2", "q3", "q4", "q5", "q6"]],
    "targets": ["v1", "v2"],
    "threshold": 2
  })");
  io::scenario_report rep = io::run_scenario(doc, {});
  CHECK(rep.pass);
  const json& detail = rep.doc.at("detail");
  CHECK(detail.at("checked") == true);
  CHECK(detail.at("phi").size() == 6);
  // Maximal elements have one extension each, so the star statement cannot
  // witness them; the verdict rides on the assignment check instead.
  CHECK(detail.at("fully_witnessed") == false);
  CHECK(detail.at("witness").at("r") == 0);

  SECTION("starved assignments fail the verdict") {
    doc["poset"] = json::parse(R"({
      "elements": ["p1", "p2", "q1", "q2", "q3"],
      "leq": [["p1","q1"],["p1","q2"],["p1","q3"],
              ["p2","q1"],["p2","q2"],["p2","q3"]]
    })");
    doc["antichains"] = json::array({json::array({"q1", "q2", "q3"})});
    doc["targets"] = json::array({"v1", "v2", "v3"});
    doc["threshold"] = 3;
    io::scenario_report bad = io::run_scenario(doc, {});
    CHECK_FALSE(bad.pass);
    CHECK(bad.doc.at("error").get<std::string>().find("no fresh") !=
          std::string::npos);
  }
}

TEST_CASE("sweep scenarios tabulate window predicates") {
  json doc = json::parse(R"({
    "kind": "predicate-sweep",
    "label": "four-step scale",
    "predicate": "dominates",
    "X": {"affine": {"a": 4, "b": 0}},
    "Y": {"affine": {"a": 1, "b": 0}},
    "range": {"lo": 0, "hi": 50},
    "csv": "scale.csv"
  })");
  io::scenario_report rep = io::run_scenario(doc, {});
  CHECK(rep.pass);
  REQUIRE(rep.files.size() == 1);
  CHECK(rep.files[0].name == "scale.csv");
  CHECK(rep.files[0].content.rfind("index,verdict,count\n0,true,4\n", 0) == 0);
  CHECK(count_occurrences(rep.files[0].content, "\n") == 52);
  CHECK(count_occurrences(rep.files[0].content, "false") == 0);

  json weak = json::parse(R"({
    "kind": "predicate-sweep",
    "label": "evens never weakly dominate odds",
    "predicate": "weakly-dominates",
    "X": {"affine": {"a": 2, "b": 0}},
    "Y": {"affine": {"a": 2, "b": 1}},
    "range": {"lo": 0, "hi": 6}
  })");
  io::scenario_report wrep = io::run_scenario(weak, {});
  CHECK(wrep.pass);  // the sweep ran; the table holds the false verdicts
  for (const json& row : wrep.doc.at("detail").at("rows")) {
    CHECK(row.at("verdict") == false);
    CHECK(row.at("count") == 1);
  }

  SECTION("reports agree byte for byte across thread counts") {
    io::scenario_report serial = io::run_scenario(doc, {1, 0});
    io::scenario_report parallel = io::run_scenario(doc, {4, 0});
    json a = serial.doc;
    json b = parallel.doc;
    a.erase("timings");
    b.erase("timings");
    CHECK(a.dump() == b.dump());
    CHECK(serial.files[0].content == parallel.files[0].content);
  }
}

TEST_CASE("malformed scenarios are rejected before execution") {
  CHECK_THROWS_WITH(io::run_scenario(json::parse(R"({"label": "x"})"), {}),
                    Catch::Matchers::ContainsSubstring("missing field 'kind'"));
  CHECK_THROWS_WITH(
      io::run_scenario(json::parse(R"({"kind": "dance"})"), {}),
      Catch::Matchers::ContainsSubstring("unknown kind"));
  CHECK_THROWS_WITH(
      io::run_scenario(
          json::parse(R"({"schema": "treeforge.scenario/9", "kind": "thin"})"),
          {}),
      Catch::Matchers::ContainsSubstring("unsupported schema"));
  CHECK_THROWS_WITH(io::run_scenario(json::parse(R"({
    "kind": "predicate-sweep",
    "predicate": "dominates",
    "X": {"affine": {"a": 2, "b": 0}},
    "Y": {"affine": {"a": 1, "b": 0}},
    "range": {"lo": 5, "hi": 2}
  })"),
                                     {}),
                    Catch::Matchers::ContainsSubstring("range is empty"));
  CHECK_THROWS_WITH(io::run_scenario(json::parse(R"({
    "kind": "thin",
    "flavor": "octagonal",
    "horizons": {"depth": 4}
  })"),
                                     {}),
                    Catch::Matchers::ContainsSubstring("unknown flavor"));
  CHECK_THROWS(io::run_scenario(json(7), {}));
}
