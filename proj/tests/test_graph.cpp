#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "support/random_graphs.hpp"
#include "veritrail/graph.hpp"

using veritrail::Edge;
using veritrail::GenNode;
using veritrail::GraphError;
using veritrail::NodeId;
using veritrail::ProcessGraph;
using veritrail::StagePolicy;
using veritrail::build_graph;

namespace {

GenNode n(const std::string& id, int stage, const std::string& text = "Some text.") {
  return GenNode{id, text, stage};
}

// the figure-1 shape: six chunks, three summaries, two merge nodes, one final
ProcessGraph figure_graph() {
  std::vector<GenNode> nodes;
  for (int i = 1; i <= 6; ++i) nodes.push_back(n(std::to_string(i), 1));
  for (int i = 7; i <= 9; ++i) nodes.push_back(n(std::to_string(i), 2));
  nodes.push_back(n("10", 3));
  nodes.push_back(n("11", 3));
  nodes.push_back(n("12", 4));
  std::vector<Edge> edges = {{"1", "7"},  {"2", "7"},  {"3", "8"},  {"4", "8"},
                             {"5", "9"},  {"6", "9"},  {"7", "10"}, {"8", "10"},
                             {"9", "11"}, {"10", "12"}, {"11", "12"}};
  return build_graph(std::move(nodes), std::move(edges), "12");
}

}  // namespace

TEST_CASE("figure-shaped graph builds with the expected structure") {
  ProcessGraph g = figure_graph();
  CHECK(g.size() == 12);
  CHECK(g.terminal() == "12");
  CHECK(g.src("12") == std::set<NodeId>{"10", "11"});
  CHECK(g.src("10") == std::set<NodeId>{"7", "8"});
  CHECK(g.src("1") == std::set<NodeId>{});
  CHECK(g.roots() == std::set<NodeId>{"1", "2", "3", "4", "5", "6"});
  CHECK(g.is_root("3"));
  CHECK_FALSE(g.is_root("7"));
  CHECK(g.reachable_roots("10") == std::set<NodeId>{"1", "2", "3", "4"});
  CHECK(g.reachable_roots("11") == std::set<NodeId>{"5", "6"});
  CHECK(g.reachable_roots("12") == std::set<NodeId>{"1", "2", "3", "4", "5", "6"});
  CHECK(g.reachable_roots("2") == std::set<NodeId>{"2"});
  CHECK(g.warnings().empty());
  CHECK(g.contains("9"));
  CHECK_FALSE(g.contains("13"));
  CHECK_THROWS_AS(g.node("13"), GraphError);
  CHECK_THROWS_AS(g.src("13"), GraphError);
}

TEST_CASE("cycle detection names one cycle") {
  std::vector<GenNode> nodes = {n("a", 1), n("b", 2), n("c", 3)};
  std::vector<Edge> edges = {{"a", "b"}, {"b", "c"}, {"c", "a"}};
  try {
    build_graph(std::move(nodes), std::move(edges), "c");
    FAIL("expected a cycle error");
  } catch (const GraphError& e) {
    CHECK(e.kind == GraphError::Kind::CycleDetected);
    CHECK(std::string(e.what()).find("a -> b -> c -> a") != std::string::npos);
  }
}

TEST_CASE("self loop is reported as a cycle") {
  std::vector<GenNode> nodes = {n("r", 1), n("x", 2)};
  std::vector<Edge> edges = {{"r", "x"}, {"x", "x"}};
  try {
    build_graph(std::move(nodes), std::move(edges), "x");
    FAIL("expected a cycle error");
  } catch (const GraphError& e) {
    CHECK(e.kind == GraphError::Kind::CycleDetected);
    CHECK(std::string(e.what()).find("x -> x") != std::string::npos);
  }
}

TEST_CASE("cycle with a downstream sink still names the loop") {
  // d hangs off the cycle; the walk must not wander onto it
  std::vector<GenNode> nodes = {n("a", 1), n("b", 2), n("d", 3)};
  std::vector<Edge> edges = {{"a", "b"}, {"b", "a"}, {"b", "d"}};
  try {
    build_graph(std::move(nodes), std::move(edges), "d");
    FAIL("expected a cycle error");
  } catch (const GraphError& e) {
    CHECK(e.kind == GraphError::Kind::CycleDetected);
    std::string msg = e.what();
    bool named = msg.find("a -> b -> a") != std::string::npos ||
                 msg.find("b -> a -> b") != std::string::npos;
    CHECK(named);
  }
}

TEST_CASE("construction rejects malformed inputs") {
  SECTION("dangling edge endpoint") {
    std::vector<GenNode> nodes = {n("a", 1), n("t", 2)};
    std::vector<Edge> edges = {{"a", "t"}, {"ghost", "t"}};
    try {
      build_graph(std::move(nodes), std::move(edges), "t");
      FAIL("expected an error");
    } catch (const GraphError& e) {
      CHECK(e.kind == GraphError::Kind::DanglingEdgeEndpoint);
    }
  }
  SECTION("duplicate node id") {
    std::vector<GenNode> nodes = {n("a", 1), n("a", 1), n("t", 2)};
    try {
      build_graph(std::move(nodes), {{"a", "t"}}, "t");
      FAIL("expected an error");
    } catch (const GraphError& e) {
      CHECK(e.kind == GraphError::Kind::DuplicateNodeId);
    }
  }
  SECTION("empty node id") {
    std::vector<GenNode> nodes = {n("", 1), n("t", 2)};
    try {
      build_graph(std::move(nodes), {}, "t");
      FAIL("expected an error");
    } catch (const GraphError& e) {
      CHECK(e.kind == GraphError::Kind::InvalidNodeId);
    }
  }
  SECTION("whitespace in node id") {
    std::vector<GenNode> nodes = {n("a b", 1), n("t", 2)};
    try {
      build_graph(std::move(nodes), {{"a b", "t"}}, "t");
      FAIL("expected an error");
    } catch (const GraphError& e) {
      CHECK(e.kind == GraphError::Kind::InvalidNodeId);
    }
  }
  SECTION("unknown terminal") {
    std::vector<GenNode> nodes = {n("a", 1)};
    try {
      build_graph(std::move(nodes), {}, "zz");
      FAIL("expected an error");
    } catch (const GraphError& e) {
      CHECK(e.kind == GraphError::Kind::UnknownNode);
    }
  }
  SECTION("terminal with outgoing edges") {
    std::vector<GenNode> nodes = {n("a", 1), n("t", 2), n("u", 3)};
    std::vector<Edge> edges = {{"a", "t"}, {"t", "u"}};
    try {
      build_graph(std::move(nodes), std::move(edges), "t");
      FAIL("expected an error");
    } catch (const GraphError& e) {
      CHECK(e.kind == GraphError::Kind::TerminalHasOutgoingEdge);
    }
  }
  SECTION("stage not increasing along an edge") {
    std::vector<GenNode> nodes = {n("a", 2), n("t", 2)};
    try {
      build_graph(std::move(nodes), {{"a", "t"}}, "t");
      FAIL("expected an error");
    } catch (const GraphError& e) {
      CHECK(e.kind == GraphError::Kind::StageViolation);
    }
  }
}

TEST_CASE("non-terminal sinks and disconnected parts produce warnings") {
  std::vector<GenNode> nodes = {n("r", 1), n("t", 2), n("orphan", 1)};
  ProcessGraph g = build_graph(std::move(nodes), {{"r", "t"}}, "t");
  REQUIRE(g.warnings().size() == 2);
  CHECK(g.warnings()[0].find("orphan") != std::string::npos);
  CHECK(g.warnings()[1].find("component") != std::string::npos);
}

TEST_CASE("longest-path stages count the deepest route") {
  // r -> a -> b -> t with shortcuts r -> b and a -> t
  std::vector<GenNode> nodes = {n("r", 0), n("a", 0), n("b", 0), n("t", 0)};
  std::vector<Edge> edges = {{"r", "a"}, {"r", "b"}, {"a", "b"}, {"a", "t"}, {"b", "t"}};
  auto stages = veritrail::assign_stages(nodes, edges, StagePolicy::LongestPath);
  CHECK(stages.at("r") == 1);
  CHECK(stages.at("a") == 2);
  CHECK(stages.at("b") == 3);
  CHECK(stages.at("t") == 4);
}

TEST_CASE("explicit stages are honored and validated") {
  std::vector<GenNode> nodes = {n("r", 0), n("t", 0)};
  std::vector<Edge> edges = {{"r", "t"}};
  SECTION("valid map") {
    auto stages =
        veritrail::assign_stages(nodes, edges, StagePolicy::Explicit, {{"r", 3}, {"t", 9}});
    CHECK(stages.at("r") == 3);
    CHECK(stages.at("t") == 9);
  }
  SECTION("incomplete map") {
    try {
      veritrail::assign_stages(nodes, edges, StagePolicy::Explicit, {{"r", 1}});
      FAIL("expected an error");
    } catch (const GraphError& e) {
      CHECK(e.kind == GraphError::Kind::ExplicitMapIncomplete);
    }
  }
  SECTION("non-monotone map") {
    try {
      veritrail::assign_stages(nodes, edges, StagePolicy::Explicit, {{"r", 2}, {"t", 2}});
      FAIL("expected an error");
    } catch (const GraphError& e) {
      CHECK(e.kind == GraphError::Kind::ExplicitMapViolatesMonotonicity);
    }
  }
}

TEST_CASE("reachable_roots matches a brute-force forward search") {
  for (uint64_t seed = 1; seed <= 50; ++seed) {
    ProcessGraph g = testutil::random_dag(seed, 12, 4);
    std::map<NodeId, std::set<NodeId>> forward;
    for (const auto& [u, v] : g.edges()) forward[u].insert(v);
    auto reaches = [&](const NodeId& from, const NodeId& to) {
      std::set<NodeId> seen{from};
      std::vector<NodeId> stack{from};
      while (!stack.empty()) {
        NodeId u = stack.back();
        stack.pop_back();
        if (u == to) return true;
        for (const auto& v : forward[u])
          if (seen.insert(v).second) stack.push_back(v);
      }
      return false;
    };
    for (const auto& [id, node] : g.nodes()) {
      std::set<NodeId> expect;
      for (const auto& r : g.roots())
        if (reaches(r, id)) expect.insert(r);
      INFO("seed " << seed << " node " << id);
      CHECK(g.reachable_roots(id) == expect);
    }
  }
}

TEST_CASE("random graphs satisfy the structural invariants") {
  for (uint64_t seed = 100; seed < 200; ++seed) {
    ProcessGraph g = testutil::random_dag(seed);
    INFO("seed " << seed);
    REQUIRE(g.size() >= 2);
    CHECK_FALSE(g.roots().empty());
    for (const auto& [u, v] : g.edges()) {
      CHECK(g.node(u).stage < g.node(v).stage);
      CHECK(g.src(v).count(u) == 1);
    }
    for (const auto& r : g.roots()) CHECK(g.src(r).empty());
    // the terminal never feeds anything
    for (const auto& [u, v] : g.edges()) CHECK(u != g.terminal());
  }
}

TEST_CASE("json round trip preserves the graph") {
  ProcessGraph g = figure_graph();
  nlohmann::ordered_json j = veritrail::graph_to_json(g);
  ProcessGraph back = veritrail::graph_from_json(j);
  CHECK(back.terminal() == g.terminal());
  CHECK(back.size() == g.size());
  for (const auto& [id, node] : g.nodes()) {
    CHECK(back.node(id).text == node.text);
    CHECK(back.node(id).stage == node.stage);
  }
  auto e1 = g.edges();
  auto e2 = back.edges();
  std::sort(e1.begin(), e1.end());
  std::sort(e2.begin(), e2.end());
  CHECK(e1 == e2);
}

TEST_CASE("json without stages falls back to longest-path assignment") {
  nlohmann::json j;
  j["terminal"] = "t";
  j["nodes"] = {{{"id", "r"}, {"text", "Root."}},
                {{"id", "a"}, {"text", "Mid."}},
                {{"id", "b"}, {"text", "Mid too."}},
                {{"id", "t"}, {"text", "End."}}};
  j["edges"] = nlohmann::json::array();
  for (auto [u, v] : {std::pair<const char*, const char*>{"r", "a"},
                      {"r", "b"},
                      {"a", "b"},
                      {"a", "t"},
                      {"b", "t"}})
    j["edges"].push_back({u, v});
  ProcessGraph g = veritrail::graph_from_json(j);
  CHECK(g.node("r").stage == 1);
  CHECK(g.node("a").stage == 2);
  CHECK(g.node("b").stage == 3);
  CHECK(g.node("t").stage == 4);
}

TEST_CASE("json with any stage missing recomputes all stages") {
  nlohmann::json j;
  j["terminal"] = "t";
  j["nodes"] = {{{"id", "r"}, {"text", "Root."}, {"stage", 5}},
                {{"id", "t"}, {"text", "End."}}};
  j["edges"] = nlohmann::json::array();
  j["edges"].push_back({"r", "t"});
  ProcessGraph g = veritrail::graph_from_json(j);
  CHECK(g.node("r").stage == 1);
  CHECK(g.node("t").stage == 2);
}

TEST_CASE("malformed graph json is rejected") {
  SECTION("missing keys") {
    try {
      veritrail::graph_from_json(nlohmann::json{{"nodes", nlohmann::json::array()}});
      FAIL("expected an error");
    } catch (const GraphError& e) {
      CHECK(e.kind == GraphError::Kind::BadFormat);
    }
  }
  SECTION("non-object") {
    try {
      veritrail::graph_from_json(nlohmann::json::array());
      FAIL("expected an error");
    } catch (const GraphError& e) {
      CHECK(e.kind == GraphError::Kind::BadFormat);
    }
  }
}
