#include <catch2/catch_amalgamated.hpp>

#include <set>
#include <string>
#include <vector>

#include "veritrail/synth.hpp"

using veritrail::InjectMode;
using veritrail::Injection;
using veritrail::SynthCase;
using veritrail::SynthError;
using veritrail::SynthSpec;
using veritrail::Verdict;

namespace {

SynthSpec hier(int fanout, int depth, int facts = 2, uint64_t seed = 0) {
  SynthSpec s;
  s.shape = SynthSpec::Shape::HierSumm;
  s.fanout = fanout;
  s.depth = depth;
  s.facts_per_root = facts;
  s.seed = seed;
  return s;
}

SynthSpec graphlike(int chunks, int communities, int facts = 2, uint64_t seed = 0) {
  SynthSpec s;
  s.shape = SynthSpec::Shape::GraphRagLike;
  s.chunks = chunks;
  s.communities = communities;
  s.facts_per_root = facts;
  s.seed = seed;
  return s;
}

long count_planted(const SynthCase& sc, const std::string& sentence) {
  long n = 0;
  for (const auto& [id, node] : sc.graph.nodes())
    if (node.text.find(sentence) != std::string::npos) ++n;
  return n;
}

SynthError::Kind kind_of(const SynthSpec& spec) {
  try {
    veritrail::generate_case(spec);
    FAIL("expected an error");
  } catch (const SynthError& e) {
    return e.kind;
  }
  return SynthError::Kind::InvalidSpec;
}

}  // namespace

TEST_CASE("the hierarchical shape is a complete collapse tree") {
  SynthCase sc = veritrail::generate_case(hier(3, 3));
  CHECK(sc.graph.nodes().size() == 13);  // 9 + 3 + 1
  CHECK(sc.graph.terminal() == "s3n0");
  CHECK(sc.graph.node("s3n0").stage == 3);

  std::set<veritrail::NodeId> want_roots;
  for (int i = 0; i < 9; ++i) want_roots.insert("s1n" + std::to_string(i));
  CHECK(sc.graph.roots() == want_roots);
  for (const auto& r : want_roots) CHECK(sc.graph.node(r).stage == 1);

  CHECK(sc.graph.src("s2n1") ==
        std::set<veritrail::NodeId>{"s1n3", "s1n4", "s1n5"});
  CHECK(sc.graph.src("s3n0") == std::set<veritrail::NodeId>{"s2n0", "s2n1", "s2n2"});

  SECTION("every root fact reaches the terminal verbatim") {
    const std::string& final_text = sc.graph.node("s3n0").text;
    for (const auto& r : want_roots) {
      const std::string& text = sc.graph.node(r).text;
      size_t dot = text.find("material. ");
      REQUIRE(dot != std::string::npos);
      std::string facts = text.substr(dot + 10);
      CHECK(final_text.find(facts) != std::string::npos);
    }
  }
  SECTION("filler lines stay on their own node") {
    CHECK(sc.graph.node("s2n0").text.find("Node s2n0 compiles") == 0);
    CHECK(sc.graph.node("s3n0").text.find("Node s2n0 compiles") == std::string::npos);
  }
}

TEST_CASE("the graph-rag shape runs six stages from chunks to a final answer") {
  SynthCase sc = veritrail::generate_case(graphlike(4, 2));
  CHECK(sc.graph.nodes().size() == 21);  // 4 + 8 + 4 + 2 + 2 + 1
  CHECK(sc.graph.terminal() == "final");
  CHECK(sc.graph.node("final").stage == 6);

  std::set<veritrail::NodeId> want_roots = {"chunk0", "chunk1", "chunk2", "chunk3"};
  CHECK(sc.graph.roots() == want_roots);

  CHECK(sc.graph.node("ent2_1").stage == 2);
  CHECK(sc.graph.node("summ3").stage == 3);
  CHECK(sc.graph.node("report1").stage == 4);
  CHECK(sc.graph.node("map0").stage == 5);

  CHECK(sc.graph.src("ent0_0") == std::set<veritrail::NodeId>{"chunk0"});
  CHECK(sc.graph.src("summ0") == std::set<veritrail::NodeId>{"ent0_0", "ent0_1"});
  CHECK(sc.graph.src("report0") == std::set<veritrail::NodeId>{"summ0", "summ2"});
  CHECK(sc.graph.src("report1") == std::set<veritrail::NodeId>{"summ1", "summ3"});
  CHECK(sc.graph.src("map1") == std::set<veritrail::NodeId>{"report1"});
  CHECK(sc.graph.src("final") == std::set<veritrail::NodeId>{"map0", "map1"});

  SECTION("a single community collapses the fan-in") {
    SynthCase one = veritrail::generate_case(graphlike(3, 1));
    CHECK(one.graph.nodes().size() == 15);  // 3 + 6 + 3 + 1 + 1 + 1
    CHECK(one.graph.src("report0") ==
          std::set<veritrail::NodeId>{"summ0", "summ1", "summ2"});
    CHECK(one.graph.src("final") == std::set<veritrail::NodeId>{"map0"});
  }
}

TEST_CASE("uninjected cases carry two faithful claims") {
  SynthCase sc = veritrail::generate_case(hier(2, 3, 2, 5));
  REQUIRE(sc.claims.size() == 2);
  CHECK(sc.claims[0].id == "c1");
  CHECK(sc.claims[1].id == "c2");
  CHECK(sc.gold.at("c1") == Verdict::FullySupported);
  CHECK(sc.gold.at("c2") == Verdict::FullySupported);
  CHECK(sc.gold_stages.empty());
  CHECK(sc.claims[0].text != sc.claims[1].text);

  // both claims are root facts and survive into the terminal
  for (const auto& c : sc.claims) {
    CHECK(sc.graph.node(sc.graph.terminal()).text.find(c.text) != std::string::npos);
    long roots_with = 0;
    for (const auto& r : sc.graph.roots())
      if (sc.graph.node(r).text.find(c.text) != std::string::npos) ++roots_with;
    CHECK(roots_with == 1);
  }
}

TEST_CASE("an inserted claim is gold-unsupported with a pinned stage") {
  SynthSpec spec = hier(2, 4, 2, 7);
  spec.inject = Injection{InjectMode::Insert, 3, std::nullopt};
  SynthCase sc = veritrail::generate_case(spec);

  REQUIRE(sc.claims.size() == 3);
  CHECK(sc.claims.back().id == "x1");
  CHECK(sc.gold.at("x1") == Verdict::NotFullySupported);
  CHECK(sc.gold_stages.at("x1") == std::set<int>{3});
  CHECK(sc.gold.at("c1") == Verdict::FullySupported);

  // planted on one node per stage from the injection point to the terminal
  const std::string& planted = sc.claims.back().text;
  CHECK(count_planted(sc, planted) == 2);  // stages 3 and 4
  for (const auto& r : sc.graph.roots())
    CHECK(sc.graph.node(r).text.find(planted) == std::string::npos);
  CHECK(sc.graph.node(sc.graph.terminal()).text.find(planted) != std::string::npos);

  SECTION("insertion at the terminal stage is allowed") {
    SynthSpec at_top = hier(2, 3, 2, 9);
    at_top.inject = Injection{InjectMode::Insert, 3, std::nullopt};
    SynthCase top = veritrail::generate_case(at_top);
    CHECK(top.gold_stages.at("x1") == std::set<int>{3});
    CHECK(count_planted(top, top.claims.back().text) == 1);
  }
}

TEST_CASE("a dropped claim is gold-supported with no pinned stage") {
  SynthSpec spec = hier(2, 4, 2, 11);
  spec.inject = Injection{InjectMode::DropAndReintroduce, 3, std::nullopt};
  SynthCase sc = veritrail::generate_case(spec);

  REQUIRE(sc.claims.size() == 3);
  CHECK(sc.gold.at("x1") == Verdict::FullySupported);
  CHECK(sc.gold_stages.count("x1") == 0);

  // present in exactly one root, absent across the gap, back from the
  // reintroduction stage onward
  const std::string& planted = sc.claims.back().text;
  long roots_with = 0;
  for (const auto& r : sc.graph.roots())
    if (sc.graph.node(r).text.find(planted) != std::string::npos) ++roots_with;
  CHECK(roots_with == 1);
  CHECK(count_planted(sc, planted) == 3);  // root + stages 3 and 4
  for (const auto& [id, node] : sc.graph.nodes())
    if (node.stage == 2) CHECK(node.text.find(planted) == std::string::npos);
}

TEST_CASE("injection works on the graph-rag shape too") {
  SynthSpec spec = graphlike(4, 2, 2, 3);
  spec.inject = Injection{InjectMode::Insert, 5, std::nullopt};
  SynthCase sc = veritrail::generate_case(spec);
  CHECK(sc.gold_stages.at("x1") == std::set<int>{5});
  CHECK(count_planted(sc, sc.claims.back().text) == 2);  // one map node and final
}

TEST_CASE("the injected text can be supplied verbatim") {
  SynthSpec spec = hier(2, 3, 2, 1);
  spec.inject = Injection{InjectMode::Insert, 2, std::string("Quux zebra linked delta gamma.")};
  SynthCase sc = veritrail::generate_case(spec);
  CHECK(sc.claims.back().text == "Quux zebra linked delta gamma.");
  CHECK(count_planted(sc, "Quux zebra linked delta gamma.") == 2);
}

TEST_CASE("generation is a pure function of the spec") {
  SynthSpec spec = hier(2, 4, 3, 0xfeedull);
  spec.inject = Injection{InjectMode::Insert, 2, std::nullopt};
  SynthCase a = veritrail::generate_case(spec);
  SynthCase b = veritrail::generate_case(spec);
  CHECK(veritrail::graph_to_json(a.graph).dump() == veritrail::graph_to_json(b.graph).dump());
  REQUIRE(a.claims.size() == b.claims.size());
  for (size_t i = 0; i < a.claims.size(); ++i) {
    CHECK(a.claims[i].id == b.claims[i].id);
    CHECK(a.claims[i].text == b.claims[i].text);
  }
  CHECK(a.gold == b.gold);
  CHECK(a.gold_stages == b.gold_stages);

  SynthSpec other = spec;
  other.seed = 0xfee5ull;
  SynthCase c = veritrail::generate_case(other);
  CHECK(veritrail::graph_to_json(a.graph).dump() != veritrail::graph_to_json(c.graph).dump());
}

TEST_CASE("invalid specs are rejected up front") {
  CHECK(kind_of(hier(2, 3, 0)) == SynthError::Kind::InvalidSpec);
  CHECK(kind_of(hier(2, 1)) == SynthError::Kind::InvalidSpec);
  CHECK(kind_of(hier(0, 3)) == SynthError::Kind::InvalidSpec);
  CHECK(kind_of(graphlike(0, 1)) == SynthError::Kind::InvalidSpec);
  CHECK(kind_of(graphlike(2, 0)) == SynthError::Kind::InvalidSpec);
  CHECK(kind_of(graphlike(2, 3)) == SynthError::Kind::InvalidSpec);

  SECTION("injection bounds") {
    SynthSpec low = hier(2, 3);
    low.inject = Injection{InjectMode::Insert, 1, std::nullopt};
    CHECK(kind_of(low) == SynthError::Kind::InvalidSpec);

    SynthSpec high = hier(2, 3);
    high.inject = Injection{InjectMode::Insert, 4, std::nullopt};
    CHECK(kind_of(high) == SynthError::Kind::InvalidSpec);

    SynthSpec drop_low = hier(2, 3);
    drop_low.inject = Injection{InjectMode::DropAndReintroduce, 2, std::nullopt};
    CHECK(kind_of(drop_low) == SynthError::Kind::InvalidSpec);

    SynthSpec blank = hier(2, 3);
    blank.inject = Injection{InjectMode::Insert, 2, std::string("   ")};
    try {
      veritrail::generate_case(blank);
      FAIL("expected an error");
    } catch (const SynthError& e) {
      CHECK(e.kind == SynthError::Kind::InvalidSpec);
      CHECK(std::string(e.what()).find("injected claim text must be non-empty") !=
            std::string::npos);
    }
  }
}

TEST_CASE("a planted sentence that leaks fails the self check") {
  SynthSpec spec = hier(2, 3, 2, 4);
  spec.inject = Injection{InjectMode::Insert, 2,
                          std::string("Node s1n0 compiles routine material.")};
  CHECK(kind_of(spec) == SynthError::Kind::SelfCheckFailed);
}
