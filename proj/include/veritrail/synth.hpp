#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "veritrail/claims.hpp"
#include "veritrail/graph.hpp"

namespace veritrail {

class SynthError : public Error {
 public:
  enum class Kind { InvalidSpec, SelfCheckFailed };

  SynthError(Kind kind, const std::string& msg) : Error(msg), kind(kind) {}

  Kind kind;
};

enum class InjectMode { Insert, DropAndReintroduce };

struct Injection {
  InjectMode mode = InjectMode::Insert;
  int stage = 2;
  std::optional<std::string> text;  // generated when unset
};

struct SynthSpec {
  enum class Shape { HierSumm, GraphRagLike };

  Shape shape = Shape::HierSumm;
  int fanout = 2;
  int depth = 3;
  int chunks = 4;
  int communities = 2;
  int facts_per_root = 2;
  std::optional<Injection> inject;
  uint64_t seed = 0;
};

struct SynthCase {
  ProcessGraph graph;
  std::vector<Claim> claims;
  std::map<std::string, Verdict> gold;
  std::map<std::string, std::set<int>> gold_stages;
};

namespace detail {

class WordMint {
 public:
  explicit WordMint(uint64_t seed) : rng_(seed) {}

  std::string fresh() {
    for (;;) {
      std::string w = "zq";
      for (int i = 0; i < 6; ++i) w.push_back(static_cast<char>('a' + rng_.below(26)));
      if (used_.insert(w).second) return w;
    }
  }

 private:
  SplitMix rng_;
  std::set<std::string> used_;
};

struct SynthDraft {
  std::map<NodeId, std::vector<std::string>> sentences;  // [0] is a filler line
  std::map<NodeId, int> stages;
  std::vector<Edge> edges;
  NodeId terminal;
  std::vector<NodeId> path;  // path[stage] = carrying node at that stage
};

inline std::string fact_sentence(WordMint& mint) {
  return "Entity " + mint.fresh() + " reported metric " + mint.fresh() + " at site " +
         mint.fresh() + ".";
}

inline std::string injected_sentence(WordMint& mint) {
  return "Finding " + mint.fresh() + " connects " + mint.fresh() + " with " + mint.fresh() +
         ".";
}

inline bool sentence_planted(const std::string& text, const std::string& sentence) {
  for (const auto& w : tokenize(sentence))
    if (w.size() >= 4 && !contains_ci(text, w)) return false;
  return true;
}

inline std::string join_sentences(const std::vector<std::string>& sentences) {
  std::string out;
  for (const auto& s : sentences) {
    if (!out.empty()) out += " ";
    out += s;
  }
  return out;
}

// stages 1..depth; fanout children collapse into one parent per group
inline SynthDraft hier_summ_draft(const SynthSpec& spec, SplitMix& rng, WordMint& mint) {
  SynthDraft d;
  int levels = spec.depth;
  std::vector<long> widths(static_cast<size_t>(levels) + 1, 0);
  long width = 1;
  for (int stage = levels; stage >= 1; --stage) {
    widths[static_cast<size_t>(stage)] = width;
    width *= spec.fanout;
  }

  std::vector<std::vector<NodeId>> by_stage(static_cast<size_t>(levels) + 1);
  for (int stage = 1; stage <= levels; ++stage) {
    for (long i = 0; i < widths[static_cast<size_t>(stage)]; ++i) {
      NodeId id = "s" + std::to_string(stage) + "n" + std::to_string(i);
      by_stage[static_cast<size_t>(stage)].push_back(id);
      d.stages[id] = stage;
      d.sentences[id] = {"Node " + id + " compiles routine material."};
      if (stage > 1)
        for (int c = 0; c < spec.fanout; ++c)
          d.edges.emplace_back(
              by_stage[static_cast<size_t>(stage - 1)][static_cast<size_t>(i * spec.fanout + c)],
              id);
    }
  }
  d.terminal = by_stage[static_cast<size_t>(levels)][0];

  std::map<NodeId, NodeId> parent;
  for (const auto& [u, v] : d.edges) parent[u] = v;
  for (const auto& root : by_stage[1]) {
    for (int f = 0; f < spec.facts_per_root; ++f) {
      std::string fact = fact_sentence(mint);
      NodeId cur = root;
      for (;;) {
        d.sentences[cur].push_back(fact);
        auto it = parent.find(cur);
        if (it == parent.end()) break;
        cur = it->second;
      }
    }
  }

  d.path.assign(static_cast<size_t>(levels) + 1, NodeId{});
  d.path[static_cast<size_t>(levels)] = d.terminal;
  std::map<NodeId, std::vector<NodeId>> sources;
  for (const auto& [u, v] : d.edges) sources[v].push_back(u);
  for (int stage = levels - 1; stage >= 1; --stage) {
    const auto& srcs = sources.at(d.path[static_cast<size_t>(stage) + 1]);
    d.path[static_cast<size_t>(stage)] = srcs[rng.below(srcs.size())];
  }
  return d;
}

// explicit six-stage pipeline: chunks, entity descriptions, summarized
// descriptions, community reports, map answers, final answer
inline SynthDraft graph_rag_draft(const SynthSpec& spec, SplitMix& rng, WordMint& mint) {
  SynthDraft d;
  std::vector<NodeId> summaries, reports, maps;
  std::map<NodeId, std::vector<NodeId>> sources;
  auto add_edge = [&](const NodeId& u, const NodeId& v) {
    d.edges.emplace_back(u, v);
    sources[v].push_back(u);
  };
  auto add_node = [&](const NodeId& id, int stage) {
    d.stages[id] = stage;
    d.sentences[id] = {"Node " + id + " compiles routine material."};
  };
  auto facts_of = [&](const NodeId& id) {
    std::vector<std::string> out(d.sentences.at(id).begin() + 1, d.sentences.at(id).end());
    return out;
  };

  for (int i = 0; i < spec.chunks; ++i) {
    NodeId chunk = "chunk" + std::to_string(i);
    add_node(chunk, 1);

    std::vector<std::vector<std::string>> halves(2);
    for (int f = 0; f < spec.facts_per_root; ++f) {
      std::string fact = fact_sentence(mint);
      d.sentences[chunk].push_back(fact);
      halves[static_cast<size_t>(f % 2)].push_back(fact);
    }

    NodeId summary = "summ" + std::to_string(i);
    add_node(summary, 3);
    summaries.push_back(summary);
    for (int e = 0; e < 2; ++e) {
      NodeId entity = "ent" + std::to_string(i) + "_" + std::to_string(e);
      add_node(entity, 2);
      for (const auto& fact : halves[static_cast<size_t>(e)]) {
        d.sentences[entity].push_back(fact);
        d.sentences[summary].push_back(fact);
      }
      add_edge(chunk, entity);
      add_edge(entity, summary);
    }
  }

  for (int j = 0; j < spec.communities; ++j) {
    NodeId report = "report" + std::to_string(j);
    add_node(report, 4);
    reports.push_back(report);
  }
  for (size_t i = 0; i < summaries.size(); ++i) {
    const NodeId& report = reports[i % reports.size()];
    add_edge(summaries[i], report);
    for (const auto& fact : facts_of(summaries[i])) d.sentences[report].push_back(fact);
  }

  int map_count = spec.communities >= 2 ? 2 : 1;
  for (int k = 0; k < map_count; ++k) {
    NodeId map_node = "map" + std::to_string(k);
    add_node(map_node, 5);
    maps.push_back(map_node);
  }
  for (size_t j = 0; j < reports.size(); ++j) {
    const NodeId& map_node = maps[j % maps.size()];
    add_edge(reports[j], map_node);
    for (const auto& fact : facts_of(reports[j])) d.sentences[map_node].push_back(fact);
  }

  d.terminal = "final";
  add_node(d.terminal, 6);
  for (const auto& map_node : maps) {
    add_edge(map_node, d.terminal);
    for (const auto& fact : facts_of(map_node)) d.sentences[d.terminal].push_back(fact);
  }

  d.path.assign(7, NodeId{});
  d.path[6] = d.terminal;
  for (int stage = 5; stage >= 1; --stage) {
    const auto& srcs = sources.at(d.path[static_cast<size_t>(stage) + 1]);
    d.path[static_cast<size_t>(stage)] = srcs[rng.below(srcs.size())];
  }
  return d;
}

}  // namespace detail

// Builds a seeded synthetic verification case. Facts propagate verbatim from
// roots to the terminal; the optional injection plants a claim that is either
// unsupported below `stage` (Insert) or supported by a root but omitted from
// the stages between the root and `stage` (DropAndReintroduce).
inline SynthCase generate_case(const SynthSpec& spec) {
  if (spec.facts_per_root < 1)
    throw SynthError(SynthError::Kind::InvalidSpec, "facts_per_root must be >= 1");
  if (spec.shape == SynthSpec::Shape::HierSumm) {
    if (spec.depth < 2 || spec.fanout < 1)
      throw SynthError(SynthError::Kind::InvalidSpec,
                       "hierarchical shape needs depth >= 2 and fanout >= 1");
  } else if (spec.chunks < 1 || spec.communities < 1 || spec.communities > spec.chunks) {
    throw SynthError(SynthError::Kind::InvalidSpec,
                     "graph-rag shape needs chunks >= communities >= 1");
  }

  SplitMix rng(mix64(spec.seed ^ 0x7e46a0c1b39dull));
  detail::WordMint mint(rng.next());
  detail::SynthDraft draft = spec.shape == SynthSpec::Shape::HierSumm
                                 ? detail::hier_summ_draft(spec, rng, mint)
                                 : detail::graph_rag_draft(spec, rng, mint);
  int terminal_stage = draft.stages.at(draft.terminal);

  std::string injected;
  if (spec.inject) {
    int s = spec.inject->stage;
    if (s < 2 || s > terminal_stage)
      throw SynthError(SynthError::Kind::InvalidSpec,
                       "injection stage must lie in [2, terminal stage]");
    if (spec.inject->mode == InjectMode::DropAndReintroduce && s < 3)
      throw SynthError(SynthError::Kind::InvalidSpec,
                       "drop-and-reintroduce needs at least one omitted stage (stage >= 3)");
    injected = spec.inject->text ? *spec.inject->text : detail::injected_sentence(mint);
    if (trim(injected).empty())
      throw SynthError(SynthError::Kind::InvalidSpec, "injected claim text must be non-empty");
    if (spec.inject->mode == InjectMode::DropAndReintroduce)
      draft.sentences[draft.path[1]].push_back(injected);
    for (int stage = s; stage <= terminal_stage; ++stage)
      draft.sentences[draft.path[static_cast<size_t>(stage)]].push_back(injected);
  }

  std::vector<GenNode> nodes;
  for (const auto& [id, sentences] : draft.sentences) {
    GenNode n;
    n.id = id;
    n.stage = draft.stages.at(id);
    n.text = detail::join_sentences(sentences);
    nodes.push_back(std::move(n));
  }

  SynthCase out{build_graph(std::move(nodes), draft.edges, draft.terminal), {}, {}, {}};

  // faithful claims: the first fact of the carrying path's root plus the
  // first fact of one other root, when the shape has one
  std::vector<std::string> faithful;
  faithful.push_back(draft.sentences.at(draft.path[1])[1]);
  for (const auto& [id, stage] : draft.stages) {
    if (stage != 1 || id == draft.path[1]) continue;
    faithful.push_back(draft.sentences.at(id)[1]);
    break;
  }
  int cnum = 1;
  for (const auto& text : faithful) {
    std::string id = "c" + std::to_string(cnum++);
    out.claims.push_back({id, text});
    out.gold[id] = Verdict::FullySupported;
  }

  if (spec.inject) {
    out.claims.push_back({"x1", injected});
    if (spec.inject->mode == InjectMode::Insert) {
      out.gold["x1"] = Verdict::NotFullySupported;
      out.gold_stages["x1"] = {spec.inject->stage};
    } else {
      out.gold["x1"] = Verdict::FullySupported;
    }

    std::set<NodeId> carriers;
    for (int stage = spec.inject->stage; stage <= terminal_stage; ++stage)
      carriers.insert(draft.path[static_cast<size_t>(stage)]);
    if (spec.inject->mode == InjectMode::DropAndReintroduce) carriers.insert(draft.path[1]);
    for (const auto& [id, node] : out.graph.nodes()) {
      bool planted = detail::sentence_planted(node.text, injected);
      if (planted != (carriers.count(id) != 0))
        throw SynthError(SynthError::Kind::SelfCheckFailed,
                         "planted sentence leaked into node '" + id + "'");
    }
    for (const auto& u : out.graph.src(draft.path[static_cast<size_t>(spec.inject->stage)]))
      if (detail::sentence_planted(out.graph.node(u).text, injected))
        throw SynthError(SynthError::Kind::SelfCheckFailed,
                         "a source of the injection point already carries the planted fact");
  }
  return out;
}

}  // namespace veritrail
