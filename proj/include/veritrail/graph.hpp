#pragma once

#include <algorithm>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "veritrail/common.hpp"

namespace veritrail {

using NodeId = std::string;
using Edge = std::pair<NodeId, NodeId>;

class GraphError : public Error {
 public:
  enum class Kind {
    CycleDetected,
    TerminalHasOutgoingEdge,
    DanglingEdgeEndpoint,
    StageViolation,
    EmptyRootSet,
    DuplicateNodeId,
    UnknownNode,
    InvalidNodeId,
    ExplicitMapIncomplete,
    ExplicitMapViolatesMonotonicity,
    BadFormat,
  };

  GraphError(Kind kind, const std::string& msg) : Error(msg), kind(kind) {}

  Kind kind;
};

struct GenNode {
  NodeId id;
  std::string text;
  int stage = 0;
};

enum class StagePolicy { LongestPath, Explicit };

namespace detail {

inline void check_node_id(const NodeId& id) {
  if (id.empty())
    throw GraphError(GraphError::Kind::InvalidNodeId, "node id must be non-empty");
  for (char c : id)
    if (std::isspace(static_cast<unsigned char>(c)))
      throw GraphError(GraphError::Kind::InvalidNodeId,
                       "node id must not contain whitespace: '" + id + "'");
}

// Kahn topological order over the given adjacency; throws on cycle.
inline std::vector<NodeId> topo_order(const std::set<NodeId>& ids,
                                      const std::map<NodeId, std::set<NodeId>>& out,
                                      const std::map<NodeId, std::set<NodeId>>& in) {
  std::map<NodeId, size_t> indeg;
  for (const auto& id : ids) {
    auto it = in.find(id);
    indeg[id] = it == in.end() ? 0 : it->second.size();
  }
  std::deque<NodeId> ready;
  for (const auto& [id, d] : indeg)
    if (d == 0) ready.push_back(id);
  std::vector<NodeId> order;
  while (!ready.empty()) {
    NodeId u = ready.front();
    ready.pop_front();
    order.push_back(u);
    auto it = out.find(u);
    if (it == out.end()) continue;
    for (const auto& v : it->second)
      if (--indeg[v] == 0) ready.push_back(v);
  }
  if (order.size() != ids.size()) {
    // every unprocessed node keeps an unprocessed predecessor, so walking
    // backward through them must revisit a node, and that loop is a cycle
    NodeId cur;
    for (const auto& [id, d] : indeg)
      if (d > 0) {
        cur = id;
        break;
      }
    std::vector<NodeId> walk;
    std::map<NodeId, size_t> seen_at;
    while (!seen_at.count(cur)) {
      seen_at[cur] = walk.size();
      walk.push_back(cur);
      for (const auto& u : in.at(cur))
        if (indeg.at(u) > 0) {
          cur = u;
          break;
        }
    }
    std::string cycle = cur;
    for (size_t i = walk.size(); i-- > seen_at.at(cur);) cycle += " -> " + walk[i];
    throw GraphError(GraphError::Kind::CycleDetected, "graph contains a cycle: " + cycle);
  }
  return order;
}

}  // namespace detail

// Stage assignment over a raw node/edge list, before full graph validation.
// LongestPath: roots get stage 1, every other node 1 + max over its sources.
// Explicit: stages come from `explicit_map`, which must cover every node and
// be strictly increasing along every edge.
inline std::map<NodeId, int> assign_stages(
    const std::vector<GenNode>& nodes, const std::vector<Edge>& edges, StagePolicy policy,
    const std::map<NodeId, int>& explicit_map = {}) {
  std::set<NodeId> ids;
  for (const auto& n : nodes) {
    detail::check_node_id(n.id);
    if (!ids.insert(n.id).second)
      throw GraphError(GraphError::Kind::DuplicateNodeId, "duplicate node id: '" + n.id + "'");
  }
  std::map<NodeId, std::set<NodeId>> out, in;
  for (const auto& [u, v] : edges) {
    if (!ids.count(u) || !ids.count(v))
      throw GraphError(GraphError::Kind::DanglingEdgeEndpoint,
                       "edge (" + u + ", " + v + ") references a missing node");
    out[u].insert(v);
    in[v].insert(u);
  }

  if (policy == StagePolicy::Explicit) {
    for (const auto& id : ids)
      if (!explicit_map.count(id))
        throw GraphError(GraphError::Kind::ExplicitMapIncomplete,
                         "explicit stage map is missing node '" + id + "'");
    for (const auto& [u, v] : edges)
      if (!(explicit_map.at(u) < explicit_map.at(v)))
        throw GraphError(GraphError::Kind::ExplicitMapViolatesMonotonicity,
                         "stage(" + u + ") >= stage(" + v + ") along an edge");
    std::map<NodeId, int> stages;
    for (const auto& id : ids) stages[id] = explicit_map.at(id);
    return stages;
  }

  std::vector<NodeId> order = detail::topo_order(ids, out, in);
  std::map<NodeId, int> stages;
  for (const auto& u : order) {
    auto it = in.find(u);
    if (it == in.end() || it->second.empty()) {
      stages[u] = 1;
    } else {
      int best = 0;
      for (const auto& p : it->second) best = std::max(best, stages.at(p));
      stages[u] = best + 1;
    }
  }
  return stages;
}

// Immutable DAG of generative steps. Edges point from input span to the span a
// step produced from it; the terminal node carries the final output.
class ProcessGraph {
 public:
  static ProcessGraph build(std::vector<GenNode> nodes, std::vector<Edge> edges,
                            NodeId terminal) {
    ProcessGraph g;
    for (auto& n : nodes) {
      detail::check_node_id(n.id);
      if (g.nodes_.count(n.id))
        throw GraphError(GraphError::Kind::DuplicateNodeId, "duplicate node id: '" + n.id + "'");
      g.nodes_.emplace(n.id, std::move(n));
    }
    if (!g.nodes_.count(terminal))
      throw GraphError(GraphError::Kind::UnknownNode,
                       "terminal node '" + terminal + "' is not in the node set");
    g.terminal_ = std::move(terminal);
    for (const auto& [u, v] : edges) {
      if (!g.nodes_.count(u) || !g.nodes_.count(v))
        throw GraphError(GraphError::Kind::DanglingEdgeEndpoint,
                         "edge (" + u + ", " + v + ") references a missing node");
      g.out_[u].insert(v);
      g.in_[v].insert(u);
    }

    std::set<NodeId> ids;
    for (const auto& [id, n] : g.nodes_) ids.insert(id);
    detail::topo_order(ids, g.out_, g.in_);

    if (auto it = g.out_.find(g.terminal_); it != g.out_.end() && !it->second.empty())
      throw GraphError(GraphError::Kind::TerminalHasOutgoingEdge,
                       "terminal node '" + g.terminal_ + "' has outgoing edges");

    for (const auto& [u, vs] : g.out_)
      for (const auto& v : vs)
        if (!(g.nodes_.at(u).stage < g.nodes_.at(v).stage))
          throw GraphError(GraphError::Kind::StageViolation,
                           "stage(" + u + ") >= stage(" + v + ") along an edge");

    if (g.roots().empty())
      throw GraphError(GraphError::Kind::EmptyRootSet, "graph has no root nodes");

    for (const auto& [id, n] : g.nodes_) {
      auto it = g.out_.find(id);
      if (id != g.terminal_ && (it == g.out_.end() || it->second.empty()))
        g.warnings_.push_back("non-terminal sink node '" + id + "'");
    }
    if (g.component_count() > 1)
      g.warnings_.push_back("graph has more than one connected component");
    return g;
  }

  const GenNode& node(const NodeId& id) const {
    auto it = nodes_.find(id);
    if (it == nodes_.end())
      throw GraphError(GraphError::Kind::UnknownNode, "unknown node '" + id + "'");
    return it->second;
  }

  bool contains(const NodeId& id) const { return nodes_.count(id) != 0; }

  const NodeId& terminal() const { return terminal_; }

  size_t size() const { return nodes_.size(); }

  const std::map<NodeId, GenNode>& nodes() const { return nodes_; }

  std::vector<Edge> edges() const {
    std::vector<Edge> out;
    for (const auto& [u, vs] : out_)
      for (const auto& v : vs) out.emplace_back(u, v);
    return out;
  }

  // direct inputs of v
  std::set<NodeId> src(const NodeId& v) const {
    node(v);
    auto it = in_.find(v);
    return it == in_.end() ? std::set<NodeId>{} : it->second;
  }

  std::set<NodeId> roots() const {
    std::set<NodeId> out;
    for (const auto& [id, n] : nodes_) {
      auto it = in_.find(id);
      if (it == in_.end() || it->second.empty()) out.insert(id);
    }
    return out;
  }

  bool is_root(const NodeId& id) const {
    node(id);
    auto it = in_.find(id);
    return it == in_.end() || it->second.empty();
  }

  // roots from which v is reachable
  std::set<NodeId> reachable_roots(const NodeId& v) const {
    node(v);
    std::set<NodeId> seen{v};
    std::deque<NodeId> frontier{v};
    std::set<NodeId> out;
    while (!frontier.empty()) {
      NodeId u = frontier.front();
      frontier.pop_front();
      auto it = in_.find(u);
      if (it == in_.end() || it->second.empty()) {
        out.insert(u);
        continue;
      }
      for (const auto& p : it->second)
        if (seen.insert(p).second) frontier.push_back(p);
    }
    return out;
  }

  const std::vector<std::string>& warnings() const { return warnings_; }

 private:
  ProcessGraph() = default;

  size_t component_count() const {
    std::map<NodeId, NodeId> parent;
    for (const auto& [id, n] : nodes_) parent[id] = id;
    std::function<NodeId(NodeId)> find = [&](NodeId x) {
      while (parent[x] != x) {
        parent[x] = parent[parent[x]];
        x = parent[x];
      }
      return x;
    };
    for (const auto& [u, vs] : out_)
      for (const auto& v : vs) parent[find(u)] = find(v);
    std::set<NodeId> reps;
    for (const auto& [id, n] : nodes_) reps.insert(find(id));
    return reps.size();
  }

  std::map<NodeId, GenNode> nodes_;
  std::map<NodeId, std::set<NodeId>> out_, in_;
  NodeId terminal_;
  std::vector<std::string> warnings_;
};

inline ProcessGraph build_graph(std::vector<GenNode> nodes, std::vector<Edge> edges,
                                NodeId terminal) {
  return ProcessGraph::build(std::move(nodes), std::move(edges), std::move(terminal));
}

// JSON schema:
//   {"terminal": "...",
//    "nodes": [{"id": "...", "text": "...", "stage": 2}, ...],
//    "edges": [["u", "v"], ...]}
// If any node omits "stage", stages for all nodes are recomputed by longest
// path from the roots.
inline ProcessGraph graph_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("terminal") || !j.contains("nodes") || !j.contains("edges"))
    throw GraphError(GraphError::Kind::BadFormat,
                     "graph json must be an object with terminal, nodes, edges");
  std::vector<GenNode> nodes;
  bool all_staged = true;
  for (const auto& jn : j.at("nodes")) {
    GenNode n;
    n.id = jn.at("id").get<std::string>();
    n.text = jn.at("text").get<std::string>();
    if (jn.contains("stage"))
      n.stage = jn.at("stage").get<int>();
    else
      all_staged = false;
    nodes.push_back(std::move(n));
  }
  std::vector<Edge> edges;
  for (const auto& je : j.at("edges")) {
    if (!je.is_array() || je.size() != 2)
      throw GraphError(GraphError::Kind::BadFormat, "each edge must be a [u, v] pair");
    edges.emplace_back(je[0].get<std::string>(), je[1].get<std::string>());
  }
  if (!all_staged) {
    auto stages = assign_stages(nodes, edges, StagePolicy::LongestPath);
    for (auto& n : nodes) n.stage = stages.at(n.id);
  }
  return build_graph(std::move(nodes), std::move(edges), j.at("terminal").get<std::string>());
}

inline nlohmann::ordered_json graph_to_json(const ProcessGraph& g) {
  nlohmann::ordered_json j;
  j["terminal"] = g.terminal();
  j["nodes"] = nlohmann::json::array();
  for (const auto& [id, n] : g.nodes()) {
    nlohmann::ordered_json jn;
    jn["id"] = n.id;
    jn["text"] = n.text;
    jn["stage"] = n.stage;
    j["nodes"].push_back(std::move(jn));
  }
  j["edges"] = nlohmann::json::array();
  for (const auto& [u, v] : g.edges()) j["edges"].push_back({u, v});
  return j;
}

}  // namespace veritrail
