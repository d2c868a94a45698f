#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "veritrail/graph.hpp"
#include "veritrail/segmentation.hpp"

namespace veritrail {

class TrailError : public Error {
 public:
  enum class Kind { CalledOnNonNfsResult, BadFormat };

  TrailError(Kind kind, const std::string& msg) : Error(msg), kind(kind) {}

  Kind kind;
};

// Evidence one node contributed in one iteration: the selected sentences (by
// stable id) and the summary generated for them. Node-level evidence (e.g.
// from embedding retrieval) carries no sentence ids.
struct EvidenceTrailEntry {
  int iteration = 0;
  NodeId node;
  int stage = 0;
  std::vector<std::string> sids;
  std::vector<std::string> texts;
  std::string summary;
};

struct IterationRecord {
  int index = 0;
  std::set<NodeId> nodes_checked;
  std::set<NodeId> nodes_with_ev;
  Verdict verdict = Verdict::Inconclusive;
  std::string reasoning;
};

struct ClaimResult {
  std::string claim_id;
  Verdict final_verdict = Verdict::Inconclusive;
  std::string reasoning;
  std::vector<IterationRecord> iterations;
  std::vector<EvidenceTrailEntry> trail;
  bool error_stages_computed = false;
  std::optional<std::set<int>> error_stages;  // nullopt = computed but not identifiable
  std::optional<double> soft_score;
  bool terminated = false;
};

// Stage localization for a claim that ended NotFullySupported. Returns the
// stages of the non-root nodes backing the last FullySupported iteration; with
// no FullySupported iteration at all, an unbroken NotFullySupported cascade
// points at the terminal's stage, and any Inconclusive interim verdict makes
// the stage unidentifiable (nullopt).
inline std::optional<std::set<int>> error_stages(const ClaimResult& result,
                                                 const ProcessGraph& graph, int q) {
  (void)q;
  if (result.final_verdict != Verdict::NotFullySupported || result.terminated)
    throw TrailError(TrailError::Kind::CalledOnNonNfsResult,
                     "error stages are only defined for NotFullySupported results");

  int last_fs = -1;
  for (size_t i = 0; i < result.iterations.size(); ++i)
    if (result.iterations[i].verdict == Verdict::FullySupported) last_fs = static_cast<int>(i);

  if (last_fs >= 0) {
    std::set<int> stages;
    for (const auto& v : result.iterations[static_cast<size_t>(last_fs)].nodes_with_ev)
      if (!graph.is_root(v)) stages.insert(graph.node(v).stage);
    if (stages.empty()) return std::nullopt;
    return stages;
  }

  bool all_nfs = !result.iterations.empty();
  for (const auto& it : result.iterations)
    all_nfs = all_nfs && it.verdict == Verdict::NotFullySupported;
  if (all_nfs) return std::set<int>{graph.node(graph.terminal()).stage};
  return std::nullopt;
}

enum class TrailFormat { Text, Markdown };

inline std::string render_trail(const ClaimResult& result, const ProcessGraph& graph,
                                TrailFormat format = TrailFormat::Text) {
  const bool md = format == TrailFormat::Markdown;
  std::string out;
  auto join = [](const std::set<NodeId>& ids) {
    std::string s;
    for (const auto& id : ids) {
      if (!s.empty()) s += ", ";
      s += id;
    }
    return s.empty() ? "(none)" : s;
  };

  if (md)
    out += "## Claim " + result.claim_id + "\n\n";
  else
    out += "claim " + result.claim_id + "\n";

  std::string verdict_line = result.terminated
                                 ? std::string("terminated (no consensus evidence)")
                                 : std::string(to_string(result.final_verdict));
  if (md)
    out += "**Final verdict:** " + verdict_line + "\n";
  else
    out += "final verdict: " + verdict_line + "\n";

  if (result.error_stages_computed) {
    std::string stages;
    if (result.error_stages) {
      for (int s : *result.error_stages) {
        if (!stages.empty()) stages += ", ";
        stages += std::to_string(s);
      }
    } else {
      stages = "not identifiable";
    }
    if (md)
      out += "**Error stages:** " + stages + "\n";
    else
      out += "error stages: " + stages + "\n";
  }
  if (result.soft_score) {
    std::string score = std::to_string(*result.soft_score);
    if (md)
      out += "**Support score:** " + score + "\n";
    else
      out += "support score: " + score + "\n";
  }

  for (const auto& it : result.iterations) {
    if (md)
      out += "\n### Iteration " + std::to_string(it.index) + " - " + to_string(it.verdict) +
             "\n\n";
    else
      out += "iteration " + std::to_string(it.index) + " [" + to_string(it.verdict) + "]\n";
    if (md) {
      out += "- checked: " + join(it.nodes_checked) + "\n";
      out += "- evidence from: " + join(it.nodes_with_ev) + "\n";
    } else {
      out += "  checked: " + join(it.nodes_checked) + "\n";
      out += "  evidence from: " + join(it.nodes_with_ev) + "\n";
    }
    for (const auto& e : result.trail) {
      if (e.iteration != it.index) continue;
      std::string head = e.node + " (stage " + std::to_string(e.stage) + ")";
      if (md)
        out += "- " + head + "\n";
      else
        out += "  " + head + "\n";
      for (size_t i = 0; i < e.sids.size(); ++i) {
        std::string text = i < e.texts.size() ? e.texts[i] : "";
        if (md)
          out += "  - `" + e.sids[i] + "` " + text + "\n";
        else
          out += "    " + e.sids[i] + ": " + text + "\n";
      }
      if (!e.summary.empty()) {
        if (md)
          out += "  - summary: " + e.summary + "\n";
        else
          out += "    summary: " + e.summary + "\n";
      }
    }
  }
  (void)graph;
  return out;
}

inline nlohmann::ordered_json claim_result_to_json(const ClaimResult& r) {
  nlohmann::ordered_json j;
  j["claim_id"] = r.claim_id;
  if (r.terminated)
    j["final_verdict"] = nullptr;
  else
    j["final_verdict"] = to_string(r.final_verdict);
  j["reasoning"] = r.reasoning;
  j["terminated"] = r.terminated;

  nlohmann::ordered_json interim = nlohmann::json::array();
  for (const auto& it : r.iterations) interim.push_back(to_string(it.verdict));
  j["interim_verdicts"] = std::move(interim);

  nlohmann::ordered_json iters = nlohmann::json::array();
  for (const auto& it : r.iterations) {
    nlohmann::ordered_json ji;
    ji["index"] = it.index;
    ji["nodes_checked"] = it.nodes_checked;
    ji["nodes_with_ev"] = it.nodes_with_ev;
    ji["verdict"] = to_string(it.verdict);
    ji["reasoning"] = it.reasoning;
    iters.push_back(std::move(ji));
  }
  j["iterations"] = std::move(iters);

  nlohmann::ordered_json trail = nlohmann::json::array();
  for (const auto& e : r.trail) {
    nlohmann::ordered_json je;
    je["iteration"] = e.iteration;
    je["node"] = e.node;
    je["stage"] = e.stage;
    je["sids"] = e.sids;
    je["texts"] = e.texts;
    je["summary"] = e.summary;
    trail.push_back(std::move(je));
  }
  j["trail"] = std::move(trail);

  if (r.error_stages_computed) {
    if (r.error_stages)
      j["error_stages"] = *r.error_stages;
    else
      j["error_stages"] = nullptr;
  }
  if (r.soft_score) j["soft_score"] = *r.soft_score;
  return j;
}

inline ClaimResult claim_result_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("claim_id"))
    throw TrailError(TrailError::Kind::BadFormat, "claim result must be an object with claim_id");
  ClaimResult r;
  r.claim_id = j.at("claim_id").get<std::string>();
  r.terminated = j.value("terminated", false);
  if (j.contains("final_verdict") && !j.at("final_verdict").is_null())
    r.final_verdict = verdict_from_string(j.at("final_verdict").get<std::string>());
  r.reasoning = j.value("reasoning", std::string());
  if (j.contains("iterations")) {
    for (const auto& ji : j.at("iterations")) {
      IterationRecord it;
      it.index = ji.at("index").get<int>();
      for (const auto& n : ji.at("nodes_checked")) it.nodes_checked.insert(n.get<std::string>());
      for (const auto& n : ji.at("nodes_with_ev")) it.nodes_with_ev.insert(n.get<std::string>());
      it.verdict = verdict_from_string(ji.at("verdict").get<std::string>());
      it.reasoning = ji.value("reasoning", std::string());
      r.iterations.push_back(std::move(it));
    }
  }
  if (j.contains("trail")) {
    for (const auto& je : j.at("trail")) {
      EvidenceTrailEntry e;
      e.iteration = je.at("iteration").get<int>();
      e.node = je.at("node").get<std::string>();
      e.stage = je.at("stage").get<int>();
      for (const auto& s : je.at("sids")) e.sids.push_back(s.get<std::string>());
      for (const auto& t : je.at("texts")) e.texts.push_back(t.get<std::string>());
      e.summary = je.value("summary", std::string());
      r.trail.push_back(std::move(e));
    }
  }
  if (j.contains("error_stages")) {
    r.error_stages_computed = true;
    if (!j.at("error_stages").is_null()) {
      std::set<int> stages;
      for (const auto& s : j.at("error_stages")) stages.insert(s.get<int>());
      r.error_stages = std::move(stages);
    }
  }
  if (j.contains("soft_score") && !j.at("soft_score").is_null())
    r.soft_score = j.at("soft_score").get<double>();
  return r;
}

inline std::string results_to_jsonl(const std::vector<ClaimResult>& results) {
  std::string out;
  for (const auto& r : results) {
    out += claim_result_to_json(r).dump();
    out += '\n';
  }
  return out;
}

inline std::vector<ClaimResult> results_from_jsonl(const std::string& text) {
  std::vector<ClaimResult> out;
  size_t pos = 0;
  size_t lineno = 0;
  while (pos <= text.size()) {
    size_t end = text.find('\n', pos);
    std::string line = end == std::string::npos ? text.substr(pos) : text.substr(pos, end - pos);
    ++lineno;
    if (!trim(line).empty()) {
      try {
        out.push_back(claim_result_from_json(nlohmann::json::parse(line)));
      } catch (const nlohmann::json::exception& e) {
        throw TrailError(TrailError::Kind::BadFormat,
                         "results line " + std::to_string(lineno) + ": " + e.what());
      }
    }
    if (end == std::string::npos) break;
    pos = end + 1;
  }
  return out;
}

}  // namespace veritrail
