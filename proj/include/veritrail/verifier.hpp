#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "veritrail/claims.hpp"
#include "veritrail/lm.hpp"
#include "veritrail/prompts.hpp"
#include "veritrail/trail.hpp"

namespace veritrail {

class VerifierError : public Error {
 public:
  enum class Kind {
    NoSourceNodes,
    InvalidConfig,
    EmbedderFailure,
    UnsoundEvidence,
  };

  VerifierError(Kind kind, const std::string& msg) : Error(msg), kind(kind) {}

  Kind kind;
};

enum class EvidenceStrategy { LmEvidence, EmbeddingTopK };

struct ConsensusConfig {
  int samples = 3;
  int threshold = 2;
};

struct VerifierConfig {
  int q = 1;
  int evidence_limit = 40;
  int verdict_limit_nonroot = 200;
  std::optional<int> verdict_limit_root;  // unset: fall back to the context window cap
  int context_window_sentences = 100000;
  int max_verdict_reruns = 1;
  int max_decomposition = 20;
  EvidenceStrategy strategy = EvidenceStrategy::LmEvidence;
  int top_k = 5;
  std::optional<ConsensusConfig> consensus;
  double hard_temperature = 0.0;
  double soft_temperature = 0.2;
  int max_output_tokens = 2048;
  std::optional<long> request_seed;
};

struct EvidenceOutcome {
  std::vector<EvidenceTrailEntry> entries;
  std::set<NodeId> nodes_with_ev;
};

// One step provider for the verification loop: evidence over a node set, and
// a verdict over that evidence. Bound to a single claim.
class EvidenceEngine {
 public:
  virtual ~EvidenceEngine() = default;
  virtual EvidenceOutcome select_evidence(const std::set<NodeId>& nodes, int iteration) = 0;
  virtual std::pair<Verdict, std::string> judge(const std::vector<EvidenceTrailEntry>& entries,
                                                const std::set<NodeId>& nodes_with_ev,
                                                int iteration) = 0;
};

namespace detail {

struct SegmentCache {
  explicit SegmentCache(const ProcessGraph& graph) : graph(&graph) {}

  const std::vector<Sentence>& sentences(const NodeId& id) {
    auto it = cache.find(id);
    if (it != cache.end()) return it->second;
    return cache.emplace(id, assign_ids(graph->node(id))).first->second;
  }

  const ProcessGraph* graph;
  std::map<NodeId, std::vector<Sentence>> cache;
};

inline void check_entry_sound(const EvidenceTrailEntry& e, SegmentCache& segments) {
  const ProcessGraph& graph = *segments.graph;
  if (!graph.contains(e.node))
    throw VerifierError(VerifierError::Kind::UnsoundEvidence,
                        "trail entry names unknown node '" + e.node + "'");
  if (e.stage != graph.node(e.node).stage)
    throw VerifierError(VerifierError::Kind::UnsoundEvidence,
                        "trail entry stage mismatch for node '" + e.node + "'");
  if (e.sids.size() != e.texts.size())
    throw VerifierError(VerifierError::Kind::UnsoundEvidence,
                        "trail entry sids/texts length mismatch for node '" + e.node + "'");
  const auto& sents = segments.sentences(e.node);
  for (size_t i = 0; i < e.sids.size(); ++i) {
    auto [node, index] = parse_sid(e.sids[i]);
    if (node != e.node || index < 1 || static_cast<size_t>(index) > sents.size() ||
        sents[static_cast<size_t>(index) - 1].text != e.texts[i])
      throw VerifierError(VerifierError::Kind::UnsoundEvidence,
                          "trail sentence id '" + e.sids[i] + "' does not resolve to a sentence");
  }
}

}  // namespace detail

// The reverse traversal: starting from the terminal's sources, select evidence
// and judge the claim, walking toward the roots of whatever supported it (or
// upstream of an unsupported frontier) until the frontier collapses onto the
// supporting roots or q consecutive NotFullySupported verdicts accumulate.
inline ClaimResult run_verification(const ProcessGraph& graph, const std::string& claim_id,
                                    EvidenceEngine& engine, int q) {
  if (q < 1)
    throw VerifierError(VerifierError::Kind::InvalidConfig, "q must be >= 1");
  std::set<NodeId> nodes_to_check = graph.src(graph.terminal());
  if (nodes_to_check.empty())
    throw VerifierError(VerifierError::Kind::NoSourceNodes,
                        "terminal node '" + graph.terminal() + "' has no source nodes");

  detail::SegmentCache segments(graph);
  const std::set<NodeId> roots = graph.roots();
  std::set<NodeId> checked, roots_with_ev;
  int consec_not_supported = 0;
  Verdict verdict = Verdict::Inconclusive;
  std::string reasoning;

  ClaimResult result;
  result.claim_id = claim_id;

  int iteration = 0;
  while (true) {
    ++iteration;
    std::set<NodeId> fresh;
    std::set_difference(nodes_to_check.begin(), nodes_to_check.end(), checked.begin(),
                        checked.end(), std::inserter(fresh, fresh.end()));

    EvidenceOutcome outcome = engine.select_evidence(fresh, iteration);

    IterationRecord record;
    record.index = iteration;
    record.nodes_checked = nodes_to_check;

    if (outcome.entries.empty()) {
      verdict = Verdict::NotFullySupported;
      reasoning = "no evidence was selected";
    } else {
      for (auto& e : outcome.entries) {
        e.iteration = iteration;
        detail::check_entry_sound(e, segments);
        result.trail.push_back(e);
      }
      for (const auto& v : outcome.nodes_with_ev)
        if (roots.count(v)) roots_with_ev.insert(v);
      std::set<NodeId> with_ev = outcome.nodes_with_ev;
      with_ev.insert(roots_with_ev.begin(), roots_with_ev.end());
      std::tie(verdict, reasoning) = engine.judge(outcome.entries, with_ev, iteration);
      record.nodes_with_ev = std::move(with_ev);
    }
    record.verdict = verdict;
    record.reasoning = reasoning;
    result.iterations.push_back(record);

    checked.insert(nodes_to_check.begin(), nodes_to_check.end());

    const std::set<NodeId>& step_from =
        verdict == Verdict::NotFullySupported ? nodes_to_check : record.nodes_with_ev;
    std::set<NodeId> frontier;
    for (const auto& v : step_from) {
      auto sources = graph.src(v);
      frontier.insert(sources.begin(), sources.end());
    }
    if (verdict == Verdict::NotFullySupported)
      ++consec_not_supported;
    else
      consec_not_supported = 0;

    std::set<NodeId> next;
    std::set_difference(frontier.begin(), frontier.end(), checked.begin(), checked.end(),
                        std::inserter(next, next.end()));
    next.insert(roots_with_ev.begin(), roots_with_ev.end());
    nodes_to_check = std::move(next);

    if (nodes_to_check == roots_with_ev) break;
    if (nodes_to_check.empty()) {
      // defensive: the equality break above already covers an empty frontier
      verdict = Verdict::NotFullySupported;
      reasoning = "traversal exhausted without reaching supporting roots";
      break;
    }
    if (consec_not_supported == q) break;
  }

  result.final_verdict = verdict;
  result.reasoning = reasoning;
  return result;
}

// Evidence selection and verdict generation through prompted model calls.
class LmEvidenceEngine : public EvidenceEngine {
 public:
  LmEvidenceEngine(const ProcessGraph& graph, Claim claim, std::vector<std::string> sub_claims,
                   const VerifierConfig& config, LmBackend& lm, UsageLedger* ledger = nullptr)
      : graph_(graph),
        claim_(std::move(claim)),
        sub_claims_(std::move(sub_claims)),
        config_(config),
        lm_(lm),
        ledger_(ledger),
        segments_(graph) {}

  EvidenceOutcome select_evidence(const std::set<NodeId>& nodes, int) override {
    std::vector<Sentence> all;
    for (const auto& id : nodes) {
      const auto& sents = segments_.sentences(id);
      all.insert(all.end(), sents.begin(), sents.end());
    }
    EvidenceOutcome outcome;
    if (all.empty()) return outcome;

    struct NodeEvidence {
      std::vector<std::string> sids;
      std::vector<std::string> texts;
      std::string summary;
    };
    std::map<NodeId, NodeEvidence> per_node;

    for (const auto& batch : batch_sentences(all, config_.evidence_limit)) {
      ExcerptBundle bundle = make_bundle(group_by_node(batch));
      RenderedPrompt prompt = render_evidence_prompt(bundle, claim_.text, sub_claims_);

      std::set<int> kept;
      std::string summary;
      if (config_.consensus) {
        std::map<int, int> votes;
        bool have_summary = false;
        for (int s = 0; s < config_.consensus->samples; ++s) {
          std::optional<EvidenceSelection> sel =
              try_evidence_sample(prompt, bundle, config_.soft_temperature);
          if (!sel || sel->no_relevant) continue;
          for (int id : sel->selected()) ++votes[id];
          if (!have_summary && !sel->summary.empty()) {
            summary = sel->summary;
            have_summary = true;
          }
        }
        for (const auto& [id, n] : votes)
          if (n >= config_.consensus->threshold) kept.insert(id);
        if (kept.empty()) continue;
      } else {
        EvidenceSelection sel = evidence_with_retry(prompt, bundle, config_.hard_temperature);
        if (sel.no_relevant) continue;
        kept = sel.selected();
        summary = sel.summary;
        if (kept.empty()) continue;
      }

      std::set<NodeId> batch_nodes;
      for (int id : kept) {
        const ExcerptSentence* s = bundle.find(id);
        if (s == nullptr) continue;
        NodeEvidence& ev = per_node[s->sentence.node];
        ev.sids.push_back(s->sentence.sid);
        ev.texts.push_back(s->sentence.text);
        batch_nodes.insert(s->sentence.node);
      }
      for (const auto& id : batch_nodes) {
        NodeEvidence& ev = per_node[id];
        if (!summary.empty()) {
          if (!ev.summary.empty()) ev.summary += " ";
          ev.summary += summary;
        }
      }
    }

    for (auto& [id, ev] : per_node) {
      EvidenceTrailEntry entry;
      entry.node = id;
      entry.stage = graph_.node(id).stage;
      entry.sids = std::move(ev.sids);
      entry.texts = std::move(ev.texts);
      entry.summary = std::move(ev.summary);
      outcome.entries.push_back(std::move(entry));
      outcome.nodes_with_ev.insert(id);
    }
    return outcome;
  }

  std::pair<Verdict, std::string> judge(const std::vector<EvidenceTrailEntry>& entries,
                                        const std::set<NodeId>& nodes_with_ev, int) override {
    std::map<NodeId, std::string> summaries;
    for (const auto& e : entries)
      if (!graph_.is_root(e.node)) summaries[e.node] = e.summary;

    ExcerptBundle bundle = build_verdict_input(graph_, nodes_with_ev, summaries);
    int limit = bundle.any_root()
                    ? config_.verdict_limit_root.value_or(config_.context_window_sentences)
                    : config_.verdict_limit_nonroot;
    if (bundle.total_sentences() > limit) {
      bundle = shrink_verdict_input(bundle, limit, config_.max_verdict_reruns,
                                    [this](const ExcerptBundle& b) {
                                      return reselect_for_shrink(b);
                                    });
    }

    RenderedPrompt prompt = render_verdict_prompt(bundle, claim_.text);
    double temperature =
        config_.consensus ? config_.soft_temperature : config_.hard_temperature;

    if (!config_.consensus) {
      try {
        return single_verdict(prompt, temperature);
      } catch (const PromptError&) {
        return {Verdict::Inconclusive, "verdict response could not be parsed"};
      }
    }

    std::map<Verdict, int> votes;
    std::map<Verdict, std::string> reasoning_by_verdict;
    int fs_votes = 0;
    for (int s = 0; s < config_.consensus->samples; ++s) {
      try {
        auto [v, why] = single_verdict(prompt, temperature);
        ++votes[v];
        if (v == Verdict::FullySupported) ++fs_votes;
        if (!reasoning_by_verdict.count(v)) reasoning_by_verdict[v] = why;
      } catch (const PromptError&) {
        // an unparseable sample simply casts no vote
      }
    }
    last_fs_fraction_ =
        static_cast<double>(fs_votes) / static_cast<double>(config_.consensus->samples);

    Verdict decided = consensus_verdict(votes, config_.consensus->threshold);
    std::string why = reasoning_by_verdict.count(decided)
                          ? reasoning_by_verdict[decided]
                          : "no verdict reached the consensus threshold";
    return {decided, why};
  }

  double last_fs_fraction() const { return last_fs_fraction_; }

  // App D.2 rule: a verdict passes with at least `threshold` of the samples;
  // of the passing verdicts the most frequent wins, and a tie or an empty
  // passing set is Inconclusive.
  static Verdict consensus_verdict(const std::map<Verdict, int>& votes, int threshold) {
    Verdict best = Verdict::Inconclusive;
    int best_count = 0;
    bool tie = false;
    for (const auto& [v, n] : votes) {
      if (n < threshold) continue;
      if (n > best_count) {
        best = v;
        best_count = n;
        tie = false;
      } else if (n == best_count) {
        tie = true;
      }
    }
    if (best_count == 0 || tie) return Verdict::Inconclusive;
    return best;
  }

 private:
  std::vector<BundleGroup> group_by_node(const std::vector<Sentence>& batch) const {
    std::vector<BundleGroup> groups;
    for (const auto& s : batch) {
      if (groups.empty() || groups.back().node != s.node)
        groups.push_back({s.node, graph_.is_root(s.node), {}});
      groups.back().sentences.push_back(s);
    }
    return groups;
  }

  GenerationResult generate(const RenderedPrompt& prompt, double temperature) {
    GenerationRequest request;
    request.system_prompt = prompt.system_prompt;
    request.user_prompt = prompt.user_prompt;
    request.temperature = temperature;
    request.max_output_tokens = config_.max_output_tokens;
    request.seed = config_.request_seed;
    GenerationResult result = lm_.generate(request);
    if (ledger_ != nullptr) ledger_->record(claim_.id, result.usage);
    return result;
  }

  EvidenceSelection evidence_with_retry(const RenderedPrompt& prompt,
                                        const ExcerptBundle& bundle, double temperature) {
    try {
      return parse_evidence_response(generate(prompt, temperature).text, bundle);
    } catch (const PromptError&) {
      return parse_evidence_response(generate(prompt, 0.0).text, bundle);
    }
  }

  std::optional<EvidenceSelection> try_evidence_sample(const RenderedPrompt& prompt,
                                                       const ExcerptBundle& bundle,
                                                       double temperature) {
    try {
      return evidence_with_retry(prompt, bundle, temperature);
    } catch (const PromptError&) {
      return std::nullopt;
    }
  }

  EvidenceSelection reselect_for_shrink(const ExcerptBundle& bundle) {
    RenderedPrompt prompt = render_evidence_prompt(bundle, claim_.text, sub_claims_);
    try {
      return evidence_with_retry(prompt, bundle, config_.hard_temperature);
    } catch (const PromptError&) {
      EvidenceSelection none;
      none.no_relevant = true;
      return none;
    }
  }

  std::pair<Verdict, std::string> single_verdict(const RenderedPrompt& prompt,
                                                 double temperature) {
    VerdictParse parsed;
    try {
      parsed = parse_verdict_response(generate(prompt, temperature).text);
    } catch (const PromptError&) {
      parsed = parse_verdict_response(generate(prompt, 0.0).text);
    }
    return {parsed.verdict, parsed.reasoning};
  }

  const ProcessGraph& graph_;
  Claim claim_;
  std::vector<std::string> sub_claims_;
  const VerifierConfig& config_;
  LmBackend& lm_;
  UsageLedger* ledger_;
  detail::SegmentCache segments_;
  double last_fs_fraction_ = 0.0;
};

class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual std::vector<double> embed(const std::string& text) = 0;
};

// Deterministic bag-of-words embedding: tokens hash into a fixed number of
// buckets and the vector is L2-normalized. Good enough to make lexical
// overlap look like proximity, which is all the offline runs need.
class HashEmbedder : public Embedder {
 public:
  explicit HashEmbedder(int dim = 64) : dim_(dim) {}

  std::vector<double> embed(const std::string& text) override {
    std::vector<double> v(static_cast<size_t>(dim_), 0.0);
    for (const auto& t : tokenize(text)) v[hash_str(t) % static_cast<uint64_t>(dim_)] += 1.0;
    double norm = 0.0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    if (norm > 0.0)
      for (double& x : v) x /= norm;
    return v;
  }

 private:
  int dim_;
};

// Embedding-based evidence: the k nodes nearest to the claim by L2 distance,
// ties broken by ascending node id. Trail entries are node-level.
inline EvidenceOutcome vt_rag_evidence(const ProcessGraph& graph, const std::string& claim_text,
                                       const std::set<NodeId>& nodes, Embedder& embedder, int k) {
  if (k < 1)
    throw VerifierError(VerifierError::Kind::InvalidConfig, "top-k must be >= 1");
  std::vector<double> query;
  std::vector<std::pair<double, NodeId>> scored;
  try {
    query = embedder.embed(claim_text);
    for (const auto& id : nodes) {
      std::vector<double> v = embedder.embed(graph.node(id).text);
      if (v.size() != query.size())
        throw VerifierError(VerifierError::Kind::EmbedderFailure,
                            "embedder returned vectors of differing dimension");
      double d2 = 0.0;
      for (size_t i = 0; i < v.size(); ++i) d2 += (v[i] - query[i]) * (v[i] - query[i]);
      scored.emplace_back(d2, id);
    }
  } catch (const VerifierError&) {
    throw;
  } catch (const std::exception& e) {
    throw VerifierError(VerifierError::Kind::EmbedderFailure, e.what());
  }
  std::sort(scored.begin(), scored.end());

  EvidenceOutcome outcome;
  for (size_t i = 0; i < scored.size() && i < static_cast<size_t>(k); ++i) {
    const NodeId& id = scored[i].second;
    EvidenceTrailEntry entry;
    entry.node = id;
    entry.stage = graph.node(id).stage;
    outcome.entries.push_back(std::move(entry));
    outcome.nodes_with_ev.insert(id);
  }
  return outcome;
}

// Retrieval variant of the engine: embedding top-k instead of prompted
// evidence selection; retrieved nodes contribute their full text to the
// verdict input. A NotFullySupported verdict terminates the walk.
class RetrievalEvidenceEngine : public EvidenceEngine {
 public:
  RetrievalEvidenceEngine(const ProcessGraph& graph, Claim claim,
                          std::vector<std::string> sub_claims, const VerifierConfig& config,
                          LmBackend& lm, Embedder& embedder, UsageLedger* ledger = nullptr)
      : lm_engine_(graph, claim, std::move(sub_claims), config, lm, ledger),
        graph_(graph),
        claim_(std::move(claim)),
        config_(config),
        embedder_(embedder) {}

  EvidenceOutcome select_evidence(const std::set<NodeId>& nodes, int) override {
    return vt_rag_evidence(graph_, claim_.text, nodes, embedder_, config_.top_k);
  }

  std::pair<Verdict, std::string> judge(const std::vector<EvidenceTrailEntry>& entries,
                                        const std::set<NodeId>& nodes_with_ev,
                                        int iteration) override {
    std::vector<EvidenceTrailEntry> with_text = entries;
    for (auto& e : with_text)
      if (!graph_.is_root(e.node)) e.summary = graph_.node(e.node).text;
    return lm_engine_.judge(with_text, nodes_with_ev, iteration);
  }

 private:
  LmEvidenceEngine lm_engine_;
  const ProcessGraph& graph_;
  Claim claim_;
  const VerifierConfig& config_;
  Embedder& embedder_;
};

inline EvidenceOutcome get_evidence(const ProcessGraph& graph, const Claim& claim,
                                    const std::vector<std::string>& sub_claims,
                                    const std::set<NodeId>& nodes, LmBackend& lm,
                                    const VerifierConfig& config, UsageLedger* ledger = nullptr) {
  LmEvidenceEngine engine(graph, claim, sub_claims, config, lm, ledger);
  return engine.select_evidence(nodes, 1);
}

inline std::pair<Verdict, std::string> get_verdict(
    const ProcessGraph& graph, const Claim& claim,
    const std::vector<EvidenceTrailEntry>& evidence, const std::set<NodeId>& nodes_with_ev,
    LmBackend& lm, const VerifierConfig& config, UsageLedger* ledger = nullptr) {
  LmEvidenceEngine engine(graph, claim, {}, config, lm, ledger);
  return engine.judge(evidence, nodes_with_ev, 1);
}

// Soft-prediction walk (App D.2 semantics): consensus evidence and verdicts;
// an iteration whose consensus evidence is empty terminates verification, and
// the score is the FullySupported fraction of the final iteration's samples.
inline ClaimResult run_soft_verification(const ProcessGraph& graph, const std::string& claim_id,
                                         LmEvidenceEngine& engine, int q) {
  if (q < 1)
    throw VerifierError(VerifierError::Kind::InvalidConfig, "q must be >= 1");
  std::set<NodeId> nodes_to_check = graph.src(graph.terminal());
  if (nodes_to_check.empty())
    throw VerifierError(VerifierError::Kind::NoSourceNodes,
                        "terminal node '" + graph.terminal() + "' has no source nodes");

  detail::SegmentCache segments(graph);
  const std::set<NodeId> roots = graph.roots();
  std::set<NodeId> checked, roots_with_ev;
  int consec_not_supported = 0;
  Verdict verdict = Verdict::Inconclusive;
  std::string reasoning;

  ClaimResult result;
  result.claim_id = claim_id;

  int iteration = 0;
  while (true) {
    ++iteration;
    std::set<NodeId> fresh;
    std::set_difference(nodes_to_check.begin(), nodes_to_check.end(), checked.begin(),
                        checked.end(), std::inserter(fresh, fresh.end()));

    EvidenceOutcome outcome = engine.select_evidence(fresh, iteration);
    if (outcome.entries.empty()) {
      result.terminated = true;
      break;
    }

    IterationRecord record;
    record.index = iteration;
    record.nodes_checked = nodes_to_check;

    for (auto& e : outcome.entries) {
      e.iteration = iteration;
      detail::check_entry_sound(e, segments);
      result.trail.push_back(e);
    }
    for (const auto& v : outcome.nodes_with_ev)
      if (roots.count(v)) roots_with_ev.insert(v);
    std::set<NodeId> with_ev = outcome.nodes_with_ev;
    with_ev.insert(roots_with_ev.begin(), roots_with_ev.end());
    std::tie(verdict, reasoning) = engine.judge(outcome.entries, with_ev, iteration);
    record.nodes_with_ev = std::move(with_ev);
    record.verdict = verdict;
    record.reasoning = reasoning;
    result.iterations.push_back(record);

    checked.insert(nodes_to_check.begin(), nodes_to_check.end());

    const std::set<NodeId>& step_from =
        verdict == Verdict::NotFullySupported ? nodes_to_check : record.nodes_with_ev;
    std::set<NodeId> frontier;
    for (const auto& v : step_from) {
      auto sources = graph.src(v);
      frontier.insert(sources.begin(), sources.end());
    }
    if (verdict == Verdict::NotFullySupported)
      ++consec_not_supported;
    else
      consec_not_supported = 0;

    std::set<NodeId> next;
    std::set_difference(frontier.begin(), frontier.end(), checked.begin(), checked.end(),
                        std::inserter(next, next.end()));
    next.insert(roots_with_ev.begin(), roots_with_ev.end());
    nodes_to_check = std::move(next);

    if (nodes_to_check == roots_with_ev) break;
    if (nodes_to_check.empty()) {
      verdict = Verdict::NotFullySupported;
      reasoning = "traversal exhausted without reaching supporting roots";
      break;
    }
    if (consec_not_supported == q) break;
  }

  if (result.terminated) {
    result.reasoning = "verification was terminated: no consensus evidence";
  } else {
    result.final_verdict = verdict;
    result.reasoning = reasoning;
    result.soft_score = engine.last_fs_fraction();
  }
  return result;
}

// Full verification of one claim under `config`. Decomposition is the
// caller's concern; pass the sub-claims produced by decompose() (or an empty
// list to let the prompt fall back to the claim itself).
inline ClaimResult verify_claim(const ProcessGraph& graph, const Claim& claim,
                                const std::vector<std::string>& sub_claims,
                                const VerifierConfig& config, LmBackend& lm,
                                UsageLedger* ledger = nullptr, Embedder* embedder = nullptr) {
  ClaimResult result;
  if (config.strategy == EvidenceStrategy::EmbeddingTopK) {
    if (embedder == nullptr)
      throw VerifierError(VerifierError::Kind::InvalidConfig,
                          "the embedding strategy requires an embedder");
    if (config.consensus)
      throw VerifierError(VerifierError::Kind::InvalidConfig,
                          "consensus sampling applies to the LM evidence strategy only");
    RetrievalEvidenceEngine engine(graph, claim, sub_claims, config, lm, *embedder, ledger);
    result = run_verification(graph, claim.id, engine, 1);
  } else if (config.consensus) {
    if (config.consensus->samples < 1 || config.consensus->threshold < 1 ||
        config.consensus->threshold > config.consensus->samples)
      throw VerifierError(VerifierError::Kind::InvalidConfig,
                          "consensus threshold must lie in [1, samples]");
    LmEvidenceEngine engine(graph, claim, sub_claims, config, lm, ledger);
    result = run_soft_verification(graph, claim.id, engine, config.q);
  } else {
    LmEvidenceEngine engine(graph, claim, sub_claims, config, lm, ledger);
    result = run_verification(graph, claim.id, engine, config.q);
  }

  if (!result.terminated && result.final_verdict == Verdict::NotFullySupported) {
    result.error_stages_computed = true;
    result.error_stages = error_stages(result, graph, config.q);
  }
  return result;
}

inline ClaimResult soft_verify(const ProcessGraph& graph, const Claim& claim,
                               const std::vector<std::string>& sub_claims,
                               const VerifierConfig& config, LmBackend& lm,
                               UsageLedger* ledger = nullptr) {
  VerifierConfig soft = config;
  if (!soft.consensus) soft.consensus = ConsensusConfig{};
  return verify_claim(graph, claim, sub_claims, soft, lm, ledger);
}

}  // namespace veritrail
