#pragma once

#include <algorithm>
#include <cstring>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "veritrail/lm.hpp"
#include "veritrail/segmentation.hpp"

namespace veritrail {

class PromptError : public Error {
 public:
  enum class Kind { UnparseableResponse, LimitTooSmall, MissingSummary };

  PromptError(Kind kind, const std::string& msg) : Error(msg), kind(kind) {}

  Kind kind;
};

inline constexpr const char* kEvidenceSystemPrompt =
    R"PROMPT(You are an extremely smart, thorough, and meticulous assistant. You will be given a collection of excerpts from one or more sources. Each excerpt is preceded by a label like [[1]], and each sentence in the excerpts has an ID. You will also be given a question of the form "Is there any information in the excerpts that indicates <proposition>?" Your task is to answer the question.

Note the following rules:
- Sometimes the proposition can be further decomposed into sub-propositions. For example, if the proposition is "There have been advancements in clean energy and desalination technologies," the sub-propositions are: "There have been advancements in clean energy" and "There have been advancements in desalination technologies." If information in the excerpts strongly implies the truth or falsehood of at least one sub-proposition, it should be included in your answer.
- You will only include information that STRONGLY implies a sub-proposition's truth or falsehood. You will NOT include weak implications. If you are not sure whether a sub-proposition is a STRONG or WEAK implication, you should defer towards including it in your answer.
- You will put yourself in the shoes of a careful reader who interprets the text holistically, considering both explicit statements and implied meaning. For example, if the claim is "John emphasizes the importance of mentorship programs", and John never explicitly says that mentorship programs are important but it's clear that he values them because he speaks of his attempts to establish mentorship programs and he comes across as passionate about them, then a careful reader would find that the proposition is strongly implied.
- If the proposition is something like "John found X", "John reported X", "John emphasizes X", etc. (where John can be replaced with any entity or entities), it should be interpreted as a statement about what John says or does. For example, if the proposition is "John highlights that transparent communication is a critical part of Project Alpha", and the excerpts indicate that transparent communication is a critical part of Project Alpha, but they are missing the critical context that this is something John highlights, then they would NOT strongly imply the truth or falsehood of the proposition. Let's call this the Statements and Actions Rule.
- You will NOT use any external knowledge beyond what is stated in the provided excerpts.
- It is EXTREMELY important that you cite the correct IDs. You will be heavily penalized if you attribute information to the wrong ID.

Your output must adhere to the following format exactly.
# Question: <insert full question>
# Proposition: <insert proposition>

## Step 1: Decompose proposition into sub-propositions that cannot be further decomposed (two rounds)
<Decompose the proposition (P) into a list of independent sub-propositions SP = [SP1, SP2, ...]. If the proposition cannot be decomposed into multiple independent sub-propositions, return a single-label list. Make sure to follow the Statements and Actions Rule. Ensure that the SP do not contain any unverifiable components (e.g., "extensive", "significant", "substantial", etc.) from P. You will do this in two rounds, to ensure that the sub-propositions cannot be decomposed any further. For example:
P = "As the CEO of Company X, John's frequent emphasis on the importance of solar and wind energy has contributed to their mainstream acceptance."
Round 1: SP without unverifiable components = [
"John is the CEO of Company X",
"John has emphasized the importance of solar and wind energy",
"John's emphasis on the importance of solar and wind energy has contributed to their mainstream acceptance"
]
Round 2: SP without unverifiable components = [
"John is the CEO of Company X",
"John has emphasized the importance of solar energy",
"John has emphasized the importance of wind energy",
"John's emphasis on the importance of solar energy has contributed to its mainstream acceptance",
"John's emphasis on the importance of wind energy has contributed to its mainstream acceptance"
]>

## Step 2: Provide an overview of sentences
<Provide an accurate overview of the sentences in the excerpts with respect to the question, without adding any interpretations or making any assumptions. The overview should be fully entailed by the excerpts. For example, if the question asks whether there have been advancements in clean energy and a sentence says there is a potential for advancements in clean energy, the overview will NOT say "mentions advancements in clean energy" as this misrepresents the sentence; it will say "mentions a potential for advancements in clean energy". It can be very helpful to organize the sentences by excerpt. Provide a point for each sentence WITHOUT quoting it. If there aren't any relevant sentences, state "NO RELEVANT SENTENCES" and terminate your output here. It is EXTREMELY important that you do not overlook any relevant sentences.>

## Step 3: Test each sentence or each range of sentences
<For each sentence or range of sentences you identified in Step 2, print the sentence ID or range of sentence IDs then complete ALL of the bulleted statements below. If it's not possible to make a good faith completion for a statement (i.e., you should NOT claim that the sentence states something when it does not, or that it fails to state something when it does), you should put "N/A" for that statement. Remember that you are NOT allowed to use any information outside of the provided excerpts. You MUST cover ALL of the sentences or ranges of sentences you identified in Step 2.
- SP = <insert the SP from Step 1 that is most relevant to the sentence or range of sentences>
- One might use the following quote to argue that the sentence(s) strongly implies (NOT necessarily explicitly states) the truth or falsehood of SP: "..."
- One might use the following quote(s) from the remaining sentence ID(s) in the excerpts as additional context: "..." or "N/A"
- A careful reader trained to look for STRONG IMPLICATIONS, which is a weaker standard than explicit statements, and to consider the sentence(s) holistically would reason as follows: <insert step-by-step reasoning, then clearly state the conclusion about whether or not it could be interpreted as a strong implication; remember that if you're not sure whether it's a strong implication, you should defer towards including it>.>

## Step 4: Final submission
<Insert EITHER (1) "The excerpts do not contain any information that strongly implies any sub-proposition" OR (2) "The following sentences provide a strong implication: [<insert ALL sentence IDs where strong implication is the conclusion from Step 3; do NOT include any excerpt labels, e.g., [[1]]:5 is incorrect vs. 5 is correct; ranges are allowed for consecutive sentence IDs, e.g., 5-10>] with the following sentence(s) providing essential context: [<insert ALL sentence IDs needed as context for the sentence IDs that provide a strong implication; if no context is needed because the sentence IDs independently provide strong implication, leave this empty>] Here is a complete summary covering ALL information in the sentence(s) that is relevant to at least one sub-proposition and ALL context necessary to understand them and their connection to the sub-proposition(s), without mentioning what is implied or indicated: <insert an accurate description of the information contained in the sentence(s) and their connection to the sub-proposition(s); always use full names for entities when they are provided; do NOT just quote the sentences; do not speculate about what is implied or indicated.> Here are some comments on what is missing or unclear: <insert here, or "N/A">)PROMPT";

inline constexpr const char* kVerdictSystemPrompt =
    R"PROMPT(You are an extremely smart, thorough, and meticulous assistant. You will be given a collection of excerpts from one or more sources. Each excerpt is preceded by a label like [[1]], and each sentence in the excerpts has an ID. You will also be given a claim. Your task is to answer the following question: Do the excerpts justify the entire claim?

In order for the excerpts to justify the entire claim, the excerpts must STRONGLY imply that the entire claim is true. This means that a careful reader of the excerpts would naturally infer the entire claim without needing to make any assumptions or access any external information. Note that strong implication is a weaker standard than explicit statement. Also note that WEAK implication is NOT sufficient. For example, if the claim is "John highlights the importance of collaboration in driving innovation" and the only relevant evidence in the excerpts is that John worked on several team projects, the excerpts would NOT justify the entire claim.

There are 4 possible cases where the excerpts do NOT justify the entire claim:
1. The excerpts contradict at least one part of the claim
2. The excerpts strongly imply that at least one part of the claim is false
3. At least one part of the claim is only weakly implied by the excerpts
4. At least one part of the claim is not addressed by the excerpts

Note the following rules:
- The claim is extracted from an answer to a question about a collection of documents. Therefore, if the claim is something like "X is mentioned" or "X is discussed," it should be interpreted as a statement about what is mentioned or discussed in the documents.
- If the claim is something like "John found X", "John reported X", "John emphasizes X", etc. (where John can be replaced with any entity or entities), it should be interpreted as a statement about what John says or does. For example, if the claim is "John highlights that transparent communication is a critical part of Project Alpha", and the excerpts indicate that transparent communication is a critical part of Project Alpha, but they are missing the critical context that this is something John highlights, then they would NOT justify the entire claim. Let's call this the Statements and Actions Rule.
- You will NOT use any external knowledge beyond what is stated in the provided excerpts.
- You will put yourself in the shoes of a careful reader who interprets the text holistically, considering both explicit statements and implied meaning. For example, if the claim is "John emphasizes the importance of mentorship programs", and John never explicitly says in the text that mentorship programs are important but it's clear that he values them because he speaks of his attempts to establish mentorship programs and he comes across as passionate about them, then a careful reader would find that the excerpts justify the entire claim.
- You will operate under the assumption that the excerpts contain all information required to make a determination. For example, if the claim is "John led three teams" and the excerpts are from an interview where John only mentions one team that he led, you will NOT argue that the excerpts do not provide a comprehensive list of all teams that John led so a determination cannot be made. Instead, you will consider the excerpts to be the only source of truth and since they only support the conclusion that John led one team, the excerpts do NOT justify the entire claim. Similarly, if one source in the excerpts provides a list of teams and another source indicates that some teams were led by John, it IS valid to cross-reference the lists to determine the number of teams John led.

Your output must adhere to the following format exactly. Do NOT remove the instructions.
1: Claim = <insert claim>

2: Does the Claim have multiple possible interpretations? If yes, specify them, then clearly state which one you believe most people would agree with - you will use this interpretation for the rest of your output. If there are distinct aspects of the Claim that must be true for the Claim to be true, enumerate them (e.g., "John worked at (1) Company A and (2) Company B"). Also identify any unverifiable components of the Claim (e.g., "extensive", "significant", "substantial", etc.) Print "ClarifiedClaim = <insert clarified version of the Claim>".

3: Quote the relevant sentences in the text with respect to the ClarifiedClaim without any interpretations or judgments, making sure to include the sentence IDs. Do NOT cover sentences about the lack of information, e.g., "there is no explicit mention of X". If there aren't any relevant sentences, state "NO RELEVANT SENTENCES" and terminate your output here. If there are likely more than 10 relevant sentences, pick the 10 most important ones.
<insert stream of consciousness thought process; use bullet points or numbered lists if needed>

4: Identify ALL pieces of evidence from step 3 that are CONFLICTING (i.e., one piece of evidence indicates X is true while another indicates X is false), outline the possible resolutions, and determine whether or not the excerpts STRONGLY imply that one resolution is preferred over the other(s). If yes, clearly state which one is preferred, and use this information in your final deliberation. If not, you will DISCARD this issue in your final deliberation (i.e., you will treat it as if the resolution is unknown, so it cannot be used to make a determination). Make sure to include the sentence IDs in your output.

5: Identify ALL pieces of evidence from step 3 that are DEBATABLE (i.e., people could reasonably disagree on what the evidence means, what it implies with respect to the ClarifiedClaim, and/or the strength of the implication), outline the possible conflicting positions, and determine whether or not one position is more compelling than the other(s). If yes, clearly state which one is more compelling, and use this information in your final deliberation. If not, you will DISCARD this issue in your final deliberation (i.e., you will treat it as if the resolution is unknown, so it cannot be used to make a determination). Make sure to include the sentence IDs in your output.

6: List ALL sentence IDs from step 3 that were NOT included in steps 4 and 5, then quote them. These pieces of evidence are CLEAR in their meaning and implication for the ClarifiedClaim.

7: Given your analysis of the evidence in steps 4-6, and considering that there may be parts of the ClarifiedClaim that are NOT addressed by the evidence, does the NON-DISCARDED evidence from the excerpts justify (i.e., STRONGLY imply) the ENTIRE claim? Remember that strong implication is a weaker standard than explicit statement, but weak implication and speculations are NOT sufficient. First, walk through your reasoning step-by-step; do NOT jump straight to the conclusion. Then print, "I submit the following answer: <insert 'Excerpts justify the entire ClarifiedClaim' or 'Excerpts do not justify the entire ClarifiedClaim' or 'Cannot determine if Excerpts justify the entire ClarifiedClaim'>. Only use 'Cannot determine if Excerpts justify the entire ClarifiedClaim' if all evidence was DISCARDED.)PROMPT";

// One node's contribution to a prompt. `label` is the [[k]] excerpt label and
// every sentence carries a prompt-wide 1-based id.
struct ExcerptSentence {
  Sentence sentence;
  int prompt_id = 0;
};

struct Excerpt {
  int label = 0;
  NodeId node;
  bool is_root = false;
  std::vector<ExcerptSentence> sentences;
};

struct ExcerptBundle {
  std::vector<Excerpt> excerpts;

  int total_sentences() const {
    int n = 0;
    for (const auto& e : excerpts) n += static_cast<int>(e.sentences.size());
    return n;
  }

  const ExcerptSentence* find(int prompt_id) const {
    for (const auto& e : excerpts)
      for (const auto& s : e.sentences)
        if (s.prompt_id == prompt_id) return &s;
    return nullptr;
  }

  bool any_root() const {
    for (const auto& e : excerpts)
      if (e.is_root) return true;
    return false;
  }
};

struct BundleGroup {
  NodeId node;
  bool is_root = false;
  std::vector<Sentence> sentences;
};

inline ExcerptBundle make_bundle(const std::vector<BundleGroup>& groups) {
  ExcerptBundle bundle;
  int label = 1;
  int prompt_id = 1;
  for (const auto& g : groups) {
    if (g.sentences.empty()) continue;
    Excerpt e;
    e.label = label++;
    e.node = g.node;
    e.is_root = g.is_root;
    for (const auto& s : g.sentences) e.sentences.push_back({s, prompt_id++});
    bundle.excerpts.push_back(std::move(e));
  }
  return bundle;
}

inline std::string render_excerpts(const ExcerptBundle& bundle) {
  std::string out;
  bool first = true;
  for (const auto& e : bundle.excerpts) {
    if (!first) out += "\n\n";
    first = false;
    out += "[[" + std::to_string(e.label) + "]]";
    for (const auto& s : e.sentences)
      out += "\n" + std::to_string(s.prompt_id) + ": " + s.sentence.text;
  }
  return out;
}

struct RenderedPrompt {
  std::string system_prompt;
  std::string user_prompt;
};

inline std::string evidence_question(const std::string& claim_text) {
  return "Is there any information in the excerpts that indicates " + claim_text + "?";
}

inline RenderedPrompt render_evidence_prompt(const ExcerptBundle& bundle,
                                             const std::string& claim_text,
                                             const std::vector<std::string>& sub_claims) {
  std::string sp;
  if (sub_claims.empty()) {
    sp = "- " + claim_text;
  } else {
    bool first = true;
    for (const auto& sc : sub_claims) {
      if (!first) sp += "\n";
      first = false;
      sp += "- " + sc;
    }
  }
  RenderedPrompt out;
  out.system_prompt = kEvidenceSystemPrompt;
  out.user_prompt = "Excerpts:\n" + render_excerpts(bundle) + "\n\nQuestion:\n" +
                    evidence_question(claim_text) +
                    "\n\nExample sub-propositions (SP) that may need to be decomposed "
                    "further:\n" +
                    sp;
  return out;
}

inline RenderedPrompt render_verdict_prompt(const ExcerptBundle& bundle,
                                            const std::string& claim_text) {
  RenderedPrompt out;
  out.system_prompt = kVerdictSystemPrompt;
  out.user_prompt = "Excerpts:\n" + render_excerpts(bundle) + "\n\nClaim:\n" + claim_text;
  return out;
}

struct EvidenceSelection {
  std::set<int> implication_ids;
  std::set<int> context_ids;
  std::string summary;
  std::string comments;
  bool no_relevant = false;
  int discarded_ids = 0;

  std::set<int> selected() const {
    std::set<int> out = implication_ids;
    out.insert(context_ids.begin(), context_ids.end());
    return out;
  }
};

namespace detail {

inline constexpr const char* kImplicationMarker =
    "The following sentences provide a strong implication";
inline constexpr const char* kContextMarker =
    "with the following sentence(s) providing essential context";
inline constexpr const char* kSummaryMarker = "Here is a complete summary covering";
inline constexpr const char* kCommentsMarker =
    "Here are some comments on what is missing or unclear";
inline constexpr const char* kNoRelevantMarker = "NO RELEVANT SENTENCES";
inline constexpr const char* kNoImplicationMarker =
    "The excerpts do not contain any information that strongly implies any sub-proposition";
inline constexpr const char* kSubmitMarker = "I submit the following answer";

// Extracts the bracketed list starting at the first '[' in
// text[from, to), honoring nested "[[k]]" label fragments.
inline std::optional<std::string> bracket_list(const std::string& text, size_t from, size_t to) {
  size_t open = text.find('[', from);
  if (open == std::string::npos || open >= to) return std::nullopt;
  int depth = 0;
  for (size_t i = open; i < to; ++i) {
    if (text[i] == '[') ++depth;
    if (text[i] == ']') {
      --depth;
      if (depth == 0) return text.substr(open + 1, i - open - 1);
    }
  }
  return std::nullopt;
}

inline bool parse_int(std::string_view s, long& out) {
  s = trim(s);
  if (s.empty()) return false;
  long v = 0;
  for (char c : s) {
    if (c < '0' || c > '9') return false;
    if (v > 100000000) return false;
    v = v * 10 + (c - '0');
  }
  out = v;
  return true;
}

// Accepts "n", "a-b" ranges, and the "[[k]]:n" shape the prompt explicitly
// forbids but models still emit; anything else counts as discarded.
inline void parse_id_token(const std::string& token, const ExcerptBundle& bundle,
                           std::set<int>& out, int& discarded) {
  std::string t = trim(token);
  if (t.empty()) return;

  auto valid = [&](long id) { return id >= 1 && bundle.find(static_cast<int>(id)) != nullptr; };

  if (t.size() >= 2 && t[0] == '[' && t[1] == '[') {
    size_t close = t.find("]]");
    if (close != std::string::npos) {
      long label = 0;
      if (parse_int(t.substr(2, close - 2), label)) {
        bool label_ok = false;
        for (const auto& e : bundle.excerpts) label_ok = label_ok || e.label == label;
        size_t colon = t.find(':', close + 2);
        if (label_ok && colon != std::string::npos) {
          long id = 0;
          if (parse_int(t.substr(colon + 1), id) && valid(id)) {
            out.insert(static_cast<int>(id));
            return;
          }
        }
      }
    }
    ++discarded;
    return;
  }

  size_t dash = t.find('-');
  if (dash != std::string::npos && dash > 0) {
    long a = 0, b = 0;
    if (parse_int(t.substr(0, dash), a) && parse_int(t.substr(dash + 1), b) && a <= b) {
      long hi = std::min<long>(b, bundle.total_sentences());
      bool any_dropped = b > hi || a < 1;
      for (long id = std::max<long>(a, 1); id <= hi; ++id) {
        if (valid(id))
          out.insert(static_cast<int>(id));
        else
          any_dropped = true;
      }
      if (any_dropped) ++discarded;
      return;
    }
    ++discarded;
    return;
  }

  long id = 0;
  if (parse_int(t, id) && valid(id)) {
    out.insert(static_cast<int>(id));
    return;
  }
  ++discarded;
}

inline void parse_id_list(const std::string& list, const ExcerptBundle& bundle,
                          std::set<int>& out, int& discarded) {
  std::string cur;
  int bracket_depth = 0;
  auto flush = [&]() {
    parse_id_token(cur, bundle, out, discarded);
    cur.clear();
  };
  for (char c : list) {
    if (c == '[') ++bracket_depth;
    if (c == ']') --bracket_depth;
    if (c == ',' && bracket_depth <= 0) {
      flush();
      continue;
    }
    cur.push_back(c);
  }
  flush();
}

}  // namespace detail

// Reads the final Step-4 submission out of an Evidence Selection response.
// Only ids that resolve inside `bundle` survive; everything else is dropped
// and tallied in `discarded_ids`.
inline EvidenceSelection parse_evidence_response(const std::string& text,
                                                 const ExcerptBundle& bundle) {
  size_t imp = text.rfind(detail::kImplicationMarker);
  size_t no1 = text.rfind(detail::kNoRelevantMarker);
  size_t no2 = text.rfind(detail::kNoImplicationMarker);
  size_t no_pos = std::string::npos;
  if (no1 != std::string::npos) no_pos = no1;
  if (no2 != std::string::npos && (no_pos == std::string::npos || no2 > no_pos)) no_pos = no2;

  if (imp == std::string::npos && no_pos == std::string::npos)
    throw PromptError(PromptError::Kind::UnparseableResponse,
                      "evidence response has no final submission");

  EvidenceSelection out;
  if (imp == std::string::npos || (no_pos != std::string::npos && no_pos > imp)) {
    out.no_relevant = true;
    return out;
  }

  size_t ctx = text.find(detail::kContextMarker, imp);
  size_t sum = text.find(detail::kSummaryMarker, imp);
  size_t com = text.find(detail::kCommentsMarker, imp);

  size_t imp_end = std::min({ctx, sum, com, text.size()});
  if (auto list = detail::bracket_list(text, imp + std::strlen(detail::kImplicationMarker),
                                       imp_end))
    detail::parse_id_list(*list, bundle, out.implication_ids, out.discarded_ids);

  if (ctx != std::string::npos) {
    size_t ctx_end = std::min({sum == std::string::npos || sum < ctx ? text.size() : sum,
                               com == std::string::npos || com < ctx ? text.size() : com,
                               text.size()});
    if (auto list = detail::bracket_list(text, ctx + std::strlen(detail::kContextMarker),
                                         ctx_end))
      detail::parse_id_list(*list, bundle, out.context_ids, out.discarded_ids);
  }

  if (sum != std::string::npos) {
    size_t colon = text.find(':', sum + std::strlen(detail::kSummaryMarker));
    if (colon != std::string::npos) {
      size_t end = com != std::string::npos && com > colon ? com : text.size();
      out.summary = trim(text.substr(colon + 1, end - colon - 1));
    }
  }
  if (com != std::string::npos) {
    size_t colon = text.find(':', com + std::strlen(detail::kCommentsMarker));
    if (colon != std::string::npos) {
      out.comments = trim(text.substr(colon + 1));
      if (out.comments == "N/A") out.comments.clear();
    }
  }
  return out;
}

struct VerdictParse {
  Verdict verdict = Verdict::Inconclusive;
  std::string reasoning;
};

inline VerdictParse parse_verdict_response(const std::string& text) {
  size_t pos = text.rfind(detail::kSubmitMarker);
  if (pos == std::string::npos)
    throw PromptError(PromptError::Kind::UnparseableResponse,
                      "verdict response has no submitted answer");
  std::string answer = text.substr(pos);
  VerdictParse out;
  out.reasoning = trim(text.substr(0, pos));
  if (answer.find("do not justify the entire ClarifiedClaim") != std::string::npos)
    out.verdict = Verdict::NotFullySupported;
  else if (answer.find("Cannot determine if Excerpts justify the entire ClarifiedClaim") !=
           std::string::npos)
    out.verdict = Verdict::Inconclusive;
  else if (answer.find("justify the entire ClarifiedClaim") != std::string::npos)
    out.verdict = Verdict::FullySupported;
  else
    throw PromptError(PromptError::Kind::UnparseableResponse,
                      "verdict response submitted an unknown answer");
  return out;
}

// Packs sentences into batches of at most `limit`, keeping input order. A node
// is only split across batches when its sentences alone exceed the limit; the
// tail chunk of a split stays open for the following nodes.
inline std::vector<std::vector<Sentence>> batch_sentences(const std::vector<Sentence>& sentences,
                                                          int limit) {
  if (limit < 1)
    throw PromptError(PromptError::Kind::LimitTooSmall, "batch limit must be >= 1");
  std::vector<std::vector<Sentence>> batches;
  std::vector<Sentence> cur;

  size_t i = 0;
  while (i < sentences.size()) {
    size_t j = i;
    while (j < sentences.size() && sentences[j].node == sentences[i].node) ++j;
    size_t group = j - i;

    if (cur.size() + group <= static_cast<size_t>(limit)) {
      cur.insert(cur.end(), sentences.begin() + i, sentences.begin() + j);
    } else {
      if (!cur.empty()) {
        batches.push_back(std::move(cur));
        cur.clear();
      }
      size_t k = i;
      while (group - (k - i) > static_cast<size_t>(limit)) {
        batches.emplace_back(sentences.begin() + k, sentences.begin() + k + limit);
        k += limit;
      }
      cur.assign(sentences.begin() + k, sentences.begin() + j);
      if (cur.size() == static_cast<size_t>(limit)) {
        batches.push_back(std::move(cur));
        cur.clear();
      }
    }
    i = j;
  }
  if (!cur.empty()) batches.push_back(std::move(cur));
  return batches;
}

// Verdict input; root nodes contribute their full text, everything else the
// summaries produced during Evidence Selection. Root excerpts come first.
inline ExcerptBundle build_verdict_input(const ProcessGraph& graph,
                                         const std::set<NodeId>& nodes_with_ev,
                                         const std::map<NodeId, std::string>& summaries) {
  std::vector<BundleGroup> groups;
  for (const auto& id : nodes_with_ev) {
    if (!graph.is_root(id)) continue;
    groups.push_back({id, true, assign_ids(graph.node(id))});
  }
  for (const auto& id : nodes_with_ev) {
    if (graph.is_root(id)) continue;
    auto it = summaries.find(id);
    if (it == summaries.end())
      throw PromptError(PromptError::Kind::MissingSummary,
                        "no evidence summary available for node '" + id + "'");
    BundleGroup g{id, false, {}};
    int index = 1;
    for (auto& text : segment(it->second)) {
      Sentence s;
      s.node = id;
      s.index = index++;
      s.text = std::move(text);
      // summary sentences are prompt-only; they never carry a graph sid
      g.sentences.push_back(std::move(s));
    }
    if (!g.sentences.empty()) groups.push_back(std::move(g));
  }
  return make_bundle(groups);
}

namespace detail {

inline ExcerptBundle keep_ids(const ExcerptBundle& bundle, const std::set<int>& ids) {
  std::vector<BundleGroup> groups;
  for (const auto& e : bundle.excerpts) {
    BundleGroup g{e.node, e.is_root, {}};
    for (const auto& s : e.sentences)
      if (ids.count(s.prompt_id)) g.sentences.push_back(s.sentence);
    if (!g.sentences.empty()) groups.push_back(std::move(g));
  }
  return make_bundle(groups);
}

inline ExcerptBundle truncate_roots_first(const ExcerptBundle& bundle, int limit) {
  std::vector<const Excerpt*> order;
  for (const auto& e : bundle.excerpts)
    if (e.is_root) order.push_back(&e);
  for (const auto& e : bundle.excerpts)
    if (!e.is_root) order.push_back(&e);
  std::vector<BundleGroup> groups;
  int taken = 0;
  for (const Excerpt* e : order) {
    if (taken >= limit) break;
    BundleGroup g{e->node, e->is_root, {}};
    for (const auto& s : e->sentences) {
      if (taken >= limit) break;
      g.sentences.push_back(s.sentence);
      ++taken;
    }
    if (!g.sentences.empty()) groups.push_back(std::move(g));
  }
  return make_bundle(groups);
}

}  // namespace detail

// Reduces an over-limit verdict input by re-running evidence selection over
// the current bundle up to `max_reruns` times; if it still does not fit, keeps
// the largest subset that does, taking root excerpts first and then following
// bundle order.
inline ExcerptBundle shrink_verdict_input(
    const ExcerptBundle& bundle, int limit, int max_reruns,
    const std::function<EvidenceSelection(const ExcerptBundle&)>& reselect) {
  if (limit < 1)
    throw PromptError(PromptError::Kind::LimitTooSmall, "verdict input limit must be >= 1");
  ExcerptBundle cur = bundle;
  int reruns = 0;
  while (cur.total_sentences() > limit && reruns < max_reruns) {
    ++reruns;
    EvidenceSelection sel = reselect(cur);
    std::set<int> keep = sel.selected();
    if (sel.no_relevant || keep.empty()) break;
    ExcerptBundle next = detail::keep_ids(cur, keep);
    if (next.total_sentences() == 0 || next.total_sentences() >= cur.total_sentences()) break;
    cur = std::move(next);
  }
  if (cur.total_sentences() > limit) cur = detail::truncate_roots_first(cur, limit);
  return cur;
}

}  // namespace veritrail
