#pragma once

#include <string>
#include <vector>

#include "veritrail/lm.hpp"

namespace veritrail {

// Offline stand-in for a real model. It answers Evidence Selection prompts by
// picking every sentence that contains all content words (case-insensitive
// tokens of length >= 4) of at least one sub-proposition, and Verdict prompts
// with "justify" iff such a sentence exists for the claim. Anything that does
// not look like one of the two prompt shapes is rejected.
class SubstringOracleBackend : public LmBackend {
 public:
  GenerationResult generate(const GenerationRequest& request) override {
    const std::string& user = request.user_prompt;
    GenerationResult out;
    if (user.rfind("Excerpts:\n", 0) != 0)
      throw LmError(LmError::Kind::UnrecognizedPromptShape,
                    "user prompt does not start with an excerpts block");

    static const std::string kQuestion = "\n\nQuestion:\n";
    static const std::string kClaim = "\n\nClaim:\n";
    size_t qpos = user.find(kQuestion);
    size_t cpos = user.find(kClaim);
    if (qpos != std::string::npos)
      out.text = answer_evidence(user, qpos);
    else if (cpos != std::string::npos)
      out.text = answer_verdict(user, cpos);
    else
      throw LmError(LmError::Kind::UnrecognizedPromptShape,
                    "user prompt has neither a question nor a claim section");

    out.usage.prompt_tokens =
        count_ws_tokens(request.system_prompt) + count_ws_tokens(request.user_prompt);
    out.usage.completion_tokens = count_ws_tokens(out.text);
    return out;
  }

 private:
  struct PromptSentence {
    int id = 0;
    std::string text;
  };

  static std::vector<PromptSentence> parse_excerpts(const std::string& user, size_t end) {
    std::vector<PromptSentence> out;
    size_t pos = std::string("Excerpts:\n").size();
    while (pos < end) {
      size_t eol = user.find('\n', pos);
      if (eol == std::string::npos || eol > end) eol = end;
      std::string line = user.substr(pos, eol - pos);
      pos = eol + 1;
      size_t colon = line.find(": ");
      if (colon == std::string::npos || line.rfind("[[", 0) == 0) continue;
      bool digits = colon > 0 && colon <= 8;
      for (size_t i = 0; i < colon; ++i)
        digits = digits && line[i] >= '0' && line[i] <= '9';
      if (!digits) continue;
      out.push_back({std::stoi(line.substr(0, colon)), line.substr(colon + 2)});
    }
    return out;
  }

  static std::vector<std::string> content_words(const std::string& text) {
    std::vector<std::string> out;
    for (auto& t : tokenize(text))
      if (t.size() >= 4) out.push_back(std::move(t));
    return out;
  }

  static bool supports(const std::string& sentence, const std::string& candidate) {
    auto words = content_words(candidate);
    if (words.empty()) return false;
    for (const auto& w : words)
      if (!contains_ci(sentence, w)) return false;
    return true;
  }

  static std::string render_ids(const std::vector<int>& ids) {
    std::string out = "[";
    size_t i = 0;
    bool first = true;
    while (i < ids.size()) {
      size_t j = i;
      while (j + 1 < ids.size() && ids[j + 1] == ids[j] + 1) ++j;
      if (!first) out += ", ";
      first = false;
      if (j > i)
        out += std::to_string(ids[i]) + "-" + std::to_string(ids[j]);
      else
        out += std::to_string(ids[i]);
      i = j + 1;
    }
    return out + "]";
  }

  std::string answer_evidence(const std::string& user, size_t qpos) const {
    static const std::string kQuestion = "\n\nQuestion:\n";
    static const std::string kSubClaims =
        "\n\nExample sub-propositions (SP) that may need to be decomposed further:\n";
    static const std::string kIndicates =
        "Is there any information in the excerpts that indicates ";
    size_t spos = user.find(kSubClaims, qpos);
    if (spos == std::string::npos)
      throw LmError(LmError::Kind::UnrecognizedPromptShape,
                    "evidence prompt is missing the sub-proposition section");
    std::string question = user.substr(qpos + kQuestion.size(), spos - qpos - kQuestion.size());
    if (question.rfind(kIndicates, 0) != 0 || question.empty() || question.back() != '?')
      throw LmError(LmError::Kind::UnrecognizedPromptShape,
                    "evidence prompt question has an unexpected form");
    std::string proposition =
        question.substr(kIndicates.size(), question.size() - kIndicates.size() - 1);

    std::vector<std::string> candidates;
    for (const auto& raw : segment_lines(user.substr(spos + kSubClaims.size()))) {
      std::string line = raw.rfind("- ", 0) == 0 ? raw.substr(2) : raw;
      if (!trim(line).empty()) candidates.push_back(trim(line));
    }
    candidates.push_back(proposition);

    std::vector<int> ids;
    std::vector<std::string> texts;
    for (const auto& s : parse_excerpts(user, qpos)) {
      for (const auto& c : candidates) {
        if (supports(s.text, c)) {
          ids.push_back(s.id);
          texts.push_back(s.text);
          break;
        }
      }
    }
    if (ids.empty())
      return "# Question: " + question + "\n# Proposition: " + proposition +
             "\n\n## Step 2: Provide an overview of sentences\nNO RELEVANT SENTENCES";

    std::string summary;
    for (size_t i = 0; i < texts.size(); ++i) {
      if (i) summary += " ";
      summary += texts[i];
    }
    return "# Question: " + question + "\n# Proposition: " + proposition +
           "\n\n## Step 4: Final submission\nThe following sentences provide a strong "
           "implication: " +
           render_ids(ids) +
           " with the following sentence(s) providing essential context: [] Here is a "
           "complete summary covering the information in the relevant sentences: " +
           summary + " Here are some comments on what is missing or unclear: N/A";
  }

  std::string answer_verdict(const std::string& user, size_t cpos) const {
    static const std::string kClaim = "\n\nClaim:\n";
    std::string claim = user.substr(cpos + kClaim.size());
    bool supported = false;
    for (const auto& s : parse_excerpts(user, cpos))
      supported = supported || supports(s.text, claim);
    std::string answer = supported ? "Excerpts justify the entire ClarifiedClaim"
                                   : "Excerpts do not justify the entire ClarifiedClaim";
    return "1: Claim = " + claim +
           "\n\n7: The evidence was checked for every part of the claim.\nI submit the "
           "following answer: " +
           answer + ".";
  }

  static std::vector<std::string> segment_lines(const std::string& text) {
    std::vector<std::string> out;
    size_t pos = 0;
    while (pos <= text.size()) {
      size_t eol = text.find('\n', pos);
      if (eol == std::string::npos) {
        out.push_back(text.substr(pos));
        break;
      }
      out.push_back(text.substr(pos, eol - pos));
      pos = eol + 1;
    }
    return out;
  }
};

}  // namespace veritrail
