#pragma once

#include <deque>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "veritrail/segmentation.hpp"

namespace veritrail {

class ClaimError : public Error {
 public:
  using Error::Error;
};

struct Claim {
  std::string id;
  std::string text;
};

// Produces the claims to verify from the terminal node's text.
class ClaimExtractor {
 public:
  virtual ~ClaimExtractor() = default;
  virtual std::vector<Claim> extract(const std::string& terminal_text) = 0;
};

// One claim per terminal sentence, ids c1, c2, ...
class NaiveSentenceExtractor : public ClaimExtractor {
 public:
  std::vector<Claim> extract(const std::string& terminal_text) override {
    std::vector<Claim> out;
    int i = 1;
    for (auto& s : segment(terminal_text)) {
      out.push_back({"c" + std::to_string(i), std::move(s)});
      ++i;
    }
    return out;
  }
};

// Hands back a preloaded claim list, ignoring the terminal text.
class PassthroughExtractor : public ClaimExtractor {
 public:
  explicit PassthroughExtractor(std::vector<Claim> claims) : claims_(std::move(claims)) {}

  std::vector<Claim> extract(const std::string&) override { return claims_; }

 private:
  std::vector<Claim> claims_;
};

inline std::vector<Claim> extract_claims(const std::string& terminal_text,
                                         ClaimExtractor& extractor) {
  return extractor.extract(terminal_text);
}

inline std::string normalize_claim_text(std::string_view text) {
  return to_lower(collapse_whitespace(text));
}

// Maps a claim to its sub-propositions; a single-element result means the
// input needs no further decomposition.
using Decomposer = std::function<std::vector<std::string>(const std::string&)>;

struct SubClaimSet {
  std::string claim_id;
  std::vector<std::string> members;
  int attempts = 0;
  bool incomplete = false;
  std::string warning;
};

// Breadth-first decomposition with a hard cap on decomposer calls. The result
// always contains the original claim; duplicates (after casefolding and
// whitespace collapsing) are kept once. A decomposer exception stops the walk
// and flags the partial result rather than losing the work done so far.
inline SubClaimSet decompose(const Claim& claim, const Decomposer& decomposer,
                             int max_attempts = 20) {
  if (max_attempts < 1) throw ClaimError("max_attempts must be >= 1");
  SubClaimSet out;
  out.claim_id = claim.id;
  std::set<std::string> seen;
  auto add = [&](const std::string& text) {
    if (seen.insert(normalize_claim_text(text)).second) {
      out.members.push_back(text);
      return true;
    }
    return false;
  };
  add(claim.text);

  std::deque<std::string> queue{claim.text};
  while (!queue.empty() && out.attempts < max_attempts) {
    std::string current = queue.front();
    queue.pop_front();
    std::vector<std::string> parts;
    try {
      ++out.attempts;
      parts = decomposer(current);
    } catch (const std::exception& e) {
      out.incomplete = true;
      out.warning = "decomposer failed on '" + current + "': " + e.what();
      return out;
    }
    if (parts.size() <= 1) {
      if (parts.size() == 1) add(parts.front());
      continue;
    }
    for (const auto& p : parts)
      if (add(p)) queue.push_back(p);
  }
  if (!queue.empty()) {
    out.incomplete = true;
    out.warning = "decomposition attempt budget exhausted";
  }
  return out;
}

inline std::vector<Claim> claims_from_jsonl(const std::string& text) {
  std::vector<Claim> out;
  std::set<std::string> ids;
  size_t lineno = 0;
  size_t pos = 0;
  while (pos <= text.size()) {
    size_t end = text.find('\n', pos);
    std::string line =
        end == std::string::npos ? text.substr(pos) : text.substr(pos, end - pos);
    ++lineno;
    if (!trim(line).empty()) {
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(line);
      } catch (const nlohmann::json::exception& e) {
        throw ClaimError("claims line " + std::to_string(lineno) + ": " + e.what());
      }
      if (!j.is_object() || !j.contains("id") || !j.contains("text"))
        throw ClaimError("claims line " + std::to_string(lineno) +
                         ": expected an object with id and text");
      Claim c{j.at("id").get<std::string>(), j.at("text").get<std::string>()};
      if (!ids.insert(c.id).second)
        throw ClaimError("duplicate claim id '" + c.id + "'");
      out.push_back(std::move(c));
    }
    if (end == std::string::npos) break;
    pos = end + 1;
  }
  return out;
}

inline std::string claims_to_jsonl(const std::vector<Claim>& claims) {
  std::string out;
  for (const auto& c : claims) {
    nlohmann::ordered_json j;
    j["id"] = c.id;
    j["text"] = c.text;
    out += j.dump();
    out += '\n';
  }
  return out;
}

}  // namespace veritrail
