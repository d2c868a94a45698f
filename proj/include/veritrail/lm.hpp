#pragma once

#include <chrono>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "veritrail/common.hpp"

namespace veritrail {

class LmError : public Error {
 public:
  enum class Kind {
    Timeout,
    RateLimited,
    MalformedResponse,
    AuthMissing,
    ServerError,
    TransportError,
    UnrecognizedPromptShape,
  };

  LmError(Kind kind, const std::string& msg) : Error(msg), kind(kind) {}

  Kind kind;
};

struct GenerationRequest {
  std::string system_prompt;
  std::string user_prompt;
  double temperature = 0.0;
  int max_output_tokens = 2048;
  std::optional<long> seed;
};

struct TokenUsage {
  long prompt_tokens = 0;
  long completion_tokens = 0;
};

struct GenerationResult {
  std::string text;
  TokenUsage usage;
  std::chrono::milliseconds latency{0};
};

class LmBackend {
 public:
  virtual ~LmBackend() = default;
  virtual GenerationResult generate(const GenerationRequest& request) = 0;
};

inline long count_ws_tokens(std::string_view s) {
  long n = 0;
  bool in_token = false;
  for (char c : s) {
    bool ws = std::isspace(static_cast<unsigned char>(c)) != 0;
    if (!ws && !in_token) ++n;
    in_token = !ws;
  }
  return n;
}

// Canned responses in request order; used to re-drive recorded sessions.
class ReplayBackend : public LmBackend {
 public:
  explicit ReplayBackend(std::vector<std::string> transcript)
      : transcript_(std::move(transcript)) {}

  GenerationResult generate(const GenerationRequest& request) override {
    std::lock_guard<std::mutex> lock(mu_);
    if (cursor_ >= transcript_.size())
      throw LmError(LmError::Kind::UnrecognizedPromptShape,
                    "replay transcript exhausted after " + std::to_string(cursor_) +
                        " responses");
    GenerationResult out;
    out.text = transcript_[cursor_++];
    out.usage.prompt_tokens =
        count_ws_tokens(request.system_prompt) + count_ws_tokens(request.user_prompt);
    out.usage.completion_tokens = count_ws_tokens(out.text);
    return out;
  }

  size_t consumed() const {
    std::lock_guard<std::mutex> lock(mu_);
    return cursor_;
  }

 private:
  mutable std::mutex mu_;
  std::vector<std::string> transcript_;
  size_t cursor_ = 0;
};

struct PriceTable {
  double prompt_per_1k = 0.0;
  double completion_per_1k = 0.0;
};

// Per-claim token accounting for a verification run.
class UsageLedger {
 public:
  explicit UsageLedger(PriceTable prices = {}) : prices_(prices) {}

  void record(const std::string& claim_id, const TokenUsage& usage) {
    if (usage.prompt_tokens < 0 || usage.completion_tokens < 0)
      throw LmError(LmError::Kind::MalformedResponse,
                    "negative token counts reported for claim '" + claim_id + "'");
    std::lock_guard<std::mutex> lock(mu_);
    Row& row = rows_[claim_id];
    row.prompt_tokens += usage.prompt_tokens;
    row.completion_tokens += usage.completion_tokens;
    row.calls += 1;
  }

  struct Entry {
    std::string claim_id;
    long prompt_tokens = 0;
    long completion_tokens = 0;
    int calls = 0;
    double cost = 0.0;
  };

  std::vector<Entry> report() const {
    std::lock_guard<std::mutex> lock(mu_);
    std::vector<Entry> out;
    for (const auto& [id, row] : rows_) {
      Entry e;
      e.claim_id = id;
      e.prompt_tokens = row.prompt_tokens;
      e.completion_tokens = row.completion_tokens;
      e.calls = row.calls;
      e.cost = cost_of(row);
      out.push_back(std::move(e));
    }
    return out;
  }

  double total_cost() const {
    std::lock_guard<std::mutex> lock(mu_);
    double total = 0.0;
    for (const auto& [id, row] : rows_) total += cost_of(row);
    return total;
  }

 private:
  struct Row {
    long prompt_tokens = 0;
    long completion_tokens = 0;
    int calls = 0;
  };

  double cost_of(const Row& row) const {
    return static_cast<double>(row.prompt_tokens) / 1000.0 * prices_.prompt_per_1k +
           static_cast<double>(row.completion_tokens) / 1000.0 * prices_.completion_per_1k;
  }

  mutable std::mutex mu_;
  std::map<std::string, Row> rows_;
  PriceTable prices_;
};

}  // namespace veritrail
