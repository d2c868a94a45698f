#pragma once

#include <array>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "veritrail/graph.hpp"

namespace veritrail {

class SegmentationError : public Error {
 public:
  using Error::Error;
};

// One sentence of one node's text. `index` is 1-based within the node and
// `sid` is the stable id "node#index" used in evidence trails.
struct Sentence {
  NodeId node;
  int index = 0;
  std::string text;
  std::string sid;
};

inline std::string make_sid(const NodeId& node, int index) {
  return node + "#" + std::to_string(index);
}

inline std::pair<NodeId, int> parse_sid(std::string_view sid) {
  size_t pos = sid.rfind('#');
  if (pos == std::string_view::npos || pos == 0 || pos + 1 == sid.size())
    throw SegmentationError("malformed sentence id: '" + std::string(sid) + "'");
  int index = 0;
  for (size_t i = pos + 1; i < sid.size(); ++i) {
    char c = sid[i];
    if (c < '0' || c > '9')
      throw SegmentationError("malformed sentence id: '" + std::string(sid) + "'");
    index = index * 10 + (c - '0');
  }
  if (index < 1) throw SegmentationError("sentence index must be >= 1: '" + std::string(sid) + "'");
  return {std::string(sid.substr(0, pos)), index};
}

// Sentences plus the whitespace between them; separators.size() is always
// sentences.size() + 1 and interleaving them reproduces the input exactly.
struct Segmentation {
  std::vector<std::string> sentences;
  std::vector<std::string> separators;

  std::string reassemble() const {
    std::string out = separators.at(0);
    for (size_t i = 0; i < sentences.size(); ++i) {
      out += sentences[i];
      out += separators[i + 1];
    }
    return out;
  }
};

namespace detail {

inline bool is_ws(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

inline bool is_terminal_punct(char c) { return c == '.' || c == '!' || c == '?'; }

inline bool starts_new_sentence(std::string_view text, size_t pos) {
  if (pos >= text.size()) return false;
  unsigned char c = static_cast<unsigned char>(text[pos]);
  if (c >= 'A' && c <= 'Z') return true;
  if (c >= '0' && c <= '9') return true;
  if (c == '"' || c == '\'') return true;
  // U+201C and U+2018 opening quotes
  if (text.size() - pos >= 3 && c == 0xE2 && static_cast<unsigned char>(text[pos + 1]) == 0x80) {
    unsigned char b = static_cast<unsigned char>(text[pos + 2]);
    return b == 0x9C || b == 0x98;
  }
  return false;
}

inline bool is_known_abbreviation(std::string_view text, size_t dot) {
  static const std::set<std::string, std::less<>> kAbbrev = {
      "dr.", "mr.", "mrs.", "ms.", "st.", "vs.", "e.g.", "i.e.", "etc."};
  size_t begin = dot;
  while (begin > 0) {
    char c = text[begin - 1];
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '.')
      --begin;
    else
      break;
  }
  if (begin == dot) return false;
  return kAbbrev.count(to_lower(text.substr(begin, dot - begin + 1))) != 0;
}

}  // namespace detail

inline Segmentation segment_full(std::string_view text) {
  Segmentation out;
  if (text.empty()) {
    out.separators.push_back("");
    return out;
  }
  if (trim(text).empty()) {
    // whitespace-only input is preserved as a single sentence
    out.sentences.emplace_back(text);
    out.separators = {"", ""};
    return out;
  }

  const size_t n = text.size();
  size_t i = 0;
  while (i < n && detail::is_ws(text[i])) ++i;
  out.separators.emplace_back(text.substr(0, i));

  size_t start = i;
  auto close_sentence = [&](size_t sentence_end, size_t next_start) {
    size_t e = sentence_end;
    while (e > start && detail::is_ws(text[e - 1])) --e;
    out.sentences.emplace_back(text.substr(start, e - start));
    out.separators.emplace_back(text.substr(e, next_start - e));
    start = next_start;
  };

  while (i < n) {
    char c = text[i];
    if (c == '\n' || c == '\r') {
      size_t j = i;
      while (j < n && detail::is_ws(text[j])) ++j;
      close_sentence(i, j);
      i = j;
      continue;
    }
    if (detail::is_terminal_punct(c)) {
      if (i + 1 < n && detail::is_terminal_punct(text[i + 1])) {
        ++i;
        continue;
      }
      size_t j = i + 1;
      while (j < n && detail::is_ws(text[j])) ++j;
      bool has_ws = j > i + 1;
      if (has_ws && j == n) {
        close_sentence(i + 1, n);
        i = n;
        continue;
      }
      if (has_ws) {
        bool newline_in_run = text.find_first_of("\n\r", i + 1) < j;
        bool boundary = newline_in_run ||
                        (detail::starts_new_sentence(text, j) &&
                         !(c == '.' && detail::is_known_abbreviation(text, i)));
        if (boundary) {
          close_sentence(i + 1, j);
          i = j;
          continue;
        }
      }
    }
    ++i;
  }
  if (start < n) close_sentence(n, n);
  return out;
}

inline std::vector<std::string> segment(std::string_view text) {
  return segment_full(text).sentences;
}

// Segments a node's text and assigns stable 1-based sentence ids.
inline std::vector<Sentence> assign_ids(const GenNode& node) {
  std::vector<Sentence> out;
  int index = 1;
  for (auto& s : segment_full(node.text).sentences) {
    Sentence sent;
    sent.node = node.id;
    sent.index = index;
    sent.sid = make_sid(node.id, index);
    sent.text = std::move(s);
    out.push_back(std::move(sent));
    ++index;
  }
  return out;
}

}  // namespace veritrail
