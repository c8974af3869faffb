#include "aps/core.hpp"

#include "aps/error.hpp"

#include <algorithm>
#include <array>
#include <cctype>

namespace aps {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
bool is_upper(char c) { return std::isupper(static_cast<unsigned char>(c)) != 0; }
bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

bool is_opening_quote(char c) {
  return c == '"' || c == '\'' || c == '(' || c == '[';
}

bool is_closing_mark(char c) {
  return c == '"' || c == '\'' || c == ')' || c == ']';
}

// Tokens (including their final period) that never end a sentence.
const std::array<std::string, 20> kAbbreviations = {
    "Mr.",  "Mrs.", "Ms.",  "Dr.",  "Prof.", "St.",  "Jr.",  "Sr.",
    "U.S.", "U.K.", "e.g.", "i.e.", "vs.",   "etc.", "cf.",  "Fig.",
    "No.",  "Inc.", "Ltd.", "Co."};

// The word ending at `dot` (inclusive), scanning back to the previous space.
std::string word_ending_at(const std::string& text, std::size_t dot) {
  std::size_t start = dot;
  while (start > 0 && !is_space(text[start - 1])) --start;
  return text.substr(start, dot - start + 1);
}

bool is_abbreviation(const std::string& text, std::size_t dot) {
  const std::string word = word_ending_at(text, dot);
  return std::find(kAbbreviations.begin(), kAbbreviations.end(), word) !=
         kAbbreviations.end();
}

}  // namespace

std::vector<Sentence> split_sentences(const std::string& text) {
  std::vector<Sentence> sentences;
  const std::size_t n = text.size();

  auto emit = [&](std::size_t from, std::size_t to) {
    // Trim surrounding whitespace so spans never cover gap bytes.
    while (from < to && is_space(text[from])) ++from;
    while (to > from && is_space(text[to - 1])) --to;
    if (from == to) return;
    Sentence s;
    s.index = sentences.size();
    s.begin = from;
    s.end = to;
    s.text = text.substr(from, to - from);
    sentences.push_back(std::move(s));
  };

  std::size_t segment_start = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const char c = text[i];
    if (c != '.' && c != '!' && c != '?') continue;
    if (c == '.') {
      // Never break inside an ellipsis run; the last dot may still end one.
      if (i + 1 < n && text[i + 1] == '.') continue;
      if (is_abbreviation(text, i)) continue;
    }
    // Closing quotes/brackets belong to the sentence they end.
    std::size_t end = i + 1;
    while (end < n && is_closing_mark(text[end])) ++end;
    if (end == n) {
      emit(segment_start, end);
      segment_start = end;
      continue;
    }
    if (!is_space(text[end])) continue;
    std::size_t next = end;
    while (next < n && is_space(text[next])) ++next;
    if (next == n || is_upper(text[next]) || is_digit(text[next]) ||
        is_opening_quote(text[next])) {
      emit(segment_start, end);
      segment_start = end;
    }
  }
  emit(segment_start, n);
  return sentences;
}

Passage make_passage(std::string id, std::string text) {
  Passage p;
  p.id = std::move(id);
  p.text = std::move(text);
  p.sentences = split_sentences(p.text);
  return p;
}

std::vector<Proposition> PropositionSet::flatten() const {
  std::vector<Proposition> out;
  for (const auto& group : groups)
    out.insert(out.end(), group.begin(), group.end());
  return out;
}

std::size_t PropositionSet::size() const {
  std::size_t total = 0;
  for (const auto& group : groups) total += group.size();
  return total;
}

PropositionSet PropositionSet::ungrouped(std::vector<std::string> texts) {
  PropositionSet set;
  set.mode = GroupingMode::Ungrouped;
  set.groups.emplace_back();
  for (auto& t : texts) set.groups[0].push_back({std::move(t), std::nullopt});
  return set;
}

PropositionSet PropositionSet::grouped(
    std::vector<std::vector<std::string>> group_texts) {
  PropositionSet set;
  set.mode = GroupingMode::Grouped;
  set.groups.resize(group_texts.size());
  for (std::size_t g = 0; g < group_texts.size(); ++g)
    for (auto& t : group_texts[g]) set.groups[g].push_back({std::move(t), g});
  return set;
}

std::string concat_propositions(const PropositionSet& props) {
  std::string out;
  bool first = true;
  for (const auto& group : props.groups) {
    for (const auto& prop : group) {
      if (!first) out += ' ';
      out += prop.text;
      first = false;
    }
  }
  return out;
}

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::Transport: return "TransportError";
    case ErrorCode::Protocol: return "ProtocolError";
    case ErrorCode::EmptyPredictions: return "EmptyPredictions";
    case ErrorCode::EmptyGold: return "EmptyGold";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::DegenerateInput: return "DegenerateInput";
    case ErrorCode::UnbalancedTokens: return "UnbalancedTokens";
    case ErrorCode::GroupCountMismatch: return "GroupCountMismatch";
    case ErrorCode::EmptyGroup: return "EmptyGroup";
    case ErrorCode::NoPropositionsFound: return "NoPropositionsFound";
    case ErrorCode::TokenCollision: return "TokenCollision";
    case ErrorCode::MalformedLine: return "MalformedLine";
    case ErrorCode::Io: return "IoError";
    case ErrorCode::Config: return "ConfigError";
  }
  return "Error";
}

}  // namespace aps
