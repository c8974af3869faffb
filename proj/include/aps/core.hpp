#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace aps {

/// One sentence of a passage. `begin`/`end` are byte offsets into the owning
/// passage text (end exclusive), so Passage.text.substr(begin, end - begin)
/// always equals `text`.
struct Sentence {
  std::size_t index = 0;
  std::string text;
  std::size_t begin = 0;
  std::size_t end = 0;
};

/// Input text with its sentence segmentation.
struct Passage {
  std::string id;
  std::string text;
  std::vector<Sentence> sentences;
};

/// A single proposition. sentence_index is set when the proposition is
/// attributed to a source sentence (grouped parsing or alignment).
struct Proposition {
  std::string text;
  std::optional<std::size_t> sentence_index;

  bool operator==(const Proposition&) const = default;
};

enum class GroupingMode { Ungrouped, Grouped };

/// Ordered propositions, either one flat group (Ungrouped) or one group per
/// source sentence (Grouped).
struct PropositionSet {
  GroupingMode mode = GroupingMode::Ungrouped;
  std::vector<std::vector<Proposition>> groups;

  /// All propositions in order, across groups.
  std::vector<Proposition> flatten() const;
  /// Total proposition count (k or k').
  std::size_t size() const;
  bool empty() const { return size() == 0; }

  bool operator==(const PropositionSet&) const = default;

  static PropositionSet ungrouped(std::vector<std::string> texts);
  static PropositionSet grouped(std::vector<std::vector<std::string>> group_texts);
};

/// One dataset example: a passage plus gold propositions and provenance.
struct DatasetExample {
  Passage passage;
  PropositionSet gold;
  std::map<std::string, std::string> meta;
};

/// Rule-based sentence splitter. Splits after terminal punctuation (. ! ?)
/// followed by whitespace and an uppercase letter, digit or opening quote.
/// A fixed abbreviation stop-list (Mr., Dr., U.S., e.g., ...) suppresses
/// splits, and no split happens inside a "..." run. Whitespace-only input
/// yields an empty list. Deterministic.
std::vector<Sentence> split_sentences(const std::string& text);

/// Builds a Passage by splitting `text`.
Passage make_passage(std::string id, std::string text);

/// Space-concatenation of all proposition texts, in order (Q-bar).
std::string concat_propositions(const PropositionSet& props);

}  // namespace aps
