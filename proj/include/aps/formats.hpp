#pragma once

#include <string>

#include "aps/core.hpp"

namespace aps {

/// Token and layout configuration for the training/inference formats.
struct FormatConfig {
  std::string start_token = "<s>";
  std::string end_token = "</s>";
  std::string bullet = "- ";
  std::string instruction =
      "Decompose the passage into atomic, self-contained propositions.";
};

/// One (input, target) training pair.
struct TrainingRecord {
  std::string input_text;
  std::string target_text;
  GroupingMode mode = GroupingMode::Ungrouped;
  std::string source_id;
};

/// Instruction + raw passage text — the ungrouped model input.
std::string render_ungrouped_input(const Passage& passage, const FormatConfig& cfg);

/// Instruction + each sentence wrapped in start/end tokens — the grouped
/// model input. Also used on its own when prompting a teacher model.
std::string render_grouped_input(const Passage& passage, const FormatConfig& cfg);

/// Bulleted, newline-separated propositions. Error{EmptyGold} when gold is
/// empty; Error{TokenCollision} when a proposition embeds a newline or a
/// special token.
TrainingRecord render_ungrouped(const Passage& passage, const PropositionSet& gold,
                                const FormatConfig& cfg);

/// Per-sentence bullet lists wrapped in start/end tokens, e.g.
/// "<s>- A.</s><s>- B.\n- C.</s>". Gold must be grouped with exactly one
/// non-empty group per sentence.
TrainingRecord render_grouped(const Passage& passage, const PropositionSet& gold,
                              const FormatConfig& cfg);

/// Strict parser for grouped model output. Validates token alternation and
/// balance, requires exactly `n_sentences` groups, each with at least one
/// bullet line; every non-blank line inside a group must start with the
/// bullet. Errors name the offending byte offset or group.
PropositionSet parse_grouped_output(const std::string& raw, std::size_t n_sentences,
                                    const FormatConfig& cfg);

/// Tolerant parser for ungrouped output: keeps bullet lines, skips blanks
/// and stray text. Error{NoPropositionsFound} when no bullet line exists.
PropositionSet parse_ungrouped_output(const std::string& raw,
                                      const FormatConfig& cfg);

}  // namespace aps
