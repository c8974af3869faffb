#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "aps/core.hpp"
#include "aps/entailment.hpp"

namespace aps {

struct AlignmentConfig {
  double tau = 0.9;  // NLI threshold for proposition-to-sentence alignment
};

enum class AlignmentStatus {
  Aligned,
  DiscardedUnsupported,
  DiscardedNonComprehensive,
};

const char* alignment_status_name(AlignmentStatus status);

/// Where one proposition landed (or failed to land).
struct PropositionAlignment {
  std::size_t proposition_index = 0;
  std::size_t best_sentence = 0;  // argmax sentence from the direct pass
  double best_score = 0.0;
  bool via_prefix = false;  // true when the prefix fallback decided
  bool supported = false;
  std::optional<std::size_t> aligned_sentence;
};

struct AlignmentOutcome {
  AlignmentStatus status = AlignmentStatus::DiscardedUnsupported;
  std::optional<DatasetExample> aligned;  // grouped gold, set iff Aligned
  std::vector<PropositionAlignment> proposition_diagnostics;
  std::vector<std::size_t> per_sentence_counts;
};

/// Normalizes one ACU string: drops whitespace before a final period and
/// appends a period when the text ends with no terminal punctuation.
/// Idempotent.
std::string normalize_acu(const std::string& text);

/// Removes every ACU whose period-stripped text occurs verbatim inside
/// another ACU. Of a mutually-containing pair the longer survives; exact
/// duplicates keep the later occurrence. Order of survivors is preserved.
std::vector<std::string> dedupe_acus(const std::vector<std::string>& acus);

/// Aligns each gold proposition to a sentence: direct max-scoring sentence
/// when its score reaches tau (ties to the lowest index), otherwise the
/// first sentence whose cumulative prefix reaches tau. Discards the example
/// when a proposition stays unsupported or a sentence ends up uncovered.
AlignmentOutcome align_example(const DatasetExample& example,
                               const AlignmentConfig& cfg, Scorer& scorer);

struct PipelineReport {
  std::size_t aligned = 0;
  std::size_t discarded_unsupported = 0;
  std::size_t discarded_non_comprehensive = 0;
  std::vector<std::string> errors;  // "<id>: <message>" per failed example
};

struct PipelineResult {
  std::vector<DatasetExample> kept;  // grouped gold
  std::vector<std::pair<DatasetExample, AlignmentOutcome>> discarded;
  PipelineReport report;
};

/// normalize -> dedupe -> align for every example. Per-example failures are
/// recorded, never fatal. `concurrency` bounds alignment workers; outputs
/// keep input order.
PipelineResult run_pipeline(const std::vector<DatasetExample>& raw,
                            const AlignmentConfig& cfg, Scorer& scorer,
                            std::size_t concurrency = 1);

/// Deterministic seeded split; both halves keep the input's relative order
/// and together cover it exactly.
std::pair<std::vector<DatasetExample>, std::vector<DatasetExample>>
split_train_dev(const std::vector<DatasetExample>& examples, double dev_fraction,
                std::uint64_t seed);

}  // namespace aps
