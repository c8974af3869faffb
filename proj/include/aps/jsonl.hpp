#pragma once

#include <string>
#include <vector>

#include "aps/core.hpp"
#include "aps/formats.hpp"
#include "aps/synthgen.hpp"

namespace aps {

/// Writes `content` to `path` via a temp file + rename, so readers never see
/// a partial file.
void atomic_write_text(const std::string& path, const std::string& content);

/// Dataset/prediction record: {"id", "text", "propositions": [str]|[[str]..],
/// "grouped", "meta"}. One JSON object per line, UTF-8.
std::vector<DatasetExample> read_dataset_jsonl(const std::string& path);
std::string dataset_example_to_json(const DatasetExample& example);
void write_dataset_jsonl(const std::string& path,
                         const std::vector<DatasetExample>& examples);

/// Prediction records reuse the dataset schema minus the text field.
struct PredictionRecord {
  std::string id;
  PropositionSet propositions;
};
std::vector<PredictionRecord> read_predictions_jsonl(const std::string& path);
void write_predictions_jsonl(const std::string& path,
                             const std::vector<PredictionRecord>& predictions);

/// Training records: {"input", "target", "mode", "source_id"}.
void write_training_jsonl(const std::string& path,
                          const std::vector<TrainingRecord>& records);
std::vector<TrainingRecord> read_training_jsonl(const std::string& path);

/// Seed examples: {"domain", "length": "short"|"paragraph", "text"}.
std::vector<SeedExample> read_seeds_jsonl(const std::string& path);

/// Generated texts share the seed schema plus an "index" field.
void write_generated_jsonl(const std::string& path,
                           const std::vector<GeneratedText>& texts);
std::vector<GeneratedText> read_generated_jsonl(const std::string& path);

}  // namespace aps
