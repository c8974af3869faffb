#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "aps/core.hpp"
#include "aps/entailment.hpp"
#include "aps/formats.hpp"

namespace aps {

enum class TextLength { Short, Paragraph };

const char* text_length_name(TextLength length);  // "short" / "paragraph"
std::optional<TextLength> parse_text_length(const std::string& name);

/// One few-shot example for domain/text generation.
struct SeedExample {
  std::string domain;
  TextLength length = TextLength::Paragraph;
  std::string text;
};

struct GenerationRequest {
  std::string prompt;
  double temperature = 0.0;
  int max_attempts = 4;  // 1 try + 3 retries
};

/// Text-generation service contract.
class GenerationClient {
 public:
  virtual ~GenerationClient() = default;
  virtual std::string generate(const GenerationRequest& request) = 0;
};

/// HTTP backend: POST {endpoint}/generate {"prompt":..,"temperature":..}
/// -> {"text":..}. Retries 429/5xx with exponential backoff.
class RemoteGenerationClient final : public GenerationClient {
 public:
  RemoteGenerationClient(std::string endpoint,
                         std::chrono::milliseconds timeout = std::chrono::milliseconds(30000),
                         std::chrono::milliseconds retry_base = std::chrono::milliseconds(500));

  std::string generate(const GenerationRequest& request) override;

 private:
  std::string base_url_;
  std::string path_prefix_;
  std::chrono::milliseconds timeout_;
  std::chrono::milliseconds retry_base_;
};

/// Few-shot blocks (Domain:/Length:/Text:) followed by a cue for a new
/// domain name.
std::string build_domain_prompt(const std::vector<SeedExample>& seeds);

/// Few-shot blocks followed by a partial block that fixes domain and length
/// and leaves the text to be completed.
std::string build_text_prompt(const std::vector<SeedExample>& seeds,
                              const std::string& domain, TextLength length);

/// Drops every candidate sharing at least one contiguous n-token sequence
/// with any seed (tokens normalized the same way the lexical oracle
/// normalizes). Returns (kept, dropped); order preserved in both.
std::pair<std::vector<std::string>, std::vector<std::string>>
ngram_overlap_filter(const std::vector<std::string>& candidates,
                     const std::vector<std::string>& seeds, std::size_t n = 4);

struct GeneratedText {
  std::string domain;
  TextLength length = TextLength::Paragraph;
  std::size_t index = 0;  // sequence number within (domain, length)
  std::string text;
};

struct GenerateConfig {
  std::size_t texts_per_combo = 3;   // texts requested per (domain, length)
  std::size_t ngram_n = 4;
  double domain_temperature = 1.0;   // sampling diversity for domains/texts
  double text_temperature = 1.0;
  int max_attempts = 4;
  std::size_t concurrency = 8;       // bound on in-flight generation calls
  std::string checkpoint_path;       // empty disables checkpointing
  std::size_t checkpoint_every = 100;
};

struct CorpusResult {
  std::vector<GeneratedText> kept;
  std::vector<GeneratedText> dropped;  // n-gram overlap with a seed
  std::vector<std::string> call_errors;
  std::vector<std::string> domains;  // distinct domains after allowlisting
};

/// Repeatedly prompts for new domains; keeps distinct names not already
/// among the seed domains. Resumes from the checkpoint when one exists.
std::vector<std::string> collect_domains(GenerationClient& client,
                                         const std::vector<SeedExample>& seeds,
                                         std::size_t n_calls,
                                         const GenerateConfig& cfg,
                                         std::vector<std::string>* call_errors = nullptr);

/// Generates texts_per_combo texts per (domain, length), applies the n-gram
/// filter against the seed texts, and returns both partitions. Resumable:
/// completed (domain, length, index) triples recorded in the checkpoint are
/// never regenerated.
CorpusResult generate_texts(GenerationClient& client,
                            const std::vector<SeedExample>& seeds,
                            const std::vector<std::string>& domains,
                            const GenerateConfig& cfg);

/// Full orchestration: collect domains, intersect with the allowlist when
/// given, then generate and filter texts.
CorpusResult generate_corpus(GenerationClient& client,
                             const std::vector<SeedExample>& seeds,
                             std::size_t n_domain_calls,
                             const std::optional<std::vector<std::string>>& allowlist,
                             const GenerateConfig& cfg);

/// One teacher-labeled training example.
struct DistillationRecord {
  std::string text;
  PropositionSet propositions;  // grouped, parsed from validated output
  std::string domain;
  TextLength length = TextLength::Paragraph;
  std::string teacher_id;
};

struct QuarantinedResponse {
  GeneratedText source;
  std::string raw_response;
  std::string error;
};

struct DistillationResult {
  std::vector<DistillationRecord> records;
  std::vector<QuarantinedResponse> quarantined;
};

/// Prompts the teacher with the grouped input for each text and strictly
/// parses the response; malformed outputs are quarantined with the raw
/// response, never emitted as partial records.
DistillationResult build_distillation_records(const std::vector<GeneratedText>& texts,
                                              GenerationClient& teacher,
                                              const std::string& teacher_id,
                                              const FormatConfig& cfg);

/// Serializes a distillation record as a training record (grouped render);
/// source_id is "<teacher>:<domain>:<length>:<index>".
TrainingRecord to_training_record(const DistillationRecord& record,
                                  std::size_t index, const FormatConfig& cfg);

}  // namespace aps
