#include "aps/alignment.hpp"

#include "aps/error.hpp"
#include "aps/parallel.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <random>

namespace aps {

const char* alignment_status_name(AlignmentStatus status) {
  switch (status) {
    case AlignmentStatus::Aligned: return "aligned";
    case AlignmentStatus::DiscardedUnsupported: return "unsupported";
    case AlignmentStatus::DiscardedNonComprehensive: return "non_comprehensive";
  }
  return "unknown";
}

std::string normalize_acu(const std::string& text) {
  std::string s = text;
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
    s.pop_back();
  if (s.empty()) return s;
  const char last = s.back();
  if (last == '.') {
    // "Many seals are shot ." -> "Many seals are shot."
    while (s.size() >= 2 &&
           std::isspace(static_cast<unsigned char>(s[s.size() - 2])))
      s.erase(s.size() - 2, 1);
    return s;
  }
  if (last == '!' || last == '?') return s;
  return s + '.';
}

namespace {

std::string strip_final_period(const std::string& s) {
  if (!s.empty() && s.back() == '.') return s.substr(0, s.size() - 1);
  return s;
}

}  // namespace

std::vector<std::string> dedupe_acus(const std::vector<std::string>& acus) {
  const std::size_t n = acus.size();
  std::vector<std::string> keys(n);
  for (std::size_t i = 0; i < n; ++i) keys[i] = strip_final_period(acus[i]);

  auto contains = [&](std::size_t container, std::size_t inner) {
    return acus[container].find(keys[inner]) != std::string::npos;
  };

  std::vector<std::string> survivors;
  for (std::size_t i = 0; i < n; ++i) {
    bool removed = false;
    for (std::size_t j = 0; j < n && !removed; ++j) {
      if (j == i || !contains(j, i)) continue;
      if (!contains(i, j)) {
        removed = true;  // strictly contained elsewhere
      } else if (acus[j].size() > acus[i].size()) {
        removed = true;  // mutual containment: longer one survives
      } else if (acus[j].size() == acus[i].size() && j > i) {
        removed = true;  // exact duplicate: later occurrence survives
      }
    }
    if (!removed) survivors.push_back(acus[i]);
  }
  return survivors;
}

AlignmentOutcome align_example(const DatasetExample& example,
                               const AlignmentConfig& cfg, Scorer& scorer) {
  if (cfg.tau <= 0.0 || cfg.tau > 1.0)
    throw Error(ErrorCode::Config, "tau must lie in (0, 1]");
  const auto& sentences = example.passage.sentences;
  if (sentences.empty())
    throw Error(ErrorCode::EmptyInput,
                "example '" + example.passage.id + "' has no sentences");
  const auto props = example.gold.flatten();
  if (props.empty())
    throw Error(ErrorCode::EmptyGold,
                "example '" + example.passage.id + "' has no propositions");

  const std::size_t n = sentences.size();
  std::vector<std::string> prefixes(n);  // prefixes[i] = s_0.." "..s_i
  for (std::size_t i = 0; i < n; ++i)
    prefixes[i] = i == 0 ? sentences[i].text
                         : prefixes[i - 1] + " " + sentences[i].text;

  AlignmentOutcome outcome;
  outcome.per_sentence_counts.assign(n, 0);
  std::vector<std::vector<Proposition>> groups(n);

  for (std::size_t j = 0; j < props.size(); ++j) {
    PropositionAlignment diag;
    diag.proposition_index = j;

    std::vector<ScorePair> direct;
    direct.reserve(n);
    for (const auto& sentence : sentences)
      direct.emplace_back(sentence.text, props[j].text);
    const auto direct_scores = scorer.score_batch(direct);

    std::size_t best = 0;
    for (std::size_t i = 1; i < n; ++i)  // strict > keeps the lowest index on ties
      if (direct_scores[i] > direct_scores[best]) best = i;
    diag.best_sentence = best;
    diag.best_score = direct_scores[best];

    if (direct_scores[best] >= cfg.tau) {
      diag.supported = true;
      diag.aligned_sentence = best;
    } else {
      std::vector<ScorePair> fallback;
      fallback.reserve(n);
      for (std::size_t i = 0; i < n; ++i)
        fallback.emplace_back(prefixes[i], props[j].text);
      const auto prefix_scores = scorer.score_batch(fallback);
      for (std::size_t i = 0; i < n; ++i) {
        if (prefix_scores[i] >= cfg.tau) {
          diag.supported = true;
          diag.via_prefix = true;
          diag.aligned_sentence = i;
          break;
        }
      }
    }

    outcome.proposition_diagnostics.push_back(diag);
    if (!diag.supported) {
      outcome.status = AlignmentStatus::DiscardedUnsupported;
      return outcome;
    }
    const std::size_t target = *diag.aligned_sentence;
    Proposition aligned_prop = props[j];
    aligned_prop.sentence_index = target;
    groups[target].push_back(std::move(aligned_prop));
    outcome.per_sentence_counts[target] += 1;
  }

  for (std::size_t i = 0; i < n; ++i) {
    if (outcome.per_sentence_counts[i] == 0) {
      outcome.status = AlignmentStatus::DiscardedNonComprehensive;
      return outcome;
    }
  }

  outcome.status = AlignmentStatus::Aligned;
  DatasetExample aligned = example;
  aligned.gold.mode = GroupingMode::Grouped;
  aligned.gold.groups = std::move(groups);
  outcome.aligned = std::move(aligned);
  return outcome;
}

PipelineResult run_pipeline(const std::vector<DatasetExample>& raw,
                            const AlignmentConfig& cfg, Scorer& scorer,
                            std::size_t concurrency) {
  struct Slot {
    std::optional<AlignmentOutcome> outcome;
    DatasetExample prepared;
    std::string error;
  };
  std::vector<Slot> slots(raw.size());

  parallel_for(raw.size(), concurrency, [&](std::size_t idx) {
    Slot& slot = slots[idx];
    try {
      DatasetExample prepared = raw[idx];
      std::vector<std::string> acus;
      for (const auto& prop : prepared.gold.flatten())
        acus.push_back(normalize_acu(prop.text));
      acus = dedupe_acus(acus);
      prepared.gold = PropositionSet::ungrouped(acus);
      slot.prepared = prepared;
      slot.outcome = align_example(prepared, cfg, scorer);
    } catch (const std::exception& e) {
      slot.error = e.what();
    }
  });

  PipelineResult result;
  for (std::size_t idx = 0; idx < slots.size(); ++idx) {
    Slot& slot = slots[idx];
    if (!slot.error.empty()) {
      result.report.errors.push_back(raw[idx].passage.id + ": " + slot.error);
      continue;
    }
    switch (slot.outcome->status) {
      case AlignmentStatus::Aligned:
        result.report.aligned += 1;
        result.kept.push_back(*slot.outcome->aligned);
        break;
      case AlignmentStatus::DiscardedUnsupported:
        result.report.discarded_unsupported += 1;
        result.discarded.emplace_back(slot.prepared, std::move(*slot.outcome));
        break;
      case AlignmentStatus::DiscardedNonComprehensive:
        result.report.discarded_non_comprehensive += 1;
        result.discarded.emplace_back(slot.prepared, std::move(*slot.outcome));
        break;
    }
  }
  return result;
}

std::pair<std::vector<DatasetExample>, std::vector<DatasetExample>>
split_train_dev(const std::vector<DatasetExample>& examples, double dev_fraction,
                std::uint64_t seed) {
  if (dev_fraction <= 0.0 || dev_fraction >= 1.0)
    throw Error(ErrorCode::Config, "dev_fraction must lie in (0, 1)");
  const std::size_t n = examples.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;

  // Hand-rolled Fisher-Yates: std::shuffle is implementation-defined, and
  // --seed promises identical splits across toolchains.
  std::mt19937_64 rng(seed);
  for (std::size_t i = n; i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(order[i - 1], order[j]);
  }

  const auto dev_count = static_cast<std::size_t>(std::llround(
      dev_fraction * static_cast<double>(n)));
  std::vector<bool> in_dev(n, false);
  for (std::size_t i = 0; i < std::min(dev_count, n); ++i) in_dev[order[i]] = true;

  std::pair<std::vector<DatasetExample>, std::vector<DatasetExample>> out;
  for (std::size_t i = 0; i < n; ++i)
    (in_dev[i] ? out.second : out.first).push_back(examples[i]);
  return out;
}

}  // namespace aps
