#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "aps/core.hpp"
#include "aps/entailment.hpp"

namespace aps {

/// Corpus-level metric summary. Reference-based fields are absent when no
/// example carried gold propositions. Fractions in [0, 1]; the CLI scales to
/// percentages for display.
struct MetricReport {
  double rf_p = 0.0;
  double rf_r = 0.0;
  double rf_f1 = 0.0;
  std::optional<double> rb_p;
  std::optional<double> rb_r;
  std::optional<double> rb_f1;
  double avg_props = 0.0;
  std::size_t n_examples = 0;
};

/// Per-example metrics plus raw scores for audit output.
struct ExampleEvaluation {
  std::string id;
  std::size_t n_predicted = 0;  // k'
  double rf_p = 0.0;
  double rf_r = 0.0;
  double rf_f1 = 0.0;
  std::optional<double> rb_p;
  std::optional<double> rb_r;
  std::optional<double> rb_f1;
  std::vector<double> rf_prop_scores;      // NLI(passage, q_j), per prediction
  std::vector<double> rf_sentence_scores;  // NLI(Q-bar, s_i), per sentence
  std::vector<double> rb_pred_scores;      // max-BiNLI per prediction
  std::vector<double> rb_gold_scores;      // max-BiNLI per gold
};

/// Harmonic mean of precision and recall; 0 when both are 0.
double f1(double p, double r);

/// Mean entailment of each predicted proposition against the passage text.
double rf_precision(const PropositionSet& predictions, const Passage& passage,
                    Scorer& scorer);

/// Mean entailment of each passage sentence against the space-concatenated
/// predictions.
double rf_recall(const PropositionSet& predictions, const Passage& passage,
                 Scorer& scorer);

/// Bidirectional entailment: min of the two directional scores.
double bi_nli(const Proposition& a, const Proposition& b, Scorer& scorer);

/// Mean over predictions of the best BiNLI match among gold propositions.
double rb_precision(const PropositionSet& predictions, const PropositionSet& gold,
                    Scorer& scorer);

/// Mean over gold propositions of the best BiNLI match among predictions.
double rb_recall(const PropositionSet& predictions, const PropositionSet& gold,
                 Scorer& scorer);

/// The trivial predictor: each sentence becomes one proposition, grouped.
PropositionSet sentence_baseline(const Passage& passage);

/// All metrics for one example. Gold may be empty, in which case the rb_*
/// fields stay unset.
ExampleEvaluation evaluate_example(const DatasetExample& example,
                                   const PropositionSet& prediction,
                                   Scorer& scorer);

/// Macro-averaged metrics over a corpus. Examples and predictions are
/// aligned by position; per-example failures are rethrown with the example
/// id attached. `concurrency` bounds the worker count; the reduction is
/// sequential in example order so results are identical at any width.
MetricReport evaluate_corpus(const std::vector<DatasetExample>& examples,
                             const std::vector<PropositionSet>& predictions,
                             Scorer& scorer, std::size_t concurrency = 1,
                             std::vector<ExampleEvaluation>* per_example = nullptr);

/// Aggregates already-computed per-example evaluations (macro average).
MetricReport aggregate(const std::vector<ExampleEvaluation>& evaluations);

/// Sample Pearson correlation coefficient. Requires length >= 2 and
/// non-constant inputs (Error{DegenerateInput} otherwise).
double pearson(const std::vector<double>& xs, const std::vector<double>& ys);

}  // namespace aps
