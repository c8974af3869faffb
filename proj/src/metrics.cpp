#include "aps/metrics.hpp"

#include "aps/error.hpp"
#include "aps/parallel.hpp"

#include <algorithm>
#include <cmath>

namespace aps {

double f1(double p, double r) {
  if (p + r == 0.0) return 0.0;
  return 2.0 * p * r / (p + r);
}

namespace {

std::vector<std::string> flat_texts(const PropositionSet& set) {
  std::vector<std::string> out;
  for (const auto& group : set.groups)
    for (const auto& prop : group) out.push_back(prop.text);
  return out;
}

double mean(const std::vector<double>& values) {
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

// Per-prediction RF entailment scores against the passage.
std::vector<double> rf_precision_scores(const PropositionSet& predictions,
                                        const Passage& passage, Scorer& scorer) {
  if (predictions.empty())
    throw Error(ErrorCode::EmptyPredictions, "no predicted propositions");
  std::vector<ScorePair> pairs;
  for (const auto& text : flat_texts(predictions))
    pairs.emplace_back(passage.text, text);
  return scorer.score_batch(pairs);
}

// Per-sentence RF entailment scores against the concatenated predictions.
std::vector<double> rf_recall_scores(const PropositionSet& predictions,
                                     const Passage& passage, Scorer& scorer) {
  if (predictions.empty())
    throw Error(ErrorCode::EmptyPredictions, "no predicted propositions");
  if (passage.sentences.empty())
    throw Error(ErrorCode::EmptyInput, "passage has no sentences");
  const std::string premise = concat_propositions(predictions);
  std::vector<ScorePair> pairs;
  for (const auto& sentence : passage.sentences)
    pairs.emplace_back(premise, sentence.text);
  return scorer.score_batch(pairs);
}

// Full BiNLI grid: grid[i][j] = BiNLI(gold_i, pred_j). One batched call.
std::vector<std::vector<double>> binli_grid(const std::vector<std::string>& gold,
                                            const std::vector<std::string>& pred,
                                            Scorer& scorer) {
  std::vector<ScorePair> pairs;
  pairs.reserve(gold.size() * pred.size() * 2);
  for (const auto& p : gold)
    for (const auto& q : pred) {
      pairs.emplace_back(p, q);
      pairs.emplace_back(q, p);
    }
  const auto scores = scorer.score_batch(pairs);
  std::vector<std::vector<double>> grid(gold.size(),
                                        std::vector<double>(pred.size()));
  std::size_t at = 0;
  for (std::size_t i = 0; i < gold.size(); ++i)
    for (std::size_t j = 0; j < pred.size(); ++j) {
      grid[i][j] = std::min(scores[at], scores[at + 1]);
      at += 2;
    }
  return grid;
}

}  // namespace

double rf_precision(const PropositionSet& predictions, const Passage& passage,
                    Scorer& scorer) {
  return mean(rf_precision_scores(predictions, passage, scorer));
}

double rf_recall(const PropositionSet& predictions, const Passage& passage,
                 Scorer& scorer) {
  return mean(rf_recall_scores(predictions, passage, scorer));
}

double bi_nli(const Proposition& a, const Proposition& b, Scorer& scorer) {
  return std::min(scorer.score(a.text, b.text), scorer.score(b.text, a.text));
}

double rb_precision(const PropositionSet& predictions, const PropositionSet& gold,
                    Scorer& scorer) {
  if (predictions.empty())
    throw Error(ErrorCode::EmptyPredictions, "no predicted propositions");
  if (gold.empty()) throw Error(ErrorCode::EmptyGold, "no gold propositions");
  const auto grid = binli_grid(flat_texts(gold), flat_texts(predictions), scorer);
  double sum = 0.0;
  const std::size_t k_pred = grid[0].size();
  for (std::size_t j = 0; j < k_pred; ++j) {
    double best = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) best = std::max(best, grid[i][j]);
    sum += best;
  }
  return sum / static_cast<double>(k_pred);
}

double rb_recall(const PropositionSet& predictions, const PropositionSet& gold,
                 Scorer& scorer) {
  if (predictions.empty())
    throw Error(ErrorCode::EmptyPredictions, "no predicted propositions");
  if (gold.empty()) throw Error(ErrorCode::EmptyGold, "no gold propositions");
  const auto grid = binli_grid(flat_texts(gold), flat_texts(predictions), scorer);
  double sum = 0.0;
  for (const auto& row : grid) {
    double best = 0.0;
    for (double v : row) best = std::max(best, v);
    sum += best;
  }
  return sum / static_cast<double>(grid.size());
}

PropositionSet sentence_baseline(const Passage& passage) {
  PropositionSet set;
  set.mode = GroupingMode::Grouped;
  set.groups.resize(passage.sentences.size());
  for (const auto& sentence : passage.sentences)
    set.groups[sentence.index].push_back({sentence.text, sentence.index});
  return set;
}

ExampleEvaluation evaluate_example(const DatasetExample& example,
                                   const PropositionSet& prediction,
                                   Scorer& scorer) {
  ExampleEvaluation ev;
  ev.id = example.passage.id;
  ev.n_predicted = prediction.size();
  ev.rf_prop_scores = rf_precision_scores(prediction, example.passage, scorer);
  ev.rf_sentence_scores = rf_recall_scores(prediction, example.passage, scorer);
  ev.rf_p = mean(ev.rf_prop_scores);
  ev.rf_r = mean(ev.rf_sentence_scores);
  ev.rf_f1 = f1(ev.rf_p, ev.rf_r);

  if (!example.gold.empty()) {
    const auto gold_texts = flat_texts(example.gold);
    const auto pred_texts = flat_texts(prediction);
    const auto grid = binli_grid(gold_texts, pred_texts, scorer);
    ev.rb_pred_scores.assign(pred_texts.size(), 0.0);
    ev.rb_gold_scores.assign(gold_texts.size(), 0.0);
    for (std::size_t i = 0; i < gold_texts.size(); ++i)
      for (std::size_t j = 0; j < pred_texts.size(); ++j) {
        ev.rb_gold_scores[i] = std::max(ev.rb_gold_scores[i], grid[i][j]);
        ev.rb_pred_scores[j] = std::max(ev.rb_pred_scores[j], grid[i][j]);
      }
    ev.rb_p = mean(ev.rb_pred_scores);
    ev.rb_r = mean(ev.rb_gold_scores);
    ev.rb_f1 = f1(*ev.rb_p, *ev.rb_r);
  }
  return ev;
}

MetricReport aggregate(const std::vector<ExampleEvaluation>& evaluations) {
  if (evaluations.empty())
    throw Error(ErrorCode::EmptyInput, "nothing to aggregate");
  MetricReport report;
  report.n_examples = evaluations.size();
  double rb_p_sum = 0.0, rb_r_sum = 0.0, rb_f1_sum = 0.0;
  std::size_t rb_count = 0;
  double props_sum = 0.0;
  for (const auto& ev : evaluations) {
    report.rf_p += ev.rf_p;
    report.rf_r += ev.rf_r;
    report.rf_f1 += ev.rf_f1;
    props_sum += static_cast<double>(ev.n_predicted);
    if (ev.rb_p) {
      rb_p_sum += *ev.rb_p;
      rb_r_sum += *ev.rb_r;
      rb_f1_sum += *ev.rb_f1;
      ++rb_count;
    }
  }
  const auto n = static_cast<double>(evaluations.size());
  report.rf_p /= n;
  report.rf_r /= n;
  report.rf_f1 /= n;
  report.avg_props = props_sum / n;
  if (rb_count > 0) {
    report.rb_p = rb_p_sum / static_cast<double>(rb_count);
    report.rb_r = rb_r_sum / static_cast<double>(rb_count);
    report.rb_f1 = rb_f1_sum / static_cast<double>(rb_count);
  }
  return report;
}

MetricReport evaluate_corpus(const std::vector<DatasetExample>& examples,
                             const std::vector<PropositionSet>& predictions,
                             Scorer& scorer, std::size_t concurrency,
                             std::vector<ExampleEvaluation>* per_example) {
  if (examples.size() != predictions.size())
    throw Error(ErrorCode::LengthMismatch,
                std::to_string(examples.size()) + " examples vs " +
                    std::to_string(predictions.size()) + " predictions");
  if (examples.empty())
    throw Error(ErrorCode::EmptyInput, "empty corpus");

  std::vector<ExampleEvaluation> evaluations(examples.size());
  parallel_for(examples.size(), concurrency, [&](std::size_t i) {
    try {
      evaluations[i] = evaluate_example(examples[i], predictions[i], scorer);
    } catch (const Error& e) {
      throw Error(e.code(), "example '" + examples[i].passage.id + "': " + e.what());
    }
  });

  if (per_example) *per_example = evaluations;
  return aggregate(evaluations);
}

double pearson(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size())
    throw Error(ErrorCode::LengthMismatch,
                "pearson inputs differ in length");
  if (xs.size() < 2)
    throw Error(ErrorCode::DegenerateInput, "need at least two points");
  const auto n = static_cast<double>(xs.size());
  double mean_x = 0.0, mean_y = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mean_x += xs[i];
    mean_y += ys[i];
  }
  mean_x /= n;
  mean_y /= n;
  double cov = 0.0, var_x = 0.0, var_y = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mean_x;
    const double dy = ys[i] - mean_y;
    cov += dx * dy;
    var_x += dx * dx;
    var_y += dy * dy;
  }
  if (var_x == 0.0 || var_y == 0.0)
    throw Error(ErrorCode::DegenerateInput, "constant input vector");
  return std::clamp(cov / std::sqrt(var_x * var_y), -1.0, 1.0);
}

}  // namespace aps
