#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "aps/error.hpp"
#include "aps/metrics.hpp"
#include "testutil.hpp"

#include <algorithm>
#include <cstdlib>
#include <random>
#include <string>
#include <vector>

using namespace aps;

namespace {

LexicalOracleScorer oracle;

// Table-style worked example: one passage, two facts.
const std::string kBooksPassage =
    "The price of the books are all less than ten dollars, and they download "
    "before you can get up for a cup of coffee.";
const std::string kGoldPrice =
    "The price of the books are all less than ten dollars.";
const std::string kGoldDownload =
    "The books download before you can get up for a cup of coffee.";
const std::string kPredPronoun =
    "They download before you can get up for a cup of coffee.";

DatasetExample example_from(const std::string& id, const std::string& text,
                            std::vector<std::string> gold) {
  DatasetExample ex;
  ex.passage = make_passage(id, text);
  ex.gold = PropositionSet::ungrouped(std::move(gold));
  return ex;
}

// Predictions with a mix of supported and unsupported propositions.
PropositionSet random_predictions(testutil::Rng& rng, const Passage& passage,
                                  std::size_t max_count = 6) {
  std::vector<std::string> texts;
  const std::size_t count = rng.between(1, max_count);
  for (std::size_t i = 0; i < count; ++i) {
    if (rng.below(4) == 0) {
      texts.push_back(testutil::random_sentence(rng));
    } else {
      const auto& s = passage.sentences[rng.below(passage.sentences.size())];
      texts.push_back(testutil::contained_proposition(rng, s.text));
    }
  }
  return PropositionSet::ungrouped(texts);
}

}  // namespace

TEST_CASE("f1 is the harmonic mean with 0/0 -> 0") {
  CHECK(f1(1.0, 1.0) == 1.0);
  CHECK(f1(0.0, 0.7) == 0.0);
  CHECK(f1(0.5, 1.0) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(f1(0.0, 0.0) == 0.0);
}

TEST_CASE("rf precision on the books passage") {
  const auto passage = make_passage("books", kBooksPassage);
  CHECK(rf_precision(PropositionSet::ungrouped({kGoldDownload}), passage, oracle) ==
        1.0);
  CHECK(rf_precision(PropositionSet::ungrouped({"Quartz zebras jump."}), passage,
                     oracle) == 0.0);
}

TEST_CASE("rf precision of the sentence baseline is exactly 1") {
  testutil::Rng rng(31);
  for (int trial = 0; trial < 50; ++trial) {
    const auto passage = testutil::random_passage(rng, 1, 5);
    const auto baseline = sentence_baseline(passage);
    CHECK(rf_precision(baseline, passage, oracle) == 1.0);
    CHECK(rf_recall(baseline, passage, oracle) == 1.0);
  }
}

TEST_CASE("rf recall drops when predictions cover only part of the passage") {
  const auto passage = make_passage("books", kBooksPassage);
  REQUIRE(passage.sentences.size() == 1);
  // 10 of the 22 distinct passage tokens appear in the lone prediction
  CHECK(rf_recall(PropositionSet::ungrouped({kGoldPrice}), passage, oracle) ==
        10.0 / 22.0);
}

TEST_CASE("rf recall is 1 for an exact single-sentence copy") {
  const auto passage = make_passage("one", "Copper lanterns glow.");
  CHECK(rf_recall(PropositionSet::ungrouped({"Copper lanterns glow."}), passage,
                  oracle) == 1.0);
}

TEST_CASE("rf metrics reject empty predictions") {
  const auto passage = make_passage("x", "Alpha beta.");
  CHECK_THROWS_AS(rf_precision(PropositionSet{}, passage, oracle), Error);
  CHECK_THROWS_AS(rf_recall(PropositionSet{}, passage, oracle), Error);
}

TEST_CASE("bi_nli is reflexive, symmetric, and direction-aware") {
  Proposition self{"The amber falcon landed.", {}};
  CHECK(bi_nli(self, self, oracle) == 1.0);

  // The pronoun prediction loses exactly in the predicted->gold direction.
  CHECK(lexical_oracle_score(kGoldDownload, kPredPronoun) == 11.0 / 12.0);
  CHECK(lexical_oracle_score(kPredPronoun, kGoldDownload) == 11.0 / 13.0);
  CHECK(bi_nli({kGoldDownload, {}}, {kPredPronoun, {}}, oracle) == 11.0 / 13.0);

  testutil::Rng rng(32);
  for (int trial = 0; trial < 200; ++trial) {
    Proposition a{testutil::random_sentence(rng), {}};
    Proposition b{testutil::random_sentence(rng), {}};
    CHECK(bi_nli(a, b, oracle) == bi_nli(b, a, oracle));
  }
}

TEST_CASE("rb metrics are 1 when predictions equal gold") {
  testutil::Rng rng(33);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::string> texts;
    const std::size_t count = rng.between(1, 5);
    for (std::size_t i = 0; i < count; ++i)
      texts.push_back(testutil::random_sentence(rng));
    const auto set = PropositionSet::ungrouped(texts);
    CHECK(rb_precision(set, set, oracle) == 1.0);
    CHECK(rb_recall(set, set, oracle) == 1.0);
  }
}

TEST_CASE("one exact match plus one disjoint prediction halves rb") {
  const auto gold = PropositionSet::ungrouped(
      {"The copper falcon landed.", "A willow bends slowly."});
  const auto pred = PropositionSet::ungrouped(
      {"The copper falcon landed.", "Quartz zebras jump."});
  CHECK(rb_precision(pred, gold, oracle) == 0.5);

  const auto pred2 = PropositionSet::ungrouped({"The copper falcon landed."});
  const auto gold2 = PropositionSet::ungrouped(
      {"The copper falcon landed.", "Quartz zebras jump."});
  CHECK(rb_recall(pred2, gold2, oracle) == 0.5);

  // cross-check against the full-matrix reference
  const auto ref = testutil::reference_rb(
      {"The copper falcon landed.", "Quartz zebras jump."},
      {"The copper falcon landed.", "A willow bends slowly."});
  CHECK(ref.precision == 0.5);
}

TEST_CASE("books pronoun vectors under the continuous oracle") {
  const auto gold = PropositionSet::ungrouped({kGoldPrice, kGoldDownload});
  const auto pred = PropositionSet::ungrouped({kGoldPrice, kPredPronoun});
  // best match for the pronoun prediction is 11/13, the other is exact
  CHECK(rb_precision(pred, gold, oracle) == (1.0 + 11.0 / 13.0) / 2.0);
  CHECK(rb_recall(pred, gold, oracle) == (1.0 + 11.0 / 13.0) / 2.0);
}

TEST_CASE("rb equals the brute-force double loop on small instances") {
  testutil::Rng rng(34);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::string> gold_texts, pred_texts;
    const std::size_t k = rng.between(1, 6);
    const std::size_t k_pred = rng.between(1, 6);
    for (std::size_t i = 0; i < k; ++i)
      gold_texts.push_back(testutil::random_sentence(rng));
    for (std::size_t j = 0; j < k_pred; ++j)
      pred_texts.push_back(rng.below(2) == 0
                               ? gold_texts[rng.below(gold_texts.size())]
                               : testutil::random_sentence(rng));
    const auto gold = PropositionSet::ungrouped(gold_texts);
    const auto pred = PropositionSet::ungrouped(pred_texts);
    const auto ref = testutil::reference_rb(pred_texts, gold_texts);
    CHECK(rb_precision(pred, gold, oracle) == ref.precision);
    CHECK(rb_recall(pred, gold, oracle) == ref.recall);
  }
}

TEST_CASE("rb precision and recall mirror each other") {
  testutil::Rng rng(35);
  for (int trial = 0; trial < 200; ++trial) {
    const auto passage = testutil::random_passage(rng, 1, 3);
    const auto a = random_predictions(rng, passage);
    const auto b = random_predictions(rng, passage);
    CHECK(rb_precision(a, b, oracle) == rb_recall(b, a, oracle));
  }
}

TEST_CASE("permuting predictions changes no metric") {
  testutil::Rng rng(36);
  for (int trial = 0; trial < 200; ++trial) {
    const auto passage = testutil::random_passage(rng, 1, 4);
    const auto gold = PropositionSet::ungrouped(
        {testutil::contained_proposition(rng, passage.sentences[0].text),
         testutil::random_sentence(rng)});
    std::vector<std::string> texts;
    for (const auto& p : random_predictions(rng, passage, 5).flatten())
      texts.push_back(p.text);
    auto shuffled = texts;
    std::shuffle(shuffled.begin(), shuffled.end(), rng.engine());

    const auto q1 = PropositionSet::ungrouped(texts);
    const auto q2 = PropositionSet::ungrouped(shuffled);
    CHECK(rf_precision(q1, passage, oracle) ==
          doctest::Approx(rf_precision(q2, passage, oracle)).epsilon(1e-12));
    CHECK(rf_recall(q1, passage, oracle) ==
          doctest::Approx(rf_recall(q2, passage, oracle)).epsilon(1e-12));
    CHECK(rb_precision(q1, gold, oracle) ==
          doctest::Approx(rb_precision(q2, gold, oracle)).epsilon(1e-12));
    CHECK(rb_recall(q1, gold, oracle) ==
          doctest::Approx(rb_recall(q2, gold, oracle)).epsilon(1e-12));
  }
}

TEST_CASE("duplicating the whole prediction set changes nothing") {
  testutil::Rng rng(37);
  for (int trial = 0; trial < 200; ++trial) {
    const auto passage = testutil::random_passage(rng, 1, 4);
    const auto gold = PropositionSet::ungrouped(
        {testutil::contained_proposition(rng, passage.sentences[0].text)});
    std::vector<std::string> texts;
    for (const auto& p : random_predictions(rng, passage, 4).flatten())
      texts.push_back(p.text);
    auto doubled = texts;
    doubled.insert(doubled.end(), texts.begin(), texts.end());

    const auto once = PropositionSet::ungrouped(texts);
    const auto twice = PropositionSet::ungrouped(doubled);
    CHECK(rf_precision(once, passage, oracle) ==
          doctest::Approx(rf_precision(twice, passage, oracle)).epsilon(1e-12));
    CHECK(rf_recall(once, passage, oracle) ==
          doctest::Approx(rf_recall(twice, passage, oracle)).epsilon(1e-12));
    // equal, hence never an increase
    CHECK(rb_precision(twice, gold, oracle) <=
          rb_precision(once, gold, oracle) + 1e-12);
  }
}

TEST_CASE("duplicating one prediction leaves rf recall exactly unchanged") {
  testutil::Rng rng(38);
  for (int trial = 0; trial < 200; ++trial) {
    const auto passage = testutil::random_passage(rng, 1, 4);
    std::vector<std::string> texts;
    for (const auto& p : random_predictions(rng, passage, 4).flatten())
      texts.push_back(p.text);
    auto with_dup = texts;
    with_dup.push_back(texts[rng.below(texts.size())]);
    // the concatenated token set is identical
    CHECK(rf_recall(PropositionSet::ungrouped(texts), passage, oracle) ==
          rf_recall(PropositionSet::ungrouped(with_dup), passage, oracle));
  }
}

TEST_CASE("sentence baseline emits one grouped proposition per sentence") {
  const auto passage = make_passage(
      "p", "First here. Second here. Third here. Fourth here.");
  const auto baseline = sentence_baseline(passage);
  CHECK(baseline.mode == GroupingMode::Grouped);
  REQUIRE(baseline.groups.size() == 4);
  for (std::size_t g = 0; g < 4; ++g) {
    REQUIRE(baseline.groups[g].size() == 1);
    CHECK(baseline.groups[g][0].text == passage.sentences[g].text);
    CHECK(baseline.groups[g][0].sentence_index == g);
  }

  const auto single = make_passage("s", "Only one.");
  const auto one = sentence_baseline(single);
  CHECK(one.size() == 1);
  CHECK(one.flatten()[0].text == "Only one.");
}

TEST_CASE("evaluate_example carries raw scores for audit") {
  const auto ex = example_from("books", kBooksPassage, {kGoldPrice, kGoldDownload});
  const auto pred = PropositionSet::ungrouped({kGoldPrice, kPredPronoun});
  const auto ev = evaluate_example(ex, pred, oracle);
  CHECK(ev.id == "books");
  CHECK(ev.n_predicted == 2);
  REQUIRE(ev.rf_prop_scores.size() == 2);
  CHECK(ev.rf_prop_scores[0] == 1.0);
  REQUIRE(ev.rb_pred_scores.size() == 2);
  CHECK(ev.rb_pred_scores[1] == 11.0 / 13.0);
  CHECK(*ev.rb_p == (1.0 + 11.0 / 13.0) / 2.0);
  CHECK(*ev.rb_f1 == f1(*ev.rb_p, *ev.rb_r));
}

TEST_CASE("corpus metrics are the mean of per-example metrics") {
  auto ex1 = example_from("a", "Alpha beta gamma.", {"Alpha beta gamma."});
  auto ex2 = example_from("b", "Delta epsilon.", {"Delta epsilon."});
  const std::vector<DatasetExample> examples = {ex1, ex2};
  const std::vector<PropositionSet> predictions = {
      PropositionSet::ungrouped({"Alpha beta gamma."}),   // rf_p = 1
      PropositionSet::ungrouped({"Quartz zebras jump."})  // rf_p = 0
  };
  const auto report = evaluate_corpus(examples, predictions, oracle);
  CHECK(report.rf_p == 0.5);
  CHECK(report.n_examples == 2);
  CHECK(report.avg_props == 1.0);
}

TEST_CASE("single-example corpus passes metrics through") {
  const auto ex = example_from("only", "Copper amber stone.", {"Copper amber stone."});
  const auto pred = PropositionSet::ungrouped({"Copper stone."});
  const auto direct = evaluate_example(ex, pred, oracle);
  const auto report = evaluate_corpus({ex}, {pred}, oracle);
  CHECK(report.rf_p == direct.rf_p);
  CHECK(report.rf_r == direct.rf_r);
  CHECK(report.rf_f1 == direct.rf_f1);
  CHECK(*report.rb_p == *direct.rb_p);
}

TEST_CASE("gold as prediction scores perfect rb on any corpus") {
  testutil::Rng rng(39);
  std::vector<DatasetExample> examples;
  std::vector<PropositionSet> predictions;
  for (int i = 0; i < 20; ++i) {
    const auto passage = testutil::random_passage(rng, 1, 4);
    std::vector<std::string> gold_texts;
    for (const auto& s : passage.sentences)
      gold_texts.push_back(testutil::contained_proposition(rng, s.text));
    DatasetExample ex;
    ex.passage = passage;
    ex.gold = PropositionSet::ungrouped(gold_texts);
    examples.push_back(ex);
    predictions.push_back(ex.gold);
  }
  const auto report = evaluate_corpus(examples, predictions, oracle);
  CHECK(*report.rb_p == 1.0);
  CHECK(*report.rb_r == 1.0);
  CHECK(*report.rb_f1 == 1.0);
}

TEST_CASE("corpus evaluation is identical at any worker count") {
  testutil::Rng rng(40);
  std::vector<DatasetExample> examples;
  std::vector<PropositionSet> predictions;
  for (int i = 0; i < 30; ++i) {
    const auto passage = testutil::random_passage(rng, 1, 4);
    DatasetExample ex;
    ex.passage = passage;
    ex.gold = PropositionSet::ungrouped({testutil::contained_proposition(
        rng, passage.sentences[0].text)});
    examples.push_back(ex);
    predictions.push_back(random_predictions(rng, passage));
  }
  const auto sequential = evaluate_corpus(examples, predictions, oracle, 1);
  const auto parallel = evaluate_corpus(examples, predictions, oracle, 4);
  CHECK(sequential.rf_p == parallel.rf_p);
  CHECK(sequential.rf_r == parallel.rf_r);
  CHECK(sequential.rf_f1 == parallel.rf_f1);
  CHECK(*sequential.rb_p == *parallel.rb_p);
  CHECK(*sequential.rb_r == *parallel.rb_r);
  CHECK(sequential.avg_props == parallel.avg_props);
}

TEST_CASE("aggregate equals a sequential mean fold") {
  testutil::Rng rng(41);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<ExampleEvaluation> evals;
    const std::size_t count = rng.between(1, 8);
    double rf_p_sum = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
      ExampleEvaluation ev;
      ev.rf_p = rng.unit();
      ev.rf_r = rng.unit();
      ev.rf_f1 = f1(ev.rf_p, ev.rf_r);
      ev.n_predicted = rng.between(1, 9);
      rf_p_sum += ev.rf_p;
      evals.push_back(ev);
    }
    const auto report = aggregate(evals);
    CHECK(report.rf_p == rf_p_sum / static_cast<double>(count));
    CHECK(!report.rb_p.has_value());
  }
}

TEST_CASE("corpus evaluation validates input alignment") {
  const auto ex = example_from("a", "Alpha beta.", {"Alpha beta."});
  CHECK_THROWS_AS(evaluate_corpus({ex}, {}, oracle), Error);
  try {
    evaluate_corpus({ex}, {PropositionSet{}}, oracle);
    FAIL("expected an error for the empty prediction");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EmptyPredictions);
    CHECK(std::string(e.what()).find("'a'") != std::string::npos);
  }
}

TEST_CASE("pearson matches hand-computed coefficients") {
  CHECK(pearson({1, 2, 3}, {2, 4, 6}) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(pearson({1, 2, 3}, {3, 2, 1}) == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(pearson({1, 2, 3, 4}, {1, 3, 2, 4}) == doctest::Approx(0.8).epsilon(1e-12));
}

TEST_CASE("pearson rejects degenerate input") {
  CHECK_THROWS_AS(pearson({1, 1, 1}, {1, 2, 3}), Error);
  CHECK_THROWS_AS(pearson({1}, {2}), Error);
  CHECK_THROWS_AS(pearson({1, 2}, {1, 2, 3}), Error);
  try {
    pearson({2, 2}, {1, 3});
    FAIL("expected degenerate-input error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DegenerateInput);
  }
}

// Atomicity vectors need real NLI asymmetries; token containment cannot see
// that a merged proposition is less atomic. Runs only when a live scorer
// endpoint is configured.
TEST_CASE("merged prediction scores zero rb against atomic gold [remote-gated]") {
  const char* endpoint = std::getenv("APS_SCORER_ENDPOINT");
  if (!endpoint || !*endpoint) {
    MESSAGE("skipped: set APS_SCORER_ENDPOINT to run against a live NLI scorer");
    return;
  }
  ScorerBackend backend;
  backend.kind = BackendKind::Remote;
  backend.endpoint = endpoint;
  RemoteScorer remote(backend);
  const auto gold = PropositionSet::ungrouped({kGoldPrice, kGoldDownload});
  const auto merged =
      PropositionSet::ungrouped({kGoldPrice + " " + kGoldDownload});
  CHECK(rb_precision(merged, gold, remote) <= 0.05);
  CHECK(rb_recall(merged, gold, remote) <= 0.05);
}
