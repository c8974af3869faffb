// aps — proposition segmentation toolkit CLI.
//
// Subcommands: evaluate, baseline, correlate, render, parse-output, align,
// split, synth {domains,texts,filter,distill}. Exit codes: 0 success, 1 any
// per-example/data error, 2 config or I/O error. Diagnostics go to stderr;
// output files are written atomically.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "aps/core.hpp"
#include "aps/entailment.hpp"
#include "aps/error.hpp"
#include "aps/formats.hpp"
#include "aps/jsonl.hpp"
#include "aps/metrics.hpp"
#include "aps/alignment.hpp"
#include "aps/synthgen.hpp"

namespace {

using nlohmann::json;

struct ToolConfig {
  aps::ScorerBackend scorer;
  std::size_t cache_capacity = 4096;
  aps::FormatConfig format;
  aps::AlignmentConfig alignment;
  std::size_t concurrency = 1;
};

// Values given on the command line; empty/unset means "defer to config file".
struct CommonFlags {
  std::string config_path;
  std::string scorer_kind;  // "oracle" | "remote"
  std::string endpoint;
  std::optional<double> tau;
  std::optional<std::size_t> concurrency;
};

void add_common_flags(CLI::App* cmd, CommonFlags& flags, bool with_scorer = true) {
  cmd->add_option("--config", flags.config_path, "JSON config file");
  if (with_scorer) {
    cmd->add_option("--scorer", flags.scorer_kind, "oracle or remote")
        ->check(CLI::IsMember({"oracle", "remote"}));
    cmd->add_option("--endpoint", flags.endpoint, "remote scorer endpoint URL");
  }
  cmd->add_option("--concurrency", flags.concurrency, "worker threads");
}

ToolConfig load_config(const CommonFlags& flags) {
  ToolConfig cfg;
  if (!flags.config_path.empty()) {
    std::ifstream in(flags.config_path);
    if (!in)
      throw aps::Error(aps::ErrorCode::Io, "cannot open " + flags.config_path);
    json j;
    try {
      in >> j;
    } catch (const json::exception& e) {
      throw aps::Error(aps::ErrorCode::Config,
                       flags.config_path + ": " + e.what());
    }
    if (j.contains("scorer")) {
      const auto& s = j["scorer"];
      if (s.value("kind", "oracle") == std::string("remote"))
        cfg.scorer.kind = aps::BackendKind::Remote;
      cfg.scorer.endpoint = s.value("endpoint", "");
      cfg.scorer.timeout = std::chrono::milliseconds(
          s.value("timeout_ms", 10000));
      cfg.scorer.max_batch = s.value("max_batch", std::size_t{32});
      cfg.scorer.retry_base =
          std::chrono::milliseconds(s.value("retry_base_ms", 500));
      cfg.cache_capacity = s.value("cache_capacity", std::size_t{4096});
    }
    if (j.contains("format")) {
      const auto& f = j["format"];
      cfg.format.start_token = f.value("start_token", cfg.format.start_token);
      cfg.format.end_token = f.value("end_token", cfg.format.end_token);
      cfg.format.bullet = f.value("bullet", cfg.format.bullet);
      cfg.format.instruction = f.value("instruction", cfg.format.instruction);
    }
    if (j.contains("alignment"))
      cfg.alignment.tau = j["alignment"].value("tau", cfg.alignment.tau);
    cfg.concurrency = j.value("concurrency", cfg.concurrency);
  }
  if (!flags.scorer_kind.empty())
    cfg.scorer.kind = flags.scorer_kind == "remote" ? aps::BackendKind::Remote
                                                    : aps::BackendKind::LexicalOracle;
  if (!flags.endpoint.empty()) cfg.scorer.endpoint = flags.endpoint;
  if (flags.tau) cfg.alignment.tau = *flags.tau;
  if (flags.concurrency) cfg.concurrency = *flags.concurrency;
  if (cfg.concurrency == 0)
    throw aps::Error(aps::ErrorCode::Config, "--concurrency must be >= 1");
  return cfg;
}

void ensure_distinct_paths(const std::vector<std::string>& inputs,
                           const std::vector<std::string>& outputs) {
  for (const auto& in : inputs) {
    if (in.empty()) continue;
    for (const auto& out : outputs)
      if (!out.empty() && in == out)
        throw aps::Error(aps::ErrorCode::Config,
                         "input and output paths must differ: " + in);
  }
}

std::string percent(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", fraction * 100.0);
  return buf;
}

std::string fixed2(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", value);
  return buf;
}

json report_to_json(const aps::MetricReport& report) {
  json j;
  j["rf_p"] = report.rf_p;
  j["rf_r"] = report.rf_r;
  j["rf_f1"] = report.rf_f1;
  if (report.rb_p) {
    j["rb_p"] = *report.rb_p;
    j["rb_r"] = *report.rb_r;
    j["rb_f1"] = *report.rb_f1;
  }
  j["avg_props"] = report.avg_props;
  j["n_examples"] = report.n_examples;
  return j;
}

void print_report(const aps::MetricReport& report) {
  std::cout << "                  Precision    Recall        F1\n";
  std::cout << "Reference-free    " << percent(report.rf_p) << "    " << percent(report.rf_r)
            << "    " << percent(report.rf_f1) << "\n";
  if (report.rb_p)
    std::cout << "Reference-based   " << percent(*report.rb_p) << "    "
              << percent(*report.rb_r) << "    " << percent(*report.rb_f1) << "\n";
  std::cout << "# Props " << fixed2(report.avg_props) << "   Examples "
            << report.n_examples << "\n";
}

int cmd_evaluate(const CommonFlags& flags, const std::string& predictions_path,
                 const std::string& dataset_path, const std::string& report_path,
                 const std::string& per_example_path) {
  const ToolConfig cfg = load_config(flags);
  ensure_distinct_paths({predictions_path, dataset_path},
                        {report_path, per_example_path});
  auto scorer = aps::make_scorer(cfg.scorer, cfg.cache_capacity);

  const auto dataset = aps::read_dataset_jsonl(dataset_path);
  const auto predictions = aps::read_predictions_jsonl(predictions_path);
  std::map<std::string, const aps::PropositionSet*> by_id;
  for (const auto& p : predictions) {
    if (!by_id.emplace(p.id, &p.propositions).second)
      throw aps::Error(aps::ErrorCode::Io, "duplicate prediction id " + p.id);
  }

  // Joined by id, not line order. Examples that cannot be evaluated are
  // excluded and reported, never silently scored 0.
  std::vector<aps::DatasetExample> usable;
  std::vector<aps::PropositionSet> usable_preds;
  std::vector<std::pair<std::string, std::string>> skipped;  // id, reason
  std::set<std::string> dataset_ids;
  for (const auto& example : dataset) {
    if (!dataset_ids.insert(example.passage.id).second)
      throw aps::Error(aps::ErrorCode::Io,
                       "duplicate dataset id " + example.passage.id);
    auto it = by_id.find(example.passage.id);
    if (it == by_id.end()) {
      skipped.emplace_back(example.passage.id, "no prediction with this id");
      continue;
    }
    if (it->second->empty()) {
      skipped.emplace_back(example.passage.id, "empty prediction set");
      continue;
    }
    if (example.passage.sentences.empty()) {
      skipped.emplace_back(example.passage.id, "passage has no sentences");
      continue;
    }
    usable.push_back(example);
    usable_preds.push_back(*it->second);
  }
  for (const auto& p : predictions)
    if (!dataset_ids.count(p.id))
      skipped.emplace_back(p.id, "no dataset example with this id");

  if (usable.empty())
    throw aps::Error(aps::ErrorCode::Io, "no evaluable examples");

  std::vector<aps::ExampleEvaluation> per_example;
  const auto report = aps::evaluate_corpus(usable, usable_preds, *scorer,
                                           cfg.concurrency, &per_example);
  print_report(report);

  if (!report_path.empty())
    aps::atomic_write_text(report_path, report_to_json(report).dump(2) + "\n");

  if (!per_example_path.empty()) {
    std::string content;
    for (const auto& ev : per_example) {
      json j;
      j["id"] = ev.id;
      j["k_pred"] = ev.n_predicted;
      j["rf_p"] = ev.rf_p;
      j["rf_r"] = ev.rf_r;
      j["rf_f1"] = ev.rf_f1;
      if (ev.rb_p) {
        j["rb_p"] = *ev.rb_p;
        j["rb_r"] = *ev.rb_r;
        j["rb_f1"] = *ev.rb_f1;
      }
      j["rf_prop_scores"] = ev.rf_prop_scores;
      j["rf_sentence_scores"] = ev.rf_sentence_scores;
      if (!ev.rb_pred_scores.empty()) {
        j["rb_pred_scores"] = ev.rb_pred_scores;
        j["rb_gold_scores"] = ev.rb_gold_scores;
      }
      content += j.dump() + "\n";
    }
    for (const auto& [id, reason] : skipped) {
      json j;
      j["id"] = id;
      j["error"] = reason;
      content += j.dump() + "\n";
    }
    aps::atomic_write_text(per_example_path, content);
  }

  for (const auto& [id, reason] : skipped)
    std::cerr << "skipped " << id << ": " << reason << "\n";
  return skipped.empty() ? 0 : 1;
}

int cmd_baseline(const std::string& dataset_path, const std::string& output_path) {
  ensure_distinct_paths({dataset_path}, {output_path});
  const auto dataset = aps::read_dataset_jsonl(dataset_path);
  if (dataset.empty())
    throw aps::Error(aps::ErrorCode::Io, "empty dataset " + dataset_path);
  std::vector<aps::PredictionRecord> records;
  for (const auto& example : dataset)
    records.push_back(
        {example.passage.id, aps::sentence_baseline(example.passage)});
  aps::write_predictions_jsonl(output_path, records);
  std::cerr << "wrote " << records.size() << " baseline predictions\n";
  return 0;
}

int cmd_correlate(const std::string& input_path) {
  std::ifstream in(input_path);
  if (!in) throw aps::Error(aps::ErrorCode::Io, "cannot open " + input_path);
  std::vector<std::string> order;
  std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> columns;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw aps::Error(aps::ErrorCode::Io,
                       input_path + ":" + std::to_string(lineno) + ": " + e.what());
    }
    if (!j.contains("metric") || !j.contains("value") || !j.contains("human"))
      throw aps::Error(aps::ErrorCode::Io,
                       input_path + ":" + std::to_string(lineno) +
                           ": row needs metric, value, human");
    const std::string metric = j["metric"].get<std::string>();
    if (!columns.count(metric)) order.push_back(metric);
    columns[metric].first.push_back(j["value"].get<double>());
    columns[metric].second.push_back(j["human"].get<double>());
  }
  if (order.empty())
    throw aps::Error(aps::ErrorCode::Io, "no rows in " + input_path);

  bool any_failed = false;
  for (const auto& metric : order) {
    const auto& [values, humans] = columns[metric];
    try {
      std::ostringstream formatted;
      formatted.precision(3);
      formatted << std::fixed << aps::pearson(values, humans);
      std::cout << metric << "\t" << formatted.str() << "\n";
    } catch (const aps::Error& e) {
      std::cerr << metric << ": " << e.what() << "\n";
      any_failed = true;
    }
  }
  return any_failed ? 1 : 0;
}

int cmd_render(const CommonFlags& flags, const std::string& mode,
               const std::string& input_path, const std::string& output_path) {
  const ToolConfig cfg = load_config(flags);
  ensure_distinct_paths({input_path, flags.config_path}, {output_path});
  const auto dataset = aps::read_dataset_jsonl(input_path);
  std::vector<aps::TrainingRecord> records;
  std::vector<std::string> failures;
  for (const auto& example : dataset) {
    try {
      if (mode == "grouped")
        records.push_back(
            aps::render_grouped(example.passage, example.gold, cfg.format));
      else
        records.push_back(
            aps::render_ungrouped(example.passage, example.gold, cfg.format));
    } catch (const aps::Error& e) {
      failures.push_back(example.passage.id + ": " + e.what());
    }
  }
  aps::write_training_jsonl(output_path, records);
  for (const auto& f : failures) std::cerr << "skipped " << f << "\n";
  std::cerr << "wrote " << records.size() << " training records\n";
  return failures.empty() ? 0 : 1;
}

int cmd_parse_output(const CommonFlags& flags, const std::string& mode,
                     std::size_t n_sentences, const std::string& input_path,
                     const std::string& output_path) {
  const ToolConfig cfg = load_config(flags);
  std::string raw;
  if (input_path.empty() || input_path == "-") {
    std::ostringstream buffer;
    buffer << std::cin.rdbuf();
    raw = buffer.str();
  } else {
    std::ifstream in(input_path, std::ios::binary);
    if (!in) throw aps::Error(aps::ErrorCode::Io, "cannot open " + input_path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    raw = buffer.str();
  }

  aps::PropositionSet parsed;
  try {
    parsed = mode == "grouped"
                 ? aps::parse_grouped_output(raw, n_sentences, cfg.format)
                 : aps::parse_ungrouped_output(raw, cfg.format);
  } catch (const aps::Error& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }

  json out;
  out["grouped"] = parsed.mode == aps::GroupingMode::Grouped;
  out["propositions"] = json::array();
  if (parsed.mode == aps::GroupingMode::Grouped) {
    for (const auto& group : parsed.groups) {
      json g = json::array();
      for (const auto& prop : group) g.push_back(prop.text);
      out["propositions"].push_back(g);
    }
  } else {
    for (const auto& prop : parsed.flatten()) out["propositions"].push_back(prop.text);
  }
  const std::string text = out.dump(2) + "\n";
  if (output_path.empty())
    std::cout << text;
  else
    aps::atomic_write_text(output_path, text);
  return 0;
}

int cmd_align(const CommonFlags& flags, const std::string& input_path,
              const std::string& output_path, const std::string& discards_path) {
  const ToolConfig cfg = load_config(flags);
  ensure_distinct_paths({input_path}, {output_path, discards_path});
  auto scorer = aps::make_scorer(cfg.scorer, cfg.cache_capacity);
  const auto raw = aps::read_dataset_jsonl(input_path);
  const auto result = aps::run_pipeline(raw, cfg.alignment, *scorer, cfg.concurrency);

  aps::write_dataset_jsonl(output_path, result.kept);

  if (!discards_path.empty()) {
    std::string content;
    for (const auto& [example, outcome] : result.discarded) {
      json j = json::parse(aps::dataset_example_to_json(example));
      j["reason"] = aps::alignment_status_name(outcome.status);
      json diagnostics;
      diagnostics["per_proposition"] = json::array();
      for (const auto& d : outcome.proposition_diagnostics) {
        json pd;
        pd["proposition"] = d.proposition_index;
        pd["best_sentence"] = d.best_sentence;
        pd["best_score"] = d.best_score;
        pd["via_prefix"] = d.via_prefix;
        pd["supported"] = d.supported;
        if (d.aligned_sentence) pd["aligned_sentence"] = *d.aligned_sentence;
        diagnostics["per_proposition"].push_back(pd);
      }
      diagnostics["per_sentence_counts"] = outcome.per_sentence_counts;
      j["diagnostics"] = diagnostics;
      content += j.dump() + "\n";
    }
    aps::atomic_write_text(discards_path, content);
  }

  std::cout << "aligned " << result.report.aligned << "  unsupported "
            << result.report.discarded_unsupported << "  non_comprehensive "
            << result.report.discarded_non_comprehensive << "\n";
  for (const auto& e : result.report.errors) std::cerr << "error " << e << "\n";
  return result.report.errors.empty() ? 0 : 1;
}

int cmd_split(const std::string& input_path, const std::string& train_path,
              const std::string& dev_path, double dev_fraction,
              std::uint64_t seed) {
  ensure_distinct_paths({input_path}, {train_path, dev_path});
  const auto dataset = aps::read_dataset_jsonl(input_path);
  if (dataset.empty())
    throw aps::Error(aps::ErrorCode::Io, "empty dataset " + input_path);
  const auto [train, dev] = aps::split_train_dev(dataset, dev_fraction, seed);
  aps::write_dataset_jsonl(train_path, train);
  aps::write_dataset_jsonl(dev_path, dev);
  std::cout << "train " << train.size() << "  dev " << dev.size() << "\n";
  return 0;
}

std::vector<std::string> read_domain_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw aps::Error(aps::ErrorCode::Io, "cannot open " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  const std::string content = buffer.str();
  // Either a JSON array or one domain per line.
  try {
    json j = json::parse(content);
    if (j.is_array()) {
      std::vector<std::string> out;
      for (const auto& d : j) out.push_back(d.get<std::string>());
      return out;
    }
  } catch (const json::exception&) {
  }
  std::vector<std::string> out;
  std::istringstream lines(content);
  std::string line;
  while (std::getline(lines, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' '))
      line.pop_back();
    if (!line.empty()) out.push_back(line);
  }
  return out;
}

int cmd_synth_domains(const std::string& seeds_path, std::size_t calls,
                      const std::string& output_path, const std::string& endpoint,
                      const std::string& checkpoint_path, std::size_t concurrency) {
  ensure_distinct_paths({seeds_path}, {output_path});
  const auto seeds = aps::read_seeds_jsonl(seeds_path);
  aps::RemoteGenerationClient client(endpoint);
  aps::GenerateConfig cfg;
  cfg.concurrency = concurrency;
  cfg.checkpoint_path = checkpoint_path;
  std::vector<std::string> errors;
  const auto domains = aps::collect_domains(client, seeds, calls, cfg, &errors);
  aps::atomic_write_text(output_path, json(domains).dump(2) + "\n");
  for (const auto& e : errors) std::cerr << e << "\n";
  std::cout << domains.size() << " distinct domains\n";
  return errors.empty() ? 0 : 1;
}

int cmd_synth_texts(const std::string& seeds_path, const std::string& domains_path,
                    const std::string& allowlist_path, std::size_t per_combo,
                    std::size_t ngram_n, const std::string& output_path,
                    const std::string& dropped_path, const std::string& endpoint,
                    const std::string& checkpoint_path, std::size_t concurrency) {
  ensure_distinct_paths({seeds_path, domains_path, allowlist_path},
                        {output_path, dropped_path});
  const auto seeds = aps::read_seeds_jsonl(seeds_path);
  auto domains = read_domain_list(domains_path);
  if (!allowlist_path.empty()) {
    const auto allowlist = read_domain_list(allowlist_path);
    std::set<std::string> allowed(allowlist.begin(), allowlist.end());
    std::erase_if(domains,
                  [&](const std::string& d) { return !allowed.count(d); });
  }
  aps::RemoteGenerationClient client(endpoint);
  aps::GenerateConfig cfg;
  cfg.texts_per_combo = per_combo;
  cfg.ngram_n = ngram_n;
  cfg.concurrency = concurrency;
  cfg.checkpoint_path = checkpoint_path;
  const auto result = aps::generate_texts(client, seeds, domains, cfg);
  aps::write_generated_jsonl(output_path, result.kept);
  if (!dropped_path.empty()) aps::write_generated_jsonl(dropped_path, result.dropped);
  for (const auto& e : result.call_errors) std::cerr << e << "\n";
  std::cout << "kept " << result.kept.size() << "  dropped " << result.dropped.size()
            << "\n";
  return result.call_errors.empty() ? 0 : 1;
}

int cmd_synth_filter(const std::string& candidates_path, const std::string& seeds_path,
                     std::size_t n, const std::string& output_path,
                     const std::string& dropped_path) {
  ensure_distinct_paths({candidates_path, seeds_path}, {output_path, dropped_path});
  const auto candidates = aps::read_generated_jsonl(candidates_path);
  const auto seeds = aps::read_seeds_jsonl(seeds_path);
  std::vector<std::string> candidate_texts, seed_texts;
  for (const auto& c : candidates) candidate_texts.push_back(c.text);
  for (const auto& s : seeds) seed_texts.push_back(s.text);
  const auto [kept_texts, dropped_texts] =
      aps::ngram_overlap_filter(candidate_texts, seed_texts, n);
  std::set<std::string> dropped_set(dropped_texts.begin(), dropped_texts.end());
  std::vector<aps::GeneratedText> kept, dropped;
  for (const auto& c : candidates)
    (dropped_set.count(c.text) ? dropped : kept).push_back(c);
  aps::write_generated_jsonl(output_path, kept);
  if (!dropped_path.empty()) aps::write_generated_jsonl(dropped_path, dropped);
  std::cout << "kept " << kept.size() << "  dropped " << dropped.size() << "\n";
  return 0;
}

int cmd_synth_distill(const CommonFlags& flags, const std::string& texts_path,
                      const std::string& output_path, const std::string& quarantine_path,
                      const std::string& endpoint, const std::string& teacher_id) {
  const ToolConfig cfg = load_config(flags);
  ensure_distinct_paths({texts_path}, {output_path, quarantine_path});
  const auto texts = aps::read_generated_jsonl(texts_path);
  aps::RemoteGenerationClient teacher(endpoint);
  const auto result =
      aps::build_distillation_records(texts, teacher, teacher_id, cfg.format);

  std::vector<aps::TrainingRecord> records;
  for (std::size_t i = 0; i < result.records.size(); ++i)
    records.push_back(aps::to_training_record(result.records[i], i, cfg.format));
  aps::write_training_jsonl(output_path, records);

  if (!quarantine_path.empty()) {
    std::string content;
    for (const auto& q : result.quarantined) {
      json j;
      j["domain"] = q.source.domain;
      j["length"] = aps::text_length_name(q.source.length);
      j["index"] = q.source.index;
      j["text"] = q.source.text;
      j["raw_response"] = q.raw_response;
      j["error"] = q.error;
      content += j.dump() + "\n";
    }
    aps::atomic_write_text(quarantine_path, content);
  }

  std::cout << "records " << result.records.size() << "  quarantined "
            << result.quarantined.size() << "\n";
  return result.quarantined.empty() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"abstractive proposition segmentation toolkit"};
  app.require_subcommand(1);

  // evaluate
  CommonFlags eval_flags;
  std::string eval_predictions, eval_dataset, eval_report, eval_per_example;
  auto* evaluate = app.add_subcommand("evaluate", "score predictions against a dataset");
  add_common_flags(evaluate, eval_flags);
  evaluate->add_option("--predictions", eval_predictions)->required();
  evaluate->add_option("--dataset", eval_dataset)->required();
  evaluate->add_option("--report", eval_report, "metric report JSON");
  evaluate->add_option("--per-example", eval_per_example, "per-example audit JSONL");

  // baseline
  std::string baseline_dataset, baseline_output;
  auto* baseline = app.add_subcommand("baseline", "emit sentence-as-proposition predictions");
  baseline->add_option("--dataset", baseline_dataset)->required();
  baseline->add_option("--output", baseline_output)->required();

  // correlate
  std::string correlate_input;
  auto* correlate = app.add_subcommand("correlate", "Pearson correlation per metric column");
  correlate->add_option("--input", correlate_input)->required();

  // render
  CommonFlags render_flags;
  std::string render_mode = "grouped", render_input, render_output;
  auto* render = app.add_subcommand("render", "emit training records");
  add_common_flags(render, render_flags, /*with_scorer=*/false);
  render->add_option("--mode", render_mode)->check(CLI::IsMember({"grouped", "ungrouped"}));
  render->add_option("--input", render_input)->required();
  render->add_option("--output", render_output)->required();

  // parse-output
  CommonFlags parse_flags;
  std::string parse_mode = "grouped", parse_input, parse_output_path;
  std::size_t parse_sentences = 0;
  auto* parse = app.add_subcommand("parse-output", "parse model output into propositions");
  add_common_flags(parse, parse_flags, /*with_scorer=*/false);
  parse->add_option("--mode", parse_mode)->check(CLI::IsMember({"grouped", "ungrouped"}));
  parse->add_option("--sentences", parse_sentences, "expected group count (grouped mode)");
  parse->add_option("--input", parse_input, "raw output file, - for stdin");
  parse->add_option("--output", parse_output_path, "write JSON here instead of stdout");

  // align
  CommonFlags align_flags;
  std::string align_input, align_output, align_discards;
  auto* align = app.add_subcommand("align", "align propositions to sentences and filter");
  add_common_flags(align, align_flags);
  align->add_option("--tau", align_flags.tau, "alignment threshold");
  align->add_option("--input", align_input)->required();
  align->add_option("--output", align_output)->required();
  align->add_option("--discards", align_discards, "discarded examples JSONL");

  // split
  std::string split_input, split_train, split_dev;
  double split_fraction = 0.164;
  std::uint64_t split_seed = 0;
  auto* split = app.add_subcommand("split", "seeded train/dev split");
  split->add_option("--input", split_input)->required();
  split->add_option("--train", split_train)->required();
  split->add_option("--dev", split_dev)->required();
  split->add_option("--dev-fraction", split_fraction);
  split->add_option("--seed", split_seed);

  // synth
  auto* synth = app.add_subcommand("synth", "synthetic data generation");
  synth->require_subcommand(1);

  std::string sd_seeds, sd_output, sd_endpoint, sd_checkpoint;
  std::size_t sd_calls = 0;
  std::size_t sd_concurrency = 8;
  auto* synth_domains = synth->add_subcommand("domains", "collect new domain names");
  synth_domains->add_option("--seeds", sd_seeds)->required();
  synth_domains->add_option("--calls", sd_calls)->required();
  synth_domains->add_option("--output", sd_output)->required();
  synth_domains->add_option("--endpoint", sd_endpoint, "generation service URL");
  synth_domains->add_option("--checkpoint", sd_checkpoint);
  synth_domains->add_option("--concurrency", sd_concurrency, "in-flight generation calls");

  std::string st_seeds, st_domains, st_allowlist, st_output, st_dropped,
      st_endpoint, st_checkpoint;
  std::size_t st_per_combo = 3, st_ngram = 4;
  std::size_t st_concurrency = 8;
  auto* synth_texts = synth->add_subcommand("texts", "generate texts per domain/length");
  synth_texts->add_option("--seeds", st_seeds)->required();
  synth_texts->add_option("--domains", st_domains)->required();
  synth_texts->add_option("--allowlist", st_allowlist, "manually selected domains");
  synth_texts->add_option("--per-combo", st_per_combo);
  synth_texts->add_option("--ngram", st_ngram);
  synth_texts->add_option("--output", st_output)->required();
  synth_texts->add_option("--dropped", st_dropped);
  synth_texts->add_option("--endpoint", st_endpoint);
  synth_texts->add_option("--checkpoint", st_checkpoint);
  synth_texts->add_option("--concurrency", st_concurrency, "in-flight generation calls");

  std::string sf_candidates, sf_seeds, sf_output, sf_dropped;
  std::size_t sf_n = 4;
  auto* synth_filter = synth->add_subcommand("filter", "n-gram overlap filter");
  synth_filter->add_option("--candidates", sf_candidates)->required();
  synth_filter->add_option("--seeds", sf_seeds)->required();
  synth_filter->add_option("--n", sf_n);
  synth_filter->add_option("--output", sf_output)->required();
  synth_filter->add_option("--dropped", sf_dropped);

  CommonFlags distill_flags;
  std::string dt_texts, dt_output, dt_quarantine, dt_endpoint, dt_teacher = "teacher";
  auto* synth_distill = synth->add_subcommand("distill", "teacher-label texts");
  add_common_flags(synth_distill, distill_flags, /*with_scorer=*/false);
  synth_distill->add_option("--texts", dt_texts)->required();
  synth_distill->add_option("--output", dt_output)->required();
  synth_distill->add_option("--quarantine", dt_quarantine);
  synth_distill->add_option("--endpoint", dt_endpoint);
  synth_distill->add_option("--teacher-id", dt_teacher);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (evaluate->parsed())
      return cmd_evaluate(eval_flags, eval_predictions, eval_dataset, eval_report,
                          eval_per_example);
    if (baseline->parsed()) return cmd_baseline(baseline_dataset, baseline_output);
    if (correlate->parsed()) return cmd_correlate(correlate_input);
    if (render->parsed())
      return cmd_render(render_flags, render_mode, render_input, render_output);
    if (parse->parsed()) {
      if (parse_mode == "grouped" && parse_sentences == 0)
        throw aps::Error(aps::ErrorCode::Config,
                         "--sentences is required in grouped mode");
      return cmd_parse_output(parse_flags, parse_mode, parse_sentences, parse_input,
                              parse_output_path);
    }
    if (align->parsed())
      return cmd_align(align_flags, align_input, align_output, align_discards);
    if (split->parsed())
      return cmd_split(split_input, split_train, split_dev, split_fraction,
                       split_seed);
    if (synth_domains->parsed())
      return cmd_synth_domains(sd_seeds, sd_calls, sd_output, sd_endpoint,
                               sd_checkpoint, sd_concurrency);
    if (synth_texts->parsed())
      return cmd_synth_texts(st_seeds, st_domains, st_allowlist, st_per_combo,
                             st_ngram, st_output, st_dropped, st_endpoint,
                             st_checkpoint, st_concurrency);
    if (synth_filter->parsed())
      return cmd_synth_filter(sf_candidates, sf_seeds, sf_n, sf_output, sf_dropped);
    if (synth_distill->parsed())
      return cmd_synth_distill(distill_flags, dt_texts, dt_output, dt_quarantine,
                               dt_endpoint, dt_teacher);
  } catch (const aps::Error& e) {
    std::cerr << e.what() << "\n";
    return (e.code() == aps::ErrorCode::Io || e.code() == aps::ErrorCode::Config)
               ? 2
               : 1;
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }
  return 2;
}
