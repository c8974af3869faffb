#include "aps/synthgen.hpp"

#include "aps/error.hpp"
#include "aps/jsonl.hpp"
#include "aps/parallel.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <thread>
#include <tuple>
#include <unordered_set>

#include <httplib.h>
#include <json.hpp>

namespace aps {

const char* text_length_name(TextLength length) {
  return length == TextLength::Short ? "short" : "paragraph";
}

std::optional<TextLength> parse_text_length(const std::string& name) {
  if (name == "short") return TextLength::Short;
  if (name == "paragraph") return TextLength::Paragraph;
  return std::nullopt;
}

namespace {

std::string seed_block(const SeedExample& seed) {
  return "Domain: " + seed.domain + "\nLength: " +
         text_length_name(seed.length) + "\nText: " + seed.text;
}

void split_endpoint(const std::string& endpoint, std::string& base,
                    std::string& prefix) {
  auto scheme_end = endpoint.find("://");
  std::size_t host_start = scheme_end == std::string::npos ? 0 : scheme_end + 3;
  auto slash = endpoint.find('/', host_start);
  if (slash == std::string::npos) {
    base = endpoint;
    prefix.clear();
  } else {
    base = endpoint.substr(0, slash);
    prefix = endpoint.substr(slash);
    while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  }
}

std::string trim_copy(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

// First non-empty line of a generation, trimmed; how domain names come back.
std::string first_line(const std::string& s) {
  for (std::size_t start = 0; start <= s.size();) {
    auto nl = s.find('\n', start);
    const std::string line =
        trim_copy(s.substr(start, nl == std::string::npos ? std::string::npos
                                                          : nl - start));
    if (!line.empty()) return line;
    if (nl == std::string::npos) break;
    start = nl + 1;
  }
  return "";
}

struct Checkpoint {
  std::size_t domain_calls_done = 0;
  std::vector<std::string> domains;
  std::vector<GeneratedText> texts;

  static Checkpoint load(const std::string& path) {
    Checkpoint cp;
    if (path.empty() || !std::filesystem::exists(path)) return cp;
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Io, "cannot read checkpoint " + path);
    nlohmann::json j;
    in >> j;
    cp.domain_calls_done = j.value("domain_calls_done", std::size_t{0});
    for (const auto& d : j.value("domains", nlohmann::json::array()))
      cp.domains.push_back(d.get<std::string>());
    for (const auto& t : j.value("texts", nlohmann::json::array())) {
      GeneratedText g;
      g.domain = t.at("domain").get<std::string>();
      auto length = parse_text_length(t.at("length").get<std::string>());
      if (!length)
        throw Error(ErrorCode::Config, "bad length in checkpoint " + path);
      g.length = *length;
      g.index = t.at("index").get<std::size_t>();
      g.text = t.at("text").get<std::string>();
      cp.texts.push_back(std::move(g));
    }
    return cp;
  }

  void save(const std::string& path) const {
    if (path.empty()) return;
    nlohmann::json j;
    j["domain_calls_done"] = domain_calls_done;
    j["domains"] = domains;
    j["texts"] = nlohmann::json::array();
    for (const auto& t : texts)
      j["texts"].push_back({{"domain", t.domain},
                            {"length", text_length_name(t.length)},
                            {"index", t.index},
                            {"text", t.text}});
    atomic_write_text(path, j.dump());
  }
};

}  // namespace

RemoteGenerationClient::RemoteGenerationClient(std::string endpoint,
                                               std::chrono::milliseconds timeout,
                                               std::chrono::milliseconds retry_base)
    : timeout_(timeout), retry_base_(retry_base) {
  if (const char* env = std::getenv("APS_GEN_ENDPOINT"); env && *env)
    endpoint = env;
  if (endpoint.empty())
    throw Error(ErrorCode::Config, "generation client requires an endpoint");
  split_endpoint(endpoint, base_url_, path_prefix_);
}

std::string RemoteGenerationClient::generate(const GenerationRequest& request) {
  nlohmann::json body{{"prompt", request.prompt},
                      {"temperature", request.temperature}};
  const std::string payload = body.dump();
  std::string last_failure;
  const int attempts = std::max(1, request.max_attempts);
  for (int attempt = 0; attempt < attempts; ++attempt) {
    if (attempt > 0)
      std::this_thread::sleep_for(retry_base_ * (1 << (attempt - 1)));
    httplib::Client client(base_url_);
    client.set_connection_timeout(timeout_);
    client.set_read_timeout(timeout_);
    auto res = client.Post(path_prefix_ + "/generate", payload, "application/json");
    if (!res) {
      last_failure = "no response";
      continue;
    }
    if (res->status == 429 || (res->status >= 500 && res->status < 600)) {
      last_failure = "status " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200)
      throw Error(ErrorCode::Protocol,
                  "generation service returned status " + std::to_string(res->status));
    try {
      auto parsed = nlohmann::json::parse(res->body);
      return parsed.at("text").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::Protocol,
                  std::string("unparseable generation response: ") + e.what());
    }
  }
  throw Error(ErrorCode::Transport,
              "generation service unreachable after " + std::to_string(attempts) +
                  " attempts: " + last_failure);
}

std::string build_domain_prompt(const std::vector<SeedExample>& seeds) {
  if (seeds.empty())
    throw Error(ErrorCode::EmptyInput, "domain prompt needs seed examples");
  std::string prompt;
  for (const auto& seed : seeds) prompt += seed_block(seed) + "\n\n";
  prompt += "Domain:";
  return prompt;
}

std::string build_text_prompt(const std::vector<SeedExample>& seeds,
                              const std::string& domain, TextLength length) {
  if (seeds.empty())
    throw Error(ErrorCode::EmptyInput, "text prompt needs seed examples");
  if (domain.empty())
    throw Error(ErrorCode::EmptyInput, "text prompt needs a domain");
  std::string prompt;
  for (const auto& seed : seeds) prompt += seed_block(seed) + "\n\n";
  prompt += "Domain: " + domain + "\nLength: " + text_length_name(length) +
            "\nText:";
  return prompt;
}

std::pair<std::vector<std::string>, std::vector<std::string>>
ngram_overlap_filter(const std::vector<std::string>& candidates,
                     const std::vector<std::string>& seeds, std::size_t n) {
  if (n == 0) throw Error(ErrorCode::Config, "n must be >= 1");

  auto ngrams_of = [n](const std::string& text) {
    std::vector<std::string> grams;
    const auto tokens = normalize_tokens(text);
    if (tokens.size() < n) return grams;
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
      std::string gram = tokens[i];
      for (std::size_t k = 1; k < n; ++k) gram += ' ' + tokens[i + k];
      grams.push_back(std::move(gram));
    }
    return grams;
  };

  std::unordered_set<std::string> seed_grams;
  for (const auto& seed : seeds)
    for (auto& gram : ngrams_of(seed)) seed_grams.insert(std::move(gram));

  std::pair<std::vector<std::string>, std::vector<std::string>> out;
  for (const auto& candidate : candidates) {
    bool overlaps = false;
    for (const auto& gram : ngrams_of(candidate)) {
      if (seed_grams.count(gram)) {
        overlaps = true;
        break;
      }
    }
    (overlaps ? out.second : out.first).push_back(candidate);
  }
  return out;
}

std::vector<std::string> collect_domains(GenerationClient& client,
                                         const std::vector<SeedExample>& seeds,
                                         std::size_t n_calls,
                                         const GenerateConfig& cfg,
                                         std::vector<std::string>* call_errors) {
  Checkpoint cp = Checkpoint::load(cfg.checkpoint_path);
  std::set<std::string> seen(cp.domains.begin(), cp.domains.end());
  for (const auto& seed : seeds) seen.insert(seed.domain);

  const std::string prompt = build_domain_prompt(seeds);
  // Waves of checkpoint_every calls, each wave fanned out over bounded
  // workers; merging stays single-threaded and call-index ordered, so the
  // collected domain list is deterministic for a given response sequence.
  std::size_t next_call = cp.domain_calls_done;
  while (next_call < n_calls) {
    const std::size_t wave =
        std::min(cfg.checkpoint_every, n_calls - next_call);
    std::vector<std::string> responses(wave);
    std::vector<std::string> errors(wave);
    parallel_for(wave, cfg.concurrency, [&](std::size_t i) {
      try {
        responses[i] =
            client.generate({prompt, cfg.domain_temperature, cfg.max_attempts});
      } catch (const Error& e) {
        errors[i] = e.what();
      }
    });
    for (std::size_t i = 0; i < wave; ++i) {
      if (!errors[i].empty()) {
        if (call_errors)
          call_errors->push_back("domain call " + std::to_string(next_call + i) +
                                 ": " + errors[i]);
        continue;
      }
      const std::string domain = first_line(responses[i]);
      if (!domain.empty() && seen.insert(domain).second)
        cp.domains.push_back(domain);
    }
    next_call += wave;
    cp.domain_calls_done = next_call;
    cp.save(cfg.checkpoint_path);
  }
  cp.save(cfg.checkpoint_path);
  return cp.domains;
}

CorpusResult generate_texts(GenerationClient& client,
                            const std::vector<SeedExample>& seeds,
                            const std::vector<std::string>& domains,
                            const GenerateConfig& cfg) {
  Checkpoint cp = Checkpoint::load(cfg.checkpoint_path);
  std::set<std::tuple<std::string, std::string, std::size_t>> completed;
  for (const auto& t : cp.texts)
    completed.emplace(t.domain, text_length_name(t.length), t.index);

  CorpusResult result;
  result.domains = domains;

  // Pending (domain, length, index) triples in canonical order.
  struct Pending {
    std::string domain;
    TextLength length;
    std::size_t index;
  };
  std::vector<Pending> pending;
  for (const auto& domain : domains)
    for (TextLength length : {TextLength::Short, TextLength::Paragraph})
      for (std::size_t index = 0; index < cfg.texts_per_combo; ++index)
        if (!completed.count({domain, text_length_name(length), index}))
          pending.push_back({domain, length, index});

  // Waves sized by checkpoint_every; generation fans out over bounded
  // workers, the checkpoint writer stays single-threaded.
  for (std::size_t wave_start = 0; wave_start < pending.size();
       wave_start += cfg.checkpoint_every) {
    const std::size_t wave =
        std::min(cfg.checkpoint_every, pending.size() - wave_start);
    std::vector<std::string> texts(wave);
    std::vector<std::string> errors(wave);
    parallel_for(wave, cfg.concurrency, [&](std::size_t i) {
      const Pending& p = pending[wave_start + i];
      try {
        const std::string raw = client.generate(
            {build_text_prompt(seeds, p.domain, p.length), cfg.text_temperature,
             cfg.max_attempts});
        texts[i] = trim_copy(raw);
      } catch (const Error& e) {
        errors[i] = e.what();
      }
    });
    for (std::size_t i = 0; i < wave; ++i) {
      const Pending& p = pending[wave_start + i];
      const std::string where =
          p.domain + "/" + text_length_name(p.length) + "/" + std::to_string(p.index);
      if (!errors[i].empty()) {
        result.call_errors.push_back("text call " + where + ": " + errors[i]);
        continue;
      }
      if (texts[i].empty()) {
        result.call_errors.push_back("empty generation for " + where);
        continue;
      }
      cp.texts.push_back({p.domain, p.length, p.index, texts[i]});
    }
    cp.save(cfg.checkpoint_path);
  }
  cp.save(cfg.checkpoint_path);

  // Canonical order: domain list order, then length, then sequence.
  std::map<std::tuple<std::string, int, std::size_t>, const GeneratedText*> by_key;
  for (const auto& t : cp.texts)
    by_key[{t.domain, static_cast<int>(t.length), t.index}] = &t;
  std::vector<GeneratedText> ordered;
  for (const auto& domain : domains)
    for (TextLength length : {TextLength::Short, TextLength::Paragraph})
      for (std::size_t index = 0; index < cfg.texts_per_combo; ++index) {
        auto it = by_key.find({domain, static_cast<int>(length), index});
        if (it != by_key.end()) ordered.push_back(*it->second);
      }

  std::vector<std::string> seed_texts;
  for (const auto& seed : seeds) seed_texts.push_back(seed.text);
  std::vector<std::string> candidate_texts;
  for (const auto& t : ordered) candidate_texts.push_back(t.text);
  const auto [kept_texts, dropped_texts] =
      ngram_overlap_filter(candidate_texts, seed_texts, cfg.ngram_n);

  std::unordered_set<std::string> dropped_set(dropped_texts.begin(),
                                              dropped_texts.end());
  for (const auto& t : ordered)
    (dropped_set.count(t.text) ? result.dropped : result.kept).push_back(t);
  return result;
}

CorpusResult generate_corpus(GenerationClient& client,
                             const std::vector<SeedExample>& seeds,
                             std::size_t n_domain_calls,
                             const std::optional<std::vector<std::string>>& allowlist,
                             const GenerateConfig& cfg) {
  std::vector<std::string> call_errors;
  auto domains = collect_domains(client, seeds, n_domain_calls, cfg, &call_errors);
  if (allowlist) {
    std::unordered_set<std::string> allowed(allowlist->begin(), allowlist->end());
    std::erase_if(domains, [&](const std::string& d) { return !allowed.count(d); });
  }
  auto result = generate_texts(client, seeds, domains, cfg);
  result.domains = domains;
  result.call_errors.insert(result.call_errors.begin(), call_errors.begin(),
                            call_errors.end());
  return result;
}

DistillationResult build_distillation_records(const std::vector<GeneratedText>& texts,
                                              GenerationClient& teacher,
                                              const std::string& teacher_id,
                                              const FormatConfig& cfg) {
  DistillationResult result;
  for (const auto& source : texts) {
    const Passage passage = make_passage(
        source.domain + ":" + text_length_name(source.length) + ":" +
            std::to_string(source.index),
        source.text);
    if (passage.sentences.empty()) {
      result.quarantined.push_back({source, "", "passage has no sentences"});
      continue;
    }
    std::string raw;
    try {
      raw = teacher.generate(
          {render_grouped_input(passage, cfg), 0.0, 4});
      auto props = parse_grouped_output(raw, passage.sentences.size(), cfg);
      result.records.push_back(
          {source.text, std::move(props), source.domain, source.length, teacher_id});
    } catch (const Error& e) {
      result.quarantined.push_back({source, raw, e.what()});
    }
  }
  return result;
}

TrainingRecord to_training_record(const DistillationRecord& record,
                                  std::size_t index, const FormatConfig& cfg) {
  Passage passage = make_passage(
      record.teacher_id + ":" + record.domain + ":" +
          text_length_name(record.length) + ":" + std::to_string(index),
      record.text);
  return render_grouped(passage, record.propositions, cfg);
}

}  // namespace aps
