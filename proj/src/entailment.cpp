#include "aps/entailment.hpp"

#include "aps/error.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <thread>
#include <unordered_set>

#include <httplib.h>
#include <json.hpp>

namespace aps {

std::vector<Score> Scorer::score_batch(const std::vector<ScorePair>& pairs) {
  std::vector<Score> out;
  out.reserve(pairs.size());
  for (const auto& [premise, claim] : pairs) out.push_back(score(premise, claim));
  return out;
}

std::vector<std::string> normalize_tokens(const std::string& text) {
  std::string cleaned;
  cleaned.reserve(text.size());
  for (char c : text) {
    const auto uc = static_cast<unsigned char>(c);
    if (std::ispunct(uc)) continue;
    cleaned += std::isspace(uc) ? ' ' : static_cast<char>(std::tolower(uc));
  }
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < cleaned.size()) {
    while (i < cleaned.size() && cleaned[i] == ' ') ++i;
    std::size_t start = i;
    while (i < cleaned.size() && cleaned[i] != ' ') ++i;
    if (i > start) tokens.push_back(cleaned.substr(start, i - start));
  }
  return tokens;
}

Score lexical_oracle_score(const std::string& premise, const std::string& claim) {
  const auto claim_tokens = normalize_tokens(claim);
  if (claim_tokens.empty()) return 1.0;
  const auto premise_tokens = normalize_tokens(premise);
  std::unordered_set<std::string> premise_set(premise_tokens.begin(),
                                              premise_tokens.end());
  std::unordered_set<std::string> claim_set(claim_tokens.begin(),
                                            claim_tokens.end());
  std::size_t contained = 0;
  for (const auto& t : claim_set)
    if (premise_set.count(t)) ++contained;
  return static_cast<double>(contained) / static_cast<double>(claim_set.size());
}

Score LexicalOracleScorer::score(const std::string& premise,
                                 const std::string& claim) {
  if (premise.empty() || claim.empty())
    throw Error(ErrorCode::EmptyInput, "premise and claim must be non-empty");
  return lexical_oracle_score(premise, claim);
}

namespace {

// Splits "http://host:port/prefix" into base url and path prefix.
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

bool retryable_status(int status) {
  return status == 429 || (status >= 500 && status < 600);
}

}  // namespace

RemoteScorer::RemoteScorer(ScorerBackend backend) : backend_(std::move(backend)) {
  if (const char* env = std::getenv("APS_SCORER_ENDPOINT"); env && *env)
    backend_.endpoint = env;
  if (backend_.endpoint.empty())
    throw Error(ErrorCode::Config, "remote scorer requires an endpoint");
  if (backend_.max_batch == 0)
    throw Error(ErrorCode::Config, "max_batch must be >= 1");
  split_endpoint(backend_.endpoint, base_url_, path_prefix_);
}

Score RemoteScorer::score(const std::string& premise, const std::string& claim) {
  return score_batch({{premise, claim}})[0];
}

std::vector<Score> RemoteScorer::score_batch(const std::vector<ScorePair>& pairs) {
  for (const auto& [premise, claim] : pairs)
    if (premise.empty() || claim.empty())
      throw Error(ErrorCode::EmptyInput, "premise and claim must be non-empty");

  std::vector<Score> out;
  out.reserve(pairs.size());
  for (std::size_t offset = 0; offset < pairs.size();
       offset += backend_.max_batch) {
    const std::size_t count = std::min(backend_.max_batch, pairs.size() - offset);
    std::vector<ScorePair> chunk(pairs.begin() + offset,
                                 pairs.begin() + offset + count);
    auto scores = post_batch(chunk, offset);
    out.insert(out.end(), scores.begin(), scores.end());
  }
  return out;
}

std::vector<Score> RemoteScorer::post_batch(const std::vector<ScorePair>& pairs,
                                            std::size_t batch_offset) {
  nlohmann::json body;
  body["pairs"] = nlohmann::json::array();
  for (const auto& [premise, claim] : pairs)
    body["pairs"].push_back({{"premise", premise}, {"claim", claim}});
  const std::string payload = body.dump();

  std::string last_failure;
  for (int attempt = 0; attempt <= backend_.max_retries; ++attempt) {
    if (attempt > 0) {
      auto delay = backend_.retry_base * (1 << (attempt - 1));
      std::this_thread::sleep_for(delay);
    }
    // One client per call keeps concurrent workers independent.
    httplib::Client client(base_url_);
    client.set_connection_timeout(backend_.timeout);
    client.set_read_timeout(backend_.timeout);
    auto res = client.Post(path_prefix_ + "/score", payload, "application/json");
    if (!res) {
      last_failure = "no response from " + backend_.endpoint;
      continue;
    }
    if (retryable_status(res->status)) {
      last_failure = "status " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200)
      throw Error(ErrorCode::Protocol,
                  "scorer returned status " + std::to_string(res->status) +
                      " for batch at index " + std::to_string(batch_offset));
    nlohmann::json parsed;
    try {
      parsed = nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::Protocol,
                  std::string("unparseable scorer response: ") + e.what());
    }
    if (!parsed.contains("scores") || !parsed["scores"].is_array() ||
        parsed["scores"].size() != pairs.size())
      throw Error(ErrorCode::Protocol,
                  "scorer response must carry one score per pair (batch at index " +
                      std::to_string(batch_offset) + ")");
    std::vector<Score> scores;
    scores.reserve(pairs.size());
    for (const auto& value : parsed["scores"]) {
      if (!value.is_number())
        throw Error(ErrorCode::Protocol, "non-numeric score in response");
      double v = value.get<double>();
      if (v < 0.0 || v > 1.0) {
        ++clamp_count_;
        v = std::clamp(v, 0.0, 1.0);
      }
      scores.push_back(v);
    }
    return scores;
  }
  throw Error(ErrorCode::Transport,
              "scorer unreachable after " + std::to_string(backend_.max_retries + 1) +
                  " attempts (batch at index " + std::to_string(batch_offset) +
                  "): " + last_failure);
}

std::optional<Score> ScoreCache::get(const std::string& premise,
                                     const std::string& claim) {
  std::lock_guard<std::mutex> lock(mutex_);
  auto it = index_.find({premise, claim});
  if (it == index_.end()) {
    ++misses_;
    return std::nullopt;
  }
  order_.splice(order_.begin(), order_, it->second);
  ++hits_;
  return it->second->second;
}

void ScoreCache::put(const std::string& premise, const std::string& claim,
                     Score score) {
  if (capacity_ == 0) return;
  std::lock_guard<std::mutex> lock(mutex_);
  Key key{premise, claim};
  auto it = index_.find(key);
  if (it != index_.end()) {
    it->second->second = score;
    order_.splice(order_.begin(), order_, it->second);
    return;
  }
  order_.emplace_front(key, score);
  index_[key] = order_.begin();
  if (index_.size() > capacity_) {
    index_.erase(order_.back().first);
    order_.pop_back();
  }
}

std::size_t ScoreCache::size() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return index_.size();
}

Score CachingScorer::score(const std::string& premise, const std::string& claim) {
  if (auto cached = cache_.get(premise, claim)) return *cached;
  Score s = inner_->score(premise, claim);
  cache_.put(premise, claim, s);
  return s;
}

std::vector<Score> CachingScorer::score_batch(const std::vector<ScorePair>& pairs) {
  std::vector<Score> out(pairs.size(), 0.0);
  std::vector<std::size_t> miss_positions;
  std::vector<ScorePair> misses;
  std::unordered_map<std::string, std::size_t> first_miss;  // dedup within batch
  std::vector<std::size_t> miss_source(pairs.size());

  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (auto cached = cache_.get(pairs[i].first, pairs[i].second)) {
      out[i] = *cached;
      continue;
    }
    const std::string key = pairs[i].first + '\x1e' + pairs[i].second;
    auto [it, inserted] = first_miss.emplace(key, misses.size());
    if (inserted) misses.push_back(pairs[i]);
    miss_positions.push_back(i);
    miss_source[i] = it->second;
  }

  if (!misses.empty()) {
    auto scores = inner_->score_batch(misses);
    for (std::size_t i = 0; i < misses.size(); ++i)
      cache_.put(misses[i].first, misses[i].second, scores[i]);
    for (std::size_t pos : miss_positions) out[pos] = scores[miss_source[pos]];
  }
  return out;
}

std::shared_ptr<Scorer> make_scorer(const ScorerBackend& backend,
                                    std::size_t cache_capacity) {
  std::shared_ptr<Scorer> inner;
  if (backend.kind == BackendKind::Remote)
    inner = std::make_shared<RemoteScorer>(backend);
  else
    inner = std::make_shared<LexicalOracleScorer>();
  if (cache_capacity == 0) return inner;
  return std::make_shared<CachingScorer>(std::move(inner), cache_capacity);
}

}  // namespace aps
