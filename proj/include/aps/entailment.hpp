#pragma once

#include <atomic>
#include <chrono>
#include <cstddef>
#include <list>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace aps {

/// Entailment scores live in [0, 1].
using Score = double;

using ScorePair = std::pair<std::string, std::string>;  // (premise, claim)

enum class BackendKind { Remote, LexicalOracle };

struct ScorerBackend {
  BackendKind kind = BackendKind::LexicalOracle;
  std::string endpoint;  // required for Remote; APS_SCORER_ENDPOINT overrides
  std::chrono::milliseconds timeout{10000};
  std::size_t max_batch = 32;
  std::chrono::milliseconds retry_base{500};  // exponential backoff base
  int max_retries = 3;                        // on 429/5xx
};

/// NLI(premise, claim) scoring contract. Implementations must be safe for
/// concurrent invocation from many workers.
class Scorer {
 public:
  virtual ~Scorer() = default;

  /// Scores one (premise, claim) pair. Throws Error{EmptyInput} on empty
  /// strings, Error{Transport}/Error{Protocol} for remote failures.
  virtual Score score(const std::string& premise, const std::string& claim) = 0;

  /// Element i equals score(pairs[i]). The default loops; remote backends
  /// batch into at most ceil(n / max_batch) round-trips.
  virtual std::vector<Score> score_batch(const std::vector<ScorePair>& pairs);
};

/// Normalizes (lowercase, strip punctuation, collapse whitespace) and splits
/// into tokens, order preserved.
std::vector<std::string> normalize_tokens(const std::string& text);

/// Deterministic offline stand-in for an NLI model: the fraction of the
/// claim's token set contained in the premise's token set. 1.0 when the claim
/// normalizes to no tokens.
Score lexical_oracle_score(const std::string& premise, const std::string& claim);

class LexicalOracleScorer final : public Scorer {
 public:
  Score score(const std::string& premise, const std::string& claim) override;
};

/// HTTP backend speaking POST {endpoint}/score
/// {"pairs":[{"premise":..,"claim":..},..]} -> {"scores":[..]}.
/// Retries 429/5xx with exponential backoff; clamps returned values into
/// [0, 1] and counts how often clamping fired.
class RemoteScorer final : public Scorer {
 public:
  explicit RemoteScorer(ScorerBackend backend);

  Score score(const std::string& premise, const std::string& claim) override;
  std::vector<Score> score_batch(const std::vector<ScorePair>& pairs) override;

  std::size_t clamp_count() const { return clamp_count_.load(); }

 private:
  std::vector<Score> post_batch(const std::vector<ScorePair>& pairs,
                                std::size_t batch_offset);

  ScorerBackend backend_;
  std::string base_url_;
  std::string path_prefix_;
  std::atomic<std::size_t> clamp_count_{0};
};

/// LRU score cache, internally synchronized. Keys are the full (premise,
/// claim) strings so a hit always returns the exact stored score.
class ScoreCache {
 public:
  explicit ScoreCache(std::size_t capacity) : capacity_(capacity) {}

  std::optional<Score> get(const std::string& premise, const std::string& claim);
  void put(const std::string& premise, const std::string& claim, Score score);

  std::size_t size() const;
  std::size_t hits() const { return hits_.load(); }
  std::size_t misses() const { return misses_.load(); }

 private:
  using Key = std::pair<std::string, std::string>;
  struct KeyHash {
    std::size_t operator()(const Key& k) const {
      std::size_t h1 = std::hash<std::string>{}(k.first);
      std::size_t h2 = std::hash<std::string>{}(k.second);
      return h1 ^ (h2 + 0x9e3779b97f4a7c15ULL + (h1 << 6) + (h1 >> 2));
    }
  };

  std::size_t capacity_;
  mutable std::mutex mutex_;
  std::list<std::pair<Key, Score>> order_;  // front = most recent
  std::unordered_map<Key, std::list<std::pair<Key, Score>>::iterator, KeyHash>
      index_;
  std::atomic<std::size_t> hits_{0};
  std::atomic<std::size_t> misses_{0};
};

/// Wraps any scorer with a ScoreCache. Batch calls look up the cache first,
/// forward only distinct misses to the inner scorer, and reassemble results
/// in input order, so cached and uncached runs score identically.
class CachingScorer final : public Scorer {
 public:
  CachingScorer(std::shared_ptr<Scorer> inner, std::size_t capacity)
      : inner_(std::move(inner)), cache_(capacity) {}

  Score score(const std::string& premise, const std::string& claim) override;
  std::vector<Score> score_batch(const std::vector<ScorePair>& pairs) override;

  const ScoreCache& cache() const { return cache_; }

 private:
  std::shared_ptr<Scorer> inner_;
  ScoreCache cache_;
};

/// Builds a scorer from a backend description. Remote endpoints honor the
/// APS_SCORER_ENDPOINT environment variable; cache_capacity 0 disables the
/// cache wrapper.
std::shared_ptr<Scorer> make_scorer(const ScorerBackend& backend,
                                    std::size_t cache_capacity = 4096);

}  // namespace aps
