#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "aps/entailment.hpp"
#include "aps/error.hpp"
#include "testutil.hpp"

#include <atomic>
#include <cstdlib>
#include <memory>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <json.hpp>

using namespace aps;

TEST_CASE("oracle containment examples") {
  CHECK(lexical_oracle_score("the cat sat on the mat", "the cat sat") == 1.0);
  CHECK(lexical_oracle_score("a b c d", "a x") == 0.5);
  CHECK(lexical_oracle_score("The price is low.", "the price is low") == 1.0);
  CHECK(lexical_oracle_score("a b", "c") == 0.0);
  // claim tokens {the, books, are, cheap}; two appear in the premise
  CHECK(lexical_oracle_score("The books download fast.", "The books are cheap.") ==
        0.5);
}

TEST_CASE("oracle ignores punctuation and token repetition") {
  CHECK(lexical_oracle_score("alpha, beta; gamma!", "ALPHA... beta?") == 1.0);
  CHECK(lexical_oracle_score("alpha alpha alpha", "alpha alpha") == 1.0);
  // punctuation-only claim has no tokens
  CHECK(lexical_oracle_score("anything", "?!...") == 1.0);
}

TEST_CASE("oracle reflexivity") {
  testutil::Rng rng(21);
  for (int trial = 0; trial < 300; ++trial) {
    const std::string text = testutil::random_sentence(rng);
    CHECK(lexical_oracle_score(text, text) == 1.0);
  }
}

TEST_CASE("oracle stays in range and matches the reference formula") {
  testutil::Rng rng(22);
  for (int trial = 0; trial < 300; ++trial) {
    const std::string premise = testutil::random_sentence(rng);
    const std::string claim = testutil::random_sentence(rng);
    const double got = lexical_oracle_score(premise, claim);
    CHECK(got >= 0.0);
    CHECK(got <= 1.0);
    CHECK(got == testutil::reference_oracle_score(premise, claim));
  }
}

TEST_CASE("appending premise tokens never lowers the score") {
  testutil::Rng rng(23);
  for (int trial = 0; trial < 300; ++trial) {
    const std::string premise = testutil::random_sentence(rng);
    const std::string claim = testutil::random_sentence(rng);
    const double before = lexical_oracle_score(premise, claim);
    const double after = lexical_oracle_score(premise + " " + rng.word(), claim);
    CHECK(after >= before);
  }
}

TEST_CASE("scorer rejects empty inputs") {
  LexicalOracleScorer scorer;
  CHECK_THROWS_AS(scorer.score("", "claim"), Error);
  CHECK_THROWS_AS(scorer.score("premise", ""), Error);
  try {
    scorer.score("", "x");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EmptyInput);
  }
}

TEST_CASE("default batch equals elementwise scoring") {
  LexicalOracleScorer scorer;
  CHECK(scorer.score_batch({}).empty());
  std::vector<ScorePair> pairs = {{"a b c", "a"}, {"a b c", "z"}, {"a b c", "a"}};
  const auto scores = scorer.score_batch(pairs);
  REQUIRE(scores.size() == 3);
  CHECK(scores[0] == 1.0);
  CHECK(scores[1] == 0.0);
  CHECK(scores[0] == scores[2]);
}

// ---------------------------------------------------------------------------
// Cache
// ---------------------------------------------------------------------------

TEST_CASE("cache returns exactly the stored score and evicts LRU") {
  ScoreCache cache(2);
  cache.put("p1", "c1", 0.25);
  cache.put("p2", "c2", 0.5);
  CHECK(cache.get("p1", "c1") == 0.25);  // touches p1, p2 becomes LRU
  cache.put("p3", "c3", 0.75);
  CHECK(cache.size() == 2);
  CHECK(!cache.get("p2", "c2").has_value());
  CHECK(cache.get("p1", "c1") == 0.25);
  CHECK(cache.get("p3", "c3") == 0.75);
}

TEST_CASE("caching scorer is transparent") {
  testutil::Rng rng(24);
  std::vector<ScorePair> pairs;
  for (int i = 0; i < 50; ++i)
    pairs.emplace_back(testutil::random_sentence(rng), testutil::random_sentence(rng));
  // duplicates guarantee in-batch cache sharing
  pairs.insert(pairs.end(), pairs.begin(), pairs.begin() + 10);

  LexicalOracleScorer plain;
  CachingScorer cached(std::make_shared<LexicalOracleScorer>(), 128);
  const auto expect = plain.score_batch(pairs);
  const auto first = cached.score_batch(pairs);
  const auto second = cached.score_batch(pairs);  // all hits now
  CHECK(expect == first);
  CHECK(expect == second);
  CHECK(cached.cache().hits() > 0);
}

namespace {

// Scorer that counts batch work; used to check dedup behavior.
class CountingScorer : public Scorer {
 public:
  Score score(const std::string& premise, const std::string& claim) override {
    return score_batch({{premise, claim}})[0];
  }
  std::vector<Score> score_batch(const std::vector<ScorePair>& pairs) override {
    ++batches;
    scored += pairs.size();
    std::vector<Score> out;
    for (const auto& [p, c] : pairs) out.push_back(lexical_oracle_score(p, c));
    return out;
  }
  std::size_t batches = 0;
  std::size_t scored = 0;
};

}  // namespace

TEST_CASE("caching scorer forwards each distinct miss once") {
  auto inner = std::make_shared<CountingScorer>();
  CachingScorer cached(inner, 128);
  std::vector<ScorePair> pairs = {{"a", "b"}, {"a", "b"}, {"c", "d"}, {"a", "b"}};
  const auto scores = cached.score_batch(pairs);
  CHECK(scores[0] == scores[1]);
  CHECK(scores[1] == scores[3]);
  CHECK(inner->scored == 2);  // {"a","b"} and {"c","d"}
  cached.score_batch(pairs);
  CHECK(inner->scored == 2);  // all hits
}

// ---------------------------------------------------------------------------
// Remote backend against an in-process server
// ---------------------------------------------------------------------------

namespace {

struct TestServer {
  httplib::Server server;
  std::thread thread;
  int port = 0;

  explicit TestServer(httplib::Server::Handler score_handler) {
    server.Post("/score", std::move(score_handler));
    port = server.bind_to_any_port("127.0.0.1");
    REQUIRE(port > 0);
    thread = std::thread([this] { server.listen_after_bind(); });
    server.wait_until_ready();
  }

  ~TestServer() {
    server.stop();
    thread.join();
  }

  std::string endpoint() const { return "http://127.0.0.1:" + std::to_string(port); }
};

// Serves oracle scores for whatever pairs arrive.
httplib::Server::Handler oracle_handler(std::atomic<int>* requests = nullptr) {
  return [requests](const httplib::Request& req, httplib::Response& res) {
    if (requests) ++*requests;
    const auto body = nlohmann::json::parse(req.body);
    nlohmann::json scores = nlohmann::json::array();
    for (const auto& pair : body.at("pairs"))
      scores.push_back(testutil::reference_oracle_score(
          pair.at("premise").get<std::string>(), pair.at("claim").get<std::string>()));
    res.set_content(nlohmann::json{{"scores", scores}}.dump(), "application/json");
  };
}

ScorerBackend remote_backend(const std::string& endpoint, std::size_t max_batch = 32) {
  ScorerBackend backend;
  backend.kind = BackendKind::Remote;
  backend.endpoint = endpoint;
  backend.max_batch = max_batch;
  backend.retry_base = std::chrono::milliseconds(1);
  return backend;
}

}  // namespace

TEST_CASE("remote scorer round-trips scores over the wire") {
  TestServer server(oracle_handler());
  RemoteScorer scorer(remote_backend(server.endpoint()));
  CHECK(scorer.score("the cat sat", "the cat") == 1.0);
  CHECK(scorer.score("a b c d", "a x") == 0.5);
}

TEST_CASE("remote batches use ceil(n / max_batch) round-trips") {
  std::atomic<int> requests{0};
  TestServer server(oracle_handler(&requests));
  RemoteScorer scorer(remote_backend(server.endpoint(), 32));
  std::vector<ScorePair> pairs;
  testutil::Rng rng(25);
  for (int i = 0; i < 100; ++i)
    pairs.emplace_back(testutil::random_sentence(rng), testutil::random_sentence(rng));
  const auto scores = scorer.score_batch(pairs);
  CHECK(scores.size() == 100);
  CHECK(requests.load() == 4);
}

TEST_CASE("remote scores outside the unit interval are clamped") {
  TestServer server([](const httplib::Request& req, httplib::Response& res) {
    const auto body = nlohmann::json::parse(req.body);
    nlohmann::json scores = nlohmann::json::array();
    double v = 1.5;
    for (std::size_t i = 0; i < body.at("pairs").size(); ++i) {
      scores.push_back(v);
      v = -0.25;
    }
    res.set_content(nlohmann::json{{"scores", scores}}.dump(), "application/json");
  });
  RemoteScorer scorer(remote_backend(server.endpoint()));
  const auto scores = scorer.score_batch({{"p", "c"}, {"p2", "c2"}});
  CHECK(scores[0] == 1.0);
  CHECK(scores[1] == 0.0);
  CHECK(scorer.clamp_count() == 2);
}

TEST_CASE("remote retries transient failures with backoff") {
  std::atomic<int> attempts{0};
  TestServer server([&](const httplib::Request& req, httplib::Response& res) {
    if (++attempts <= 2) {
      res.status = 503;
      return;
    }
    oracle_handler()(req, res);
  });
  RemoteScorer scorer(remote_backend(server.endpoint()));
  CHECK(scorer.score("a b", "a") == 1.0);
  CHECK(attempts.load() == 3);
}

TEST_CASE("remote gives up after exhausting retries") {
  std::atomic<int> attempts{0};
  TestServer server([&](const httplib::Request&, httplib::Response& res) {
    ++attempts;
    res.status = 500;
  });
  RemoteScorer scorer(remote_backend(server.endpoint()));
  CHECK_THROWS_AS(scorer.score("a", "b"), Error);
  CHECK(attempts.load() == 4);  // 1 try + 3 retries
  try {
    scorer.score("a", "b");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Transport);
  }
}

TEST_CASE("malformed responses are protocol errors, not retried") {
  std::atomic<int> attempts{0};
  SUBCASE("unparseable body") {
    TestServer server([&](const httplib::Request&, httplib::Response& res) {
      ++attempts;
      res.set_content("not json", "text/plain");
    });
    RemoteScorer scorer(remote_backend(server.endpoint()));
    CHECK_THROWS_AS(scorer.score("a", "b"), Error);
    CHECK(attempts.load() == 1);
  }
  SUBCASE("wrong score count") {
    TestServer server([&](const httplib::Request&, httplib::Response& res) {
      ++attempts;
      res.set_content(R"({"scores": [0.5, 0.5]})", "application/json");
    });
    RemoteScorer scorer(remote_backend(server.endpoint()));
    try {
      scorer.score("a", "b");
      FAIL("expected a protocol error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::Protocol);
    }
    CHECK(attempts.load() == 1);
  }
}

TEST_CASE("unreachable endpoint raises a transport error") {
  ScorerBackend backend = remote_backend("http://127.0.0.1:1");
  backend.max_retries = 0;
  RemoteScorer scorer(backend);
  try {
    scorer.score("a", "b");
    FAIL("expected a transport error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Transport);
  }
}

TEST_CASE("APS_SCORER_ENDPOINT overrides the configured endpoint") {
  TestServer server(oracle_handler());
  ::setenv("APS_SCORER_ENDPOINT", server.endpoint().c_str(), 1);
  RemoteScorer scorer(remote_backend("http://127.0.0.1:1"));  // would fail
  CHECK(scorer.score("x y", "x") == 1.0);
  ::unsetenv("APS_SCORER_ENDPOINT");
}

TEST_CASE("make_scorer wires backend kind and cache") {
  auto oracle = make_scorer(ScorerBackend{}, 0);
  CHECK(oracle->score("a b", "a") == 1.0);
  auto cached = make_scorer(ScorerBackend{}, 16);
  CHECK(cached->score("a b", "a") == 1.0);
  CHECK(dynamic_cast<CachingScorer*>(cached.get()) != nullptr);
}
