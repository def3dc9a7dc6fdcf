#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <random>

#include "revinsight/embed.hpp"
#include "revinsight/errors.hpp"
#include "revinsight/http.hpp"
#include "support/helpers.hpp"
#include "support/stub_servers.hpp"

using namespace revinsight;
using embed::EmbeddingVector;

namespace {

embed::EmbeddingBackendConfig remote(const std::string& endpoint, std::size_t batch = 32) {
  embed::EmbeddingBackendConfig c;
  c.kind = embed::BackendKind::kRemote;
  c.endpoint = endpoint;
  c.batch_size = batch;
  c.request.retry.initial_backoff = std::chrono::milliseconds{1};
  c.request.timeout = std::chrono::seconds{5};
  return c;
}

// Text "t<k>" embeds to a vector whose first coordinate encodes k, so order
// mistakes are visible after normalization.
std::vector<double> tagged(const std::string& text) {
  double k = std::stod(text.substr(1));
  return {k + 1.0, 1.0, 0.0};
}

std::vector<std::string> tags(int n) {
  std::vector<std::string> t;
  for (int i = 0; i < n; ++i) t.push_back("t" + std::to_string(i));
  return t;
}

}  // namespace

TEST_CASE("embedding vectors reject empty and non-finite input") {
  CHECK_THROWS_AS(EmbeddingVector({}), InvalidArgument);
  CHECK_THROWS_AS(EmbeddingVector({1.0, NAN}), InvalidArgument);
  CHECK_THROWS_AS(EmbeddingVector({INFINITY}), InvalidArgument);
  CHECK(EmbeddingVector({3.0, 4.0}).norm() == doctest::Approx(5.0));
}

TEST_CASE("l2_normalize yields unit norm and rejects the zero vector") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  for (int i = 0; i < 200; ++i) {
    std::vector<double> v(1 + rng() % 50);
    for (auto& x : v) x = u(rng);
    auto n = embed::l2_normalize(EmbeddingVector(v));
    CHECK(std::abs(n.norm() - 1.0) <= 1e-6);
  }
  CHECK_THROWS_AS(embed::l2_normalize(EmbeddingVector({0.0, 0.0})), embed::ZeroNormError);
}

TEST_CASE("hashing encoder is deterministic and case-insensitive") {
  embed::HashingEncoder enc(64);
  CHECK(enc.counts("Rude STAFF") == enc.counts("rude staff"));
  auto c = enc.counts("wait wait wait");
  double total = 0.0;
  for (double x : c) total += x;
  CHECK(total == 3.0);
  CHECK_THROWS_AS(embed::HashingEncoder(0), InvalidArgument);
}

TEST_CASE("local encode returns unit vectors in input order and flags empties") {
  embed::EncodeStats stats;
  auto v = embed::encode({"long wait at the desk", "...", "rude staff"}, helpers::local_backend(32),
                         &stats);
  REQUIRE(v.size() == 3);
  for (const auto& x : v) CHECK(std::abs(x.norm() - 1.0) <= 1e-6);
  CHECK(v[1] == embed::basis_vector(32));
  CHECK(stats.degenerate == std::vector<std::size_t>{1});
  CHECK_THROWS_AS(embed::encode({}, helpers::local_backend()), InvalidArgument);
}

TEST_CASE("remote encode batches, reassembles by index and keeps order") {
  stub::EmbeddingServer server(tagged);
  auto cfg = remote(server.endpoint(), 4);
  embed::EncodeStats stats;
  auto v = embed::encode(tags(10), cfg, &stats);
  REQUIRE(v.size() == 10);
  auto sizes = server.batch_sizes();
  CHECK(sizes == std::vector<std::size_t>{4, 4, 2});
  CHECK(stats.requests == 3);
  for (int i = 0; i < 10; ++i) {
    auto expected = embed::l2_normalize(EmbeddingVector(tagged("t" + std::to_string(i))));
    CHECK(v[static_cast<std::size_t>(i)] == expected);
  }
}

TEST_CASE("parallel batches come back in input order") {
  stub::EmbeddingServer server(tagged);
  auto cfg = remote(server.endpoint(), 3);
  cfg.parallelism = 4;
  auto v = embed::encode(tags(20), cfg);
  REQUIRE(v.size() == 20);
  for (int i = 0; i < 20; ++i) {
    CHECK(v[static_cast<std::size_t>(i)] ==
          embed::l2_normalize(EmbeddingVector(tagged("t" + std::to_string(i)))));
  }
}

TEST_CASE("transient 503s are retried") {
  stub::EmbeddingServer server(tagged, 2);
  embed::EncodeStats stats;
  auto v = embed::encode(tags(3), remote(server.endpoint()), &stats);
  CHECK(v.size() == 3);
  CHECK(stats.retries == 2);
}

TEST_CASE("exhausted retries surface as an embedding error") {
  stub::EmbeddingServer server(tagged, 100);
  auto cfg = remote(server.endpoint());
  cfg.request.retry.max_retries = 1;
  CHECK_THROWS_AS(embed::encode(tags(2), cfg), EmbeddingError);
  CHECK(server.hits() == 2);
}

TEST_CASE("dimension mismatches are embedding errors") {
  stub::EmbeddingServer ragged([](const std::string& t) {
    return t == "t1" ? std::vector<double>{1.0, 2.0} : std::vector<double>{1.0, 2.0, 3.0};
  });
  CHECK_THROWS_AS(embed::encode(tags(3), remote(ragged.endpoint())), EmbeddingError);

  stub::EmbeddingServer fine(tagged);
  auto cfg = remote(fine.endpoint());
  cfg.expected_dim = 384;
  CHECK_THROWS_AS(embed::encode(tags(2), cfg), EmbeddingError);
}

TEST_CASE("an unset API key variable is a config error") {
  stub::EmbeddingServer server(tagged);
  auto cfg = remote(server.endpoint());
  cfg.api_key_env = "REVINSIGHT_TEST_UNSET_KEY";
  ::unsetenv("REVINSIGHT_TEST_UNSET_KEY");
  try {
    embed::encode(tags(1), cfg);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("REVINSIGHT_TEST_UNSET_KEY") != std::string::npos);
  }
  CHECK(server.hits() == 0);
}

TEST_CASE("unreachable endpoint is an embedding error") {
  auto cfg = remote("http://127.0.0.1:1/v1/embeddings");
  cfg.request.retry.max_retries = 0;
  CHECK_THROWS_AS(embed::encode(tags(1), cfg), EmbeddingError);
}

TEST_CASE("response parser validates coverage") {
  CHECK_THROWS_AS(embed::parse_embedding_response(R"({"data":[{"index":0,"embedding":[1]}]})", 2),
                  EmbeddingError);
  CHECK_THROWS_AS(
      embed::parse_embedding_response(
          R"({"data":[{"index":0,"embedding":[1]},{"index":0,"embedding":[2]}]})", 2),
      EmbeddingError);
  CHECK_THROWS_AS(embed::parse_embedding_response("not json", 1), EmbeddingError);
  auto ok = embed::parse_embedding_response(
      R"({"data":[{"index":1,"embedding":[2]},{"index":0,"embedding":[1]}]})", 2);
  CHECK(ok == std::vector<std::vector<double>>{{1.0}, {2.0}});
}

TEST_CASE("backoff grows geometrically up to the cap") {
  http::RetryPolicy p;
  CHECK(p.delay(0).count() == 250);
  CHECK(p.delay(1).count() == 500);
  CHECK(p.delay(10).count() == 8000);
}

TEST_CASE("backend config validation") {
  embed::EmbeddingBackendConfig c;
  c.kind = embed::BackendKind::kRemote;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.endpoint = "http://x/v1/embeddings";
  c.batch_size = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  CHECK(embed::backend_kind_from_string("local-test") == embed::BackendKind::kLocalTest);
  CHECK_THROWS_AS(embed::backend_kind_from_string("bogus"), ConfigError);
}
