#include <gtest/gtest.h>

#include <future>
#include <set>
#include <thread>

#include "argen/backends.hpp"
#include "argen/cache.hpp"
#include "argen/mock.hpp"
#include "test_support.hpp"

using namespace argen;
using nlohmann::json;

namespace {

BackendConfig config_named(std::string name) {
  BackendConfig c;
  c.name = std::move(name);
  c.endpoint_url = "mock://test";
  c.retry.base_backoff_ms = 0;
  return c;
}

// Fails with `code` for the first `failures` sends, then answers "ok".
class FlakyTransport : public Transport {
 public:
  FlakyTransport(ErrorCode code, int failures) : code_(code), failures_(failures) {}
  ChatResponse send(const BackendConfig&, const json&) override {
    if (calls_++ < failures_) throw Error(code_, "injected");
    ChatResponse r;
    r.text = "ok";
    return r;
  }
  int calls() const { return calls_; }

 private:
  ErrorCode code_;
  int failures_;
  std::atomic<int> calls_{0};
};

ChatRequest user(std::string text) {
  ChatRequest r;
  r.user = std::move(text);
  return r;
}

}  // namespace

TEST(Payload, CarriesModelMessagesAndSampling) {
  auto c = config_named("local");
  c.model = "llama3:8b";
  c.max_tokens = 256;
  ChatRequest r = user("hi");
  r.system = "be brief";
  const json p = build_payload(c, r);
  EXPECT_EQ(p["model"], "llama3:8b");
  ASSERT_EQ(p["messages"].size(), 2u);
  EXPECT_EQ(p["messages"][0]["role"], "system");
  EXPECT_EQ(p["messages"][1]["content"], "hi");
  EXPECT_EQ(p["temperature"], 0.0);
  EXPECT_EQ(p["seed"], 42);
  EXPECT_EQ(p["stream"], false);
  EXPECT_EQ(p["max_tokens"], 256);
}

TEST(Payload, OmitsSeedWhenEndpointRejectsIt) {
  auto c = config_named("hosted");
  c.send_seed = false;
  const json p = build_payload(c, user("hi"));
  EXPECT_FALSE(p.contains("seed"));
  EXPECT_FALSE(p.contains("max_tokens"));
  EXPECT_EQ(p["model"], "hosted");
}

TEST(CacheKey, SensitiveToEveryInput) {
  const auto base = config_named("a");
  const auto k = cache_key(base, user("q"));
  EXPECT_EQ(k.size(), 64u);
  EXPECT_EQ(k, cache_key(base, user("q")));
  EXPECT_NE(k, cache_key(config_named("b"), user("q")));
  EXPECT_NE(k, cache_key(base, user("q2")));
  auto hot = base;
  hot.temperature = 0.7;
  EXPECT_NE(k, cache_key(hot, user("q")));
  auto seeded = base;
  seeded.seed = 7;
  EXPECT_NE(k, cache_key(seeded, user("q")));
  // The seed still separates entries when it is not transmitted.
  auto quiet = base;
  quiet.send_seed = false;
  auto quiet_seeded = quiet;
  quiet_seeded.seed = 7;
  EXPECT_NE(cache_key(quiet, user("q")), cache_key(quiet_seeded, user("q")));
}

TEST(Sha256, KnownVector) {
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(BackendConfig, ValidateRejectsBadValues) {
  auto c = config_named("x");
  EXPECT_NO_THROW(c.validate());
  auto bad = c;
  bad.name.clear();
  EXPECT_THROW(bad.validate(), Error);
  bad = c;
  bad.max_parallel = 0;
  EXPECT_THROW(bad.validate(), Error);
  bad = c;
  bad.parameter_count_billions = 0;
  EXPECT_THROW(bad.validate(), Error);
  bad = c;
  bad.retry.max_attempts = 0;
  EXPECT_THROW(bad.validate(), Error);
}

TEST(Registry, NineModelsWithParameterCounts) {
  const auto reg = default_registry();
  EXPECT_EQ(reg.size(), 9u);
  std::set<std::string> names;
  for (const auto& c : reg) {
    names.insert(c.name);
    EXPECT_GT(c.parameter_count_billions, 0.0);
    EXPECT_NO_THROW(c.validate());
  }
  EXPECT_EQ(names.size(), 9u);
  ASSERT_TRUE(find_preset("gpt-4o-mini"));
  EXPECT_EQ(find_preset("gpt-4o-mini")->api_key_env, "OPENAI_API_KEY");
  EXPECT_DOUBLE_EQ(find_preset("llama3-70b")->parameter_count_billions, 70.0);
  EXPECT_FALSE(find_preset("nope"));
}

TEST(Client, RetriesTransientErrors) {
  for (auto code : {ErrorCode::kTimeout, ErrorCode::kRateLimited, ErrorCode::kTransport}) {
    auto t = std::make_shared<FlakyTransport>(code, 2);
    Client client(config_named("x"), t);
    EXPECT_EQ(client.chat(user("q")).text, "ok");
    EXPECT_EQ(t->calls(), 3);
    EXPECT_EQ(client.transport_calls(), 3u);
  }
}

TEST(Client, GivesUpAfterMaxAttempts) {
  auto t = std::make_shared<FlakyTransport>(ErrorCode::kTimeout, 100);
  auto c = config_named("x");
  c.retry.max_attempts = 3;
  Client client(c, t);
  try {
    client.chat(user("q"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kTimeout);
  }
  EXPECT_EQ(t->calls(), 3);
}

TEST(Client, DoesNotRetryPermanentErrors) {
  for (auto code : {ErrorCode::kAuthFailure, ErrorCode::kMalformedResponse}) {
    auto t = std::make_shared<FlakyTransport>(code, 1);
    Client client(config_named("x"), t);
    EXPECT_THROW(client.chat(user("q")), Error);
    EXPECT_EQ(t->calls(), 1);
  }
}

TEST(Client, BackoffGrowsWithAttempts) {
  auto t = std::make_shared<FlakyTransport>(ErrorCode::kRateLimited, 2);
  auto c = config_named("x");
  c.retry.base_backoff_ms = 20;
  Client client(c, t);
  const auto start = std::chrono::steady_clock::now();
  client.chat(user("q"));
  const auto elapsed = std::chrono::steady_clock::now() - start;
  // 20 ms then 40 ms, plus jitter.
  EXPECT_GE(elapsed, std::chrono::milliseconds(60));
}

TEST(Client, TrimsTrailingWhitespaceAndRecordsSeed) {
  auto mock = MockTransport::sequential({"Final Answer: A  \n\n"});
  auto c = config_named("x");
  c.send_seed = false;
  Client client(c, mock);
  const auto r = client.chat(user("q"));
  EXPECT_EQ(r.text, "Final Answer: A");
  EXPECT_FALSE(r.seed_sent);
  EXPECT_FALSE(r.from_cache);
}

TEST(Client, CacheOnlyModeRaisesCacheMiss) {
  auto mock = MockTransport::sequential({"x"});
  Client client(config_named("x"), mock, std::make_shared<ResponseCache>(), true);
  try {
    client.chat(user("q"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kCacheMiss);
  }
  EXPECT_EQ(mock->call_count(), 0u);
}

TEST(Client, CacheHitSkipsTransport) {
  auto mock = MockTransport::responder([](const std::string& p) { return "echo " + p; });
  auto cache = std::make_shared<ResponseCache>();
  Client client(config_named("x"), mock, cache);
  const auto first = client.chat(user("q"));
  const auto second = client.chat(user("q"));
  EXPECT_FALSE(first.from_cache);
  EXPECT_TRUE(second.from_cache);
  EXPECT_EQ(second.text, "echo q");
  EXPECT_EQ(mock->call_count(), 1u);
}

// Property: in-flight requests never exceed max_parallel, whatever the load.
TEST(Client, ConcurrencyNeverExceedsMaxParallel) {
  for (int limit : {1, 2, 3}) {
    auto mock = MockTransport::responder([](const std::string& p) { return p; });
    mock->set_delay(std::chrono::milliseconds(5));
    auto client = mock_client(mock, "x", limit);
    std::vector<std::future<void>> jobs;
    for (int i = 0; i < 12; ++i) {
      jobs.push_back(std::async(std::launch::async, [&client, i] { client->chat(user("q" + std::to_string(i))); }));
    }
    for (auto& j : jobs) j.get();
    EXPECT_LE(mock->max_in_flight(), limit);
    EXPECT_EQ(mock->call_count(), 12u);
    if (limit > 1) EXPECT_GE(mock->max_in_flight(), 2);
  }
}

TEST(Mock, KeyedSequentialAndLogging) {
  auto keyed = MockTransport::keyed({{"hello", "world"}});
  auto client = mock_client(keyed);
  EXPECT_EQ(client->chat(user("hello")).text, "world");
  try {
    client->chat(user("other"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMalformedResponse);
  }
  ASSERT_EQ(keyed->requests().size(), 2u);
  EXPECT_EQ(user_prompt_of(keyed->requests()[0]), "hello");

  auto seq = MockTransport::sequential({"one", "two"});
  auto c2 = mock_client(seq);
  EXPECT_EQ(c2->chat(user("a")).text, "one");
  EXPECT_EQ(c2->chat(user("a")).text, "two");
  try {
    c2->chat(user("a"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kExhaustedScript);
  }
}

TEST(Mock, EmptyScriptIsAPreconditionError) {
  EXPECT_THROW(MockTransport::sequential({}), Error);
  EXPECT_THROW(MockTransport::keyed({}), Error);
}
