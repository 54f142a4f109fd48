#include <gtest/gtest.h>

#include <cstdlib>
#include <thread>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "argen/http_transport.hpp"

using namespace argen;
using nlohmann::json;

namespace {

// Local OpenAI-compatible stub; the handler decides per test what to send back.
class StubServer {
 public:
  explicit StubServer(httplib::Server::Handler handler) {
    server_.Post("/v1/chat/completions", std::move(handler));
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~StubServer() {
    server_.stop();
    thread_.join();
  }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1/chat/completions"; }

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

BackendConfig config_for(const std::string& url) {
  BackendConfig c;
  c.name = "stub";
  c.endpoint_url = url;
  c.timeout_ms = 2000;
  return c;
}

ErrorCode code_of(Transport& t, const BackendConfig& c) {
  try {
    t.send(c, json{{"model", "m"}, {"messages", json::array()}});
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an error";
  return ErrorCode::kPrecondition;
}

}  // namespace

TEST(ParseUrl, SplitsSchemeHostPortPath) {
  auto u = parse_url("https://api.openai.com/v1/chat/completions");
  EXPECT_EQ(u.scheme, "https");
  EXPECT_EQ(u.host, "api.openai.com");
  EXPECT_EQ(u.port, 443);
  EXPECT_EQ(u.path, "/v1/chat/completions");
  u = parse_url("http://localhost:11434");
  EXPECT_EQ(u.port, 11434);
  EXPECT_EQ(u.path, "/v1/chat/completions");
  EXPECT_THROW(parse_url("ftp://x"), Error);
  EXPECT_THROW(parse_url("not a url"), Error);
}

TEST(CompletionBody, ExtractsContentAndUsage) {
  const auto r = parse_completion_body(
      R"({"choices":[{"message":{"role":"assistant","content":"Final Answer: B"},"finish_reason":"stop"}],)"
      R"("usage":{"prompt_tokens":10,"completion_tokens":3}})");
  EXPECT_EQ(r.text, "Final Answer: B");
  EXPECT_EQ(r.finish_reason, "stop");
  EXPECT_EQ(r.prompt_tokens, 10);
  EXPECT_EQ(r.completion_tokens, 3);
  EXPECT_THROW(parse_completion_body("<html>"), Error);
  EXPECT_THROW(parse_completion_body(R"({"choices": []})"), Error);
}

TEST(HttpTransport, PostsPayloadWithBearerKey) {
  std::string seen_auth;
  json seen_body;
  StubServer server([&](const httplib::Request& req, httplib::Response& res) {
    seen_auth = req.get_header_value("Authorization");
    seen_body = json::parse(req.body);
    res.set_content(R"({"choices":[{"message":{"content":"hi"},"finish_reason":"stop"}]})", "application/json");
  });
  ::setenv("ARGEN_TEST_KEY", "sekrit", 1);
  auto c = config_for(server.url());
  c.api_key_env = "ARGEN_TEST_KEY";
  HttpTransport t;
  const json payload{{"model", "m"}, {"messages", json::array({{{"role", "user"}, {"content", "q"}}})}};
  const auto r = t.send(c, payload);
  EXPECT_EQ(r.text, "hi");
  EXPECT_EQ(seen_auth, "Bearer sekrit");
  EXPECT_EQ(seen_body, payload);
  EXPECT_GE(r.latency_ms, 0);
}

TEST(HttpTransport, MissingKeyIsAuthFailure) {
  auto c = config_for("http://127.0.0.1:1/v1/chat/completions");
  c.api_key_env = "ARGEN_TEST_UNSET_KEY";
  ::unsetenv("ARGEN_TEST_UNSET_KEY");
  HttpTransport t;
  EXPECT_EQ(code_of(t, c), ErrorCode::kAuthFailure);
}

TEST(HttpTransport, MapsStatusCodes) {
  int status = 200;
  StubServer server([&](const httplib::Request&, httplib::Response& res) {
    res.status = status;
    res.set_content("{}", "application/json");
  });
  HttpTransport t;
  const auto c = config_for(server.url());
  const std::vector<std::pair<int, ErrorCode>> cases{
      {401, ErrorCode::kAuthFailure}, {403, ErrorCode::kAuthFailure},     {429, ErrorCode::kRateLimited},
      {408, ErrorCode::kTimeout},     {504, ErrorCode::kTimeout},         {500, ErrorCode::kTransport},
      {503, ErrorCode::kTransport},   {404, ErrorCode::kMalformedResponse}, {200, ErrorCode::kMalformedResponse}};
  for (const auto& [s, expected] : cases) {
    status = s;
    EXPECT_EQ(code_of(t, c), expected) << "HTTP " << s;
  }
}

TEST(HttpTransport, SlowServerTimesOut) {
  StubServer server([](const httplib::Request&, httplib::Response& res) {
    std::this_thread::sleep_for(std::chrono::milliseconds(600));
    res.set_content("{}", "application/json");
  });
  auto c = config_for(server.url());
  c.timeout_ms = 100;
  HttpTransport t;
  EXPECT_EQ(code_of(t, c), ErrorCode::kTimeout);
}

TEST(HttpTransport, RefusedConnectionIsTransportError) {
  int port = 0;
  {
    httplib::Server probe;
    port = probe.bind_to_any_port("127.0.0.1");
  }
  HttpTransport t;
  const auto code = code_of(t, config_for("http://127.0.0.1:" + std::to_string(port) + "/v1/chat/completions"));
  EXPECT_TRUE(code == ErrorCode::kTransport || code == ErrorCode::kTimeout);
}

TEST(HttpTransport, ClientRetriesThroughRateLimits) {
  std::atomic<int> hits{0};
  StubServer server([&](const httplib::Request&, httplib::Response& res) {
    if (hits++ < 2) {
      res.status = 429;
      return;
    }
    res.set_content(R"({"choices":[{"message":{"content":"Final Answer: A \n"}}]})", "application/json");
  });
  auto c = config_for(server.url());
  c.retry.base_backoff_ms = 1;
  Client client(c, std::make_shared<HttpTransport>());
  ChatRequest r;
  r.user = "q";
  EXPECT_EQ(client.chat(r).text, "Final Answer: A");
  EXPECT_EQ(hits.load(), 3);
}
