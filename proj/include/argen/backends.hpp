#pragma once

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "argen/error.hpp"

namespace argen {

class ResponseCache;

struct RetryPolicy {
  int max_attempts = 4;
  int base_backoff_ms = 500;
};

struct BackendConfig {
  std::string name;
  // Model identifier sent on the wire. Empty means `name`.
  std::string model;
  std::string endpoint_url;
  // Name of the environment variable holding the API key. Empty means no auth.
  std::string api_key_env;
  double parameter_count_billions = 1.0;
  double temperature = 0.0;
  std::int64_t seed = 42;
  // Endpoints that reject a seed field get it omitted; the omission is
  // recorded on every call.
  bool send_seed = true;
  int max_parallel = 1;
  int timeout_ms = 120000;
  int max_tokens = 0;  // 0 leaves the server default
  RetryPolicy retry;

  const std::string& wire_model() const { return model.empty() ? name : model; }
  // Throws kConfigError naming the violated constraint.
  void validate() const;
};

struct ChatRequest {
  std::optional<std::string> system;
  std::string user;
  std::optional<double> temperature;
  std::optional<std::int64_t> seed;
};

struct ChatResponse {
  std::string text;
  std::string finish_reason;
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;
  std::int64_t latency_ms = 0;
  bool from_cache = false;
  bool seed_sent = true;

  bool operator==(const ChatResponse&) const = default;
};

// The exact JSON body for one chat-completions request.
nlohmann::json build_payload(const BackendConfig& config, const ChatRequest& request);

// Hex SHA-256 over the backend name, the full payload and the sampling
// parameters. The seed takes part even when it is not transmitted.
std::string cache_key(const BackendConfig& config, const ChatRequest& request);

std::string sha256_hex(std::string_view data);

// One attempt against an endpoint. Implementations throw argen::Error with
// kTimeout, kRateLimited, kAuthFailure, kMalformedResponse or kTransport.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual ChatResponse send(const BackendConfig& config, const nlohmann::json& payload) = 0;
};

// Chat client for one backend: cache lookup, single-flight, bounded
// parallelism and retries with exponential backoff.
class Client {
 public:
  Client(BackendConfig config, std::shared_ptr<Transport> transport,
         std::shared_ptr<ResponseCache> cache = nullptr, bool cache_only = false);

  Client(const Client&) = delete;
  Client& operator=(const Client&) = delete;

  ChatResponse chat(const ChatRequest& request);

  const BackendConfig& config() const { return config_; }
  // Number of requests that reached the transport (retries included).
  std::size_t transport_calls() const { return transport_calls_.load(); }

 private:
  ChatResponse send_with_retries(const ChatRequest& request);

  BackendConfig config_;
  std::shared_ptr<Transport> transport_;
  std::shared_ptr<ResponseCache> cache_;
  bool cache_only_;

  std::mutex slots_mutex_;
  std::condition_variable slots_cv_;
  int in_flight_ = 0;
  std::atomic<std::size_t> transport_calls_{0};
};

// Registry entries for the nine evaluated models, pointed at a local
// OpenAI-compatible server (GPT-4o-mini points at the hosted API).
std::vector<BackendConfig> default_registry();
std::optional<BackendConfig> find_preset(const std::string& name);

}  // namespace argen
