#include "argen/backends.hpp"

#include <chrono>
#include <cmath>
#include <random>
#include <thread>

#include <openssl/evp.h>

#include "argen/cache.hpp"

namespace argen {

using nlohmann::json;

void BackendConfig::validate() const {
  auto fail = [this](const std::string& what) {
    throw Error(ErrorCode::kConfigError, "backend '" + name + "': " + what);
  };
  if (name.empty()) fail("empty name");
  if (!(temperature >= 0.0)) fail("temperature must be >= 0");
  if (!(parameter_count_billions > 0.0)) fail("parameter_count_billions must be > 0");
  if (max_parallel < 1) fail("max_parallel must be >= 1");
  if (timeout_ms <= 0) fail("timeout_ms must be > 0");
  if (retry.max_attempts < 1) fail("retry.max_attempts must be >= 1");
  if (retry.base_backoff_ms < 0) fail("retry.base_backoff_ms must be >= 0");
}

json build_payload(const BackendConfig& config, const ChatRequest& request) {
  json messages = json::array();
  if (request.system) messages.push_back({{"role", "system"}, {"content", *request.system}});
  messages.push_back({{"role", "user"}, {"content", request.user}});

  json payload{{"model", config.wire_model()},
               {"messages", std::move(messages)},
               {"temperature", request.temperature.value_or(config.temperature)},
               {"stream", false}};
  if (config.send_seed) payload["seed"] = request.seed.value_or(config.seed);
  if (config.max_tokens > 0) payload["max_tokens"] = config.max_tokens;
  return payload;
}

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256 failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xF]);
  }
  return out;
}

std::string cache_key(const BackendConfig& config, const ChatRequest& request) {
  json material{{"backend", config.name},
                {"payload", build_payload(config, request)},
                {"temperature", request.temperature.value_or(config.temperature)},
                {"seed", request.seed.value_or(config.seed)}};
  return sha256_hex(material.dump(-1, ' ', false, json::error_handler_t::replace));
}

Client::Client(BackendConfig config, std::shared_ptr<Transport> transport,
               std::shared_ptr<ResponseCache> cache, bool cache_only)
    : config_(std::move(config)),
      transport_(std::move(transport)),
      cache_(std::move(cache)),
      cache_only_(cache_only) {
  config_.validate();
}

namespace {

bool retryable(ErrorCode code) {
  return code == ErrorCode::kTimeout || code == ErrorCode::kRateLimited || code == ErrorCode::kTransport;
}

void rtrim(std::string& text) {
  auto end = text.find_last_not_of(" \t\r\n");
  text.erase(end == std::string::npos ? 0 : end + 1);
}

}  // namespace

ChatResponse Client::send_with_retries(const ChatRequest& request) {
  if (cache_only_) {
    throw Error(ErrorCode::kCacheMiss, "backend '" + config_.name + "' is in cache-only mode and the request is not cached");
  }
  const json payload = build_payload(config_, request);

  {
    std::unique_lock lock(slots_mutex_);
    slots_cv_.wait(lock, [this] { return in_flight_ < config_.max_parallel; });
    ++in_flight_;
  }
  struct SlotRelease {
    Client* self;
    ~SlotRelease() {
      {
        std::lock_guard lock(self->slots_mutex_);
        --self->in_flight_;
      }
      self->slots_cv_.notify_one();
    }
  } release{this};

  thread_local std::mt19937 jitter_rng{std::random_device{}()};
  for (int attempt = 1;; ++attempt) {
    try {
      ++transport_calls_;
      ChatResponse response = transport_->send(config_, payload);
      rtrim(response.text);
      response.seed_sent = config_.send_seed;
      response.from_cache = false;
      return response;
    } catch (const Error& e) {
      if (!retryable(e.code()) || attempt >= config_.retry.max_attempts) throw;
      const int base = config_.retry.base_backoff_ms;
      const auto backoff = static_cast<long long>(base * std::pow(2.0, attempt - 1));
      std::uniform_int_distribution<int> jitter(0, std::max(base, 0));
      std::this_thread::sleep_for(std::chrono::milliseconds(backoff + jitter(jitter_rng)));
    }
  }
}

ChatResponse Client::chat(const ChatRequest& request) {
  if (!cache_) return send_with_retries(request);

  const std::string key = cache_key(config_, request);
  bool hit = false;
  ChatResponse response = cache_->get_or_compute(
      key, build_payload(config_, request), [&] { return send_with_retries(request); }, hit);
  response.from_cache = hit;
  return response;
}

std::vector<BackendConfig> default_registry() {
  const std::string local = "http://localhost:11434/v1/chat/completions";
  auto entry = [&](std::string name, std::string model, double params) {
    BackendConfig c;
    c.name = std::move(name);
    c.model = std::move(model);
    c.endpoint_url = local;
    c.parameter_count_billions = params;
    return c;
  };
  std::vector<BackendConfig> registry{
      entry("gemma-2b", "gemma:2b", 2.0),
      entry("gemma-7b", "gemma:7b", 7.0),
      entry("llama3-8b", "llama3:8b", 8.0),
      entry("llama3-70b", "llama3:70b", 70.0),
      entry("phi3-3.8b", "herald/phi3-128k:latest", 3.8),
      entry("mistral-7b", "mistral:7b", 7.0),
      entry("qwen2-1.5b", "qwen2:1.5b", 1.5),
      entry("aya-35b", "aya:35b", 35.0),
  };
  // Parameter count is undisclosed; 8 places it in the medium bucket.
  BackendConfig gpt = entry("gpt-4o-mini", "gpt-4o-mini", 8.0);
  gpt.endpoint_url = "https://api.openai.com/v1/chat/completions";
  gpt.api_key_env = "OPENAI_API_KEY";
  registry.push_back(gpt);
  return registry;
}

std::optional<BackendConfig> find_preset(const std::string& name) {
  for (auto& c : default_registry()) {
    if (c.name == name) return c;
  }
  return std::nullopt;
}

}  // namespace argen
