#include "argen/cache.hpp"

#include <chrono>
#include <fstream>
#include <sstream>
#include <thread>

namespace argen {

using nlohmann::json;

namespace {

bool valid_utf8(const std::string& text) {
  try {
    (void)json(text).dump();
    return true;
  } catch (const json::type_error&) {
    return false;
  }
}

std::string to_hex(const std::string& bytes) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (unsigned char c : bytes) {
    out.push_back(kHex[c >> 4]);
    out.push_back(kHex[c & 0xF]);
  }
  return out;
}

std::string from_hex(const std::string& hex) {
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    throw Error(ErrorCode::kMalformedResponse, "bad hex in cache entry");
  };
  if (hex.size() % 2 != 0) throw Error(ErrorCode::kMalformedResponse, "bad hex in cache entry");
  std::string out(hex.size() / 2, '\0');
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = static_cast<char>(nibble(hex[2 * i]) << 4 | nibble(hex[2 * i + 1]));
  }
  return out;
}

}  // namespace

json response_to_json(const ChatResponse& r) {
  json j{{"finish_reason", r.finish_reason},
         {"prompt_tokens", r.prompt_tokens},
         {"completion_tokens", r.completion_tokens},
         {"latency_ms", r.latency_ms},
         {"seed_sent", r.seed_sent}};
  // Non-UTF-8 model output is kept byte-exact as hex.
  if (valid_utf8(r.text)) {
    j["text"] = r.text;
  } else {
    j["text_hex"] = to_hex(r.text);
  }
  return j;
}

ChatResponse response_from_json(const json& j) {
  ChatResponse r;
  if (j.contains("text_hex")) {
    r.text = from_hex(j.at("text_hex").get<std::string>());
  } else {
    r.text = j.at("text").get<std::string>();
  }
  r.finish_reason = j.value("finish_reason", std::string());
  r.prompt_tokens = j.value("prompt_tokens", std::int64_t{0});
  r.completion_tokens = j.value("completion_tokens", std::int64_t{0});
  r.latency_ms = j.value("latency_ms", std::int64_t{0});
  r.seed_sent = j.value("seed_sent", true);
  return r;
}

ResponseCache::ResponseCache(std::filesystem::path dir) : dir_(std::move(dir)) {
  if (!dir_.empty()) std::filesystem::create_directories(dir_);
}

std::optional<ChatResponse> ResponseCache::load_from_disk(const std::string& key_hash) const {
  if (dir_.empty()) return std::nullopt;
  const auto path = dir_ / (key_hash + ".json");
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    json entry = json::parse(buffer.str());
    if (entry.value("key_hash", std::string()) != key_hash) return std::nullopt;
    return response_from_json(entry.at("response"));
  } catch (const std::exception&) {
    // A torn or foreign file is treated as a miss and rewritten.
    return std::nullopt;
  }
}

std::optional<ChatResponse> ResponseCache::load(const std::string& key_hash) {
  {
    std::shared_lock lock(entries_mutex_);
    if (auto it = entries_.find(key_hash); it != entries_.end()) return it->second;
  }
  auto from_disk = load_from_disk(key_hash);
  if (from_disk) {
    std::unique_lock lock(entries_mutex_);
    entries_.emplace(key_hash, *from_disk);
  }
  return from_disk;
}

void ResponseCache::store(const std::string& key_hash, const json& request_payload,
                          const ChatResponse& response) {
  ChatResponse stored = response;
  stored.from_cache = false;
  {
    std::unique_lock lock(entries_mutex_);
    entries_[key_hash] = stored;
  }
  if (dir_.empty()) return;

  const auto now = std::chrono::system_clock::now();
  json entry{{"key_hash", key_hash},
             {"request", request_payload},
             {"response", response_to_json(stored)},
             {"timestamp", std::chrono::duration_cast<std::chrono::seconds>(now.time_since_epoch()).count()}};
  const std::string body = entry.dump(2, ' ', false, json::error_handler_t::replace);

  std::lock_guard lock(write_mutex_);
  const auto final_path = dir_ / (key_hash + ".json");
  auto tmp_path = final_path;
  tmp_path += ".tmp";
  {
    std::ofstream out(tmp_path, std::ios::binary | std::ios::trunc);
    out << body;
    if (!out) throw Error(ErrorCode::kTransport, "cannot write cache entry " + tmp_path.string());
  }
  std::filesystem::rename(tmp_path, final_path);
}

ChatResponse ResponseCache::get_or_compute(const std::string& key_hash, const json& request_payload,
                                           const std::function<ChatResponse()>& compute, bool& hit) {
  if (auto cached = load(key_hash)) {
    hit = true;
    return *cached;
  }

  std::promise<ChatResponse> promise;
  {
    std::unique_lock lock(inflight_mutex_);
    if (auto it = inflight_.find(key_hash); it != inflight_.end()) {
      auto future = it->second;
      lock.unlock();
      hit = true;
      return future.get();
    }
    // Re-check under the in-flight lock: the owner stores before erasing.
    {
      std::shared_lock entries_lock(entries_mutex_);
      if (auto it = entries_.find(key_hash); it != entries_.end()) {
        hit = true;
        return it->second;
      }
    }
    inflight_.emplace(key_hash, promise.get_future().share());
  }

  auto finish = [&] {
    std::lock_guard lock(inflight_mutex_);
    inflight_.erase(key_hash);
  };
  try {
    ChatResponse response = compute();
    store(key_hash, request_payload, response);
    promise.set_value(response);
    finish();
    hit = false;
    return response;
  } catch (...) {
    promise.set_exception(std::current_exception());
    finish();
    throw;
  }
}

}  // namespace argen
