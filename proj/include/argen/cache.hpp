#pragma once

#include <filesystem>
#include <functional>
#include <future>
#include <map>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>

#include <json.hpp>

#include "argen/backends.hpp"

namespace argen {

// Content-addressed response store. Each entry lives in
// <dir>/<key-hash>.json as {key_hash, request, response, timestamp}.
// An empty directory keeps entries in memory only.
class ResponseCache {
 public:
  explicit ResponseCache(std::filesystem::path dir = {});

  std::optional<ChatResponse> load(const std::string& key_hash);
  void store(const std::string& key_hash, const nlohmann::json& request_payload,
             const ChatResponse& response);

  // Returns the cached response or runs `compute` once per key; concurrent
  // callers for the same key wait on the first one. `hit` reports whether the
  // value came from the cache or a duplicate in-flight request.
  ChatResponse get_or_compute(const std::string& key_hash, const nlohmann::json& request_payload,
                              const std::function<ChatResponse()>& compute, bool& hit);

  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::optional<ChatResponse> load_from_disk(const std::string& key_hash) const;

  std::filesystem::path dir_;
  std::shared_mutex entries_mutex_;
  std::map<std::string, ChatResponse> entries_;
  std::mutex write_mutex_;
  std::mutex inflight_mutex_;
  std::map<std::string, std::shared_future<ChatResponse>> inflight_;
};

nlohmann::json response_to_json(const ChatResponse& response);
ChatResponse response_from_json(const nlohmann::json& j);

}  // namespace argen
