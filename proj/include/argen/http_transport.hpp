#pragma once

#include <string>

#include "argen/backends.hpp"

namespace argen {

struct ParsedUrl {
  std::string scheme;  // "http" or "https"
  std::string host;
  int port = 0;
  std::string path;
};

ParsedUrl parse_url(const std::string& url);

// OpenAI-compatible chat-completions over HTTP(S). One attempt per send();
// retries live in Client.
class HttpTransport : public Transport {
 public:
  ChatResponse send(const BackendConfig& config, const nlohmann::json& payload) override;
};

// Maps a chat-completions response body to a ChatResponse.
ChatResponse parse_completion_body(const std::string& body);

}  // namespace argen
