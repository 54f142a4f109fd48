#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "argen/http_transport.hpp"

#include <chrono>
#include <cstdlib>
#include <regex>

#include <httplib.h>

namespace argen {

using nlohmann::json;

ParsedUrl parse_url(const std::string& url) {
  static const std::regex kUrl(R"(^(https?)://([^/:]+)(?::(\d+))?(/.*)?$)", std::regex::icase);
  std::smatch m;
  if (!std::regex_match(url, m, kUrl)) {
    throw Error(ErrorCode::kConfigError, "unsupported endpoint url '" + url + "'");
  }
  ParsedUrl out;
  out.scheme = m[1].str();
  for (auto& c : out.scheme) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  out.host = m[2].str();
  out.port = m[3].matched ? std::stoi(m[3].str()) : (out.scheme == "https" ? 443 : 80);
  out.path = m[4].matched ? m[4].str() : "/v1/chat/completions";
  return out;
}

ChatResponse parse_completion_body(const std::string& body) {
  json j;
  try {
    j = json::parse(body);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kMalformedResponse, std::string("response is not JSON: ") + e.what());
  }
  try {
    const auto& choice = j.at("choices").at(0);
    ChatResponse r;
    const auto& content = choice.at("message").at("content");
    r.text = content.is_null() ? std::string() : content.get<std::string>();
    if (choice.contains("finish_reason") && choice.at("finish_reason").is_string()) {
      r.finish_reason = choice.at("finish_reason").get<std::string>();
    }
    if (j.contains("usage") && j.at("usage").is_object()) {
      r.prompt_tokens = j.at("usage").value("prompt_tokens", std::int64_t{0});
      r.completion_tokens = j.at("usage").value("completion_tokens", std::int64_t{0});
    }
    return r;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kMalformedResponse, std::string("unexpected response shape: ") + e.what());
  }
}

ChatResponse HttpTransport::send(const BackendConfig& config, const json& payload) {
  const ParsedUrl url = parse_url(config.endpoint_url);

  httplib::Headers headers;
  if (!config.api_key_env.empty()) {
    const char* key = std::getenv(config.api_key_env.c_str());
    if (key == nullptr || *key == '\0') {
      throw Error(ErrorCode::kAuthFailure, "environment variable " + config.api_key_env + " is not set");
    }
    headers.emplace("Authorization", std::string("Bearer ") + key);
  }

  httplib::Client client(url.scheme + "://" + url.host + ":" + std::to_string(url.port));
  const auto timeout = std::chrono::milliseconds(config.timeout_ms);
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);

  const auto start = std::chrono::steady_clock::now();
  auto result = client.Post(url.path, headers, payload.dump(-1, ' ', false, json::error_handler_t::replace),
                            "application/json");
  const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
      std::chrono::steady_clock::now() - start);

  if (!result) {
    const auto err = result.error();
    const bool timed_out = err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read ||
                           err == httplib::Error::Write;
    throw Error(timed_out ? ErrorCode::kTimeout : ErrorCode::kTransport,
                config.name + ": " + httplib::to_string(err));
  }
  const int status = result->status;
  if (status == 401 || status == 403) {
    throw Error(ErrorCode::kAuthFailure, config.name + ": HTTP " + std::to_string(status));
  }
  if (status == 429) throw Error(ErrorCode::kRateLimited, config.name + ": HTTP 429");
  if (status == 408 || status == 504) throw Error(ErrorCode::kTimeout, config.name + ": HTTP " + std::to_string(status));
  if (status >= 500) throw Error(ErrorCode::kTransport, config.name + ": HTTP " + std::to_string(status));
  if (status != 200) {
    throw Error(ErrorCode::kMalformedResponse,
                config.name + ": HTTP " + std::to_string(status) + ": " + result->body.substr(0, 200));
  }

  ChatResponse response = parse_completion_body(result->body);
  response.latency_ms = elapsed.count();
  return response;
}

}  // namespace argen
