#pragma once

#include <chrono>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "argen/backends.hpp"

namespace argen {

// Deterministic scripted backend. Keyed mode answers by exact user-prompt
// match; sequential mode hands out canned responses in order; responder mode
// delegates to a function of the user prompt. Every request is logged.
class MockTransport : public Transport {
 public:
  using Responder = std::function<std::string(const std::string& user_prompt)>;

  static std::shared_ptr<MockTransport> keyed(std::map<std::string, std::string> script);
  static std::shared_ptr<MockTransport> sequential(std::vector<std::string> responses);
  static std::shared_ptr<MockTransport> responder(Responder fn);

  ChatResponse send(const BackendConfig& config, const nlohmann::json& payload) override;

  // Holds each request for `delay` so overlapping calls become observable.
  void set_delay(std::chrono::milliseconds delay) { delay_ = delay; }

  std::vector<nlohmann::json> requests() const;
  std::size_t call_count() const;
  int max_in_flight() const;

 private:
  enum class Mode { kKeyed, kSequential, kResponder };
  explicit MockTransport(Mode mode) : mode_(mode) {}

  Mode mode_;
  std::map<std::string, std::string> keyed_;
  std::vector<std::string> sequence_;
  std::size_t next_ = 0;
  Responder responder_;
  std::chrono::milliseconds delay_{0};

  mutable std::mutex mutex_;
  std::vector<nlohmann::json> log_;
  int in_flight_ = 0;
  int max_in_flight_ = 0;
};

// Convenience: a client with no cache over a scripted mock.
std::unique_ptr<Client> mock_client(std::shared_ptr<MockTransport> transport,
                                    const std::string& name = "mock", int max_parallel = 1);

std::string user_prompt_of(const nlohmann::json& payload);

}  // namespace argen
