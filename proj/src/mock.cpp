#include "argen/mock.hpp"

#include <sstream>
#include <thread>

namespace argen {

using nlohmann::json;

namespace {

std::int64_t word_count(const std::string& text) {
  std::istringstream in(text);
  std::int64_t n = 0;
  std::string word;
  while (in >> word) ++n;
  return n;
}

}  // namespace

std::string user_prompt_of(const json& payload) {
  const auto& messages = payload.at("messages");
  for (auto it = messages.rbegin(); it != messages.rend(); ++it) {
    if (it->value("role", std::string()) == "user") return it->at("content").get<std::string>();
  }
  return {};
}

std::shared_ptr<MockTransport> MockTransport::keyed(std::map<std::string, std::string> script) {
  if (script.empty()) throw Error(ErrorCode::kPrecondition, "mock script is empty");
  auto mock = std::shared_ptr<MockTransport>(new MockTransport(Mode::kKeyed));
  mock->keyed_ = std::move(script);
  return mock;
}

std::shared_ptr<MockTransport> MockTransport::sequential(std::vector<std::string> responses) {
  if (responses.empty()) throw Error(ErrorCode::kPrecondition, "mock script is empty");
  auto mock = std::shared_ptr<MockTransport>(new MockTransport(Mode::kSequential));
  mock->sequence_ = std::move(responses);
  return mock;
}

std::shared_ptr<MockTransport> MockTransport::responder(Responder fn) {
  if (!fn) throw Error(ErrorCode::kPrecondition, "mock responder is empty");
  auto mock = std::shared_ptr<MockTransport>(new MockTransport(Mode::kResponder));
  mock->responder_ = std::move(fn);
  return mock;
}

ChatResponse MockTransport::send(const BackendConfig&, const json& payload) {
  const std::string prompt = user_prompt_of(payload);
  std::string text;
  {
    std::lock_guard lock(mutex_);
    log_.push_back(payload);
    ++in_flight_;
    max_in_flight_ = std::max(max_in_flight_, in_flight_);
  }
  struct Leave {
    MockTransport* self;
    ~Leave() {
      std::lock_guard lock(self->mutex_);
      --self->in_flight_;
    }
  } leave{this};

  if (delay_.count() > 0) std::this_thread::sleep_for(delay_);

  switch (mode_) {
    case Mode::kKeyed: {
      auto it = keyed_.find(prompt);
      if (it == keyed_.end()) throw Error(ErrorCode::kMalformedResponse, "unscripted prompt");
      text = it->second;
      break;
    }
    case Mode::kSequential: {
      std::lock_guard lock(mutex_);
      if (next_ >= sequence_.size()) {
        throw Error(ErrorCode::kExhaustedScript,
                    "sequential script of " + std::to_string(sequence_.size()) + " responses exhausted");
      }
      text = sequence_[next_++];
      break;
    }
    case Mode::kResponder:
      text = responder_(prompt);
      break;
  }

  ChatResponse response;
  response.text = std::move(text);
  response.finish_reason = "stop";
  response.prompt_tokens = word_count(prompt);
  response.completion_tokens = word_count(response.text);
  return response;
}

std::vector<json> MockTransport::requests() const {
  std::lock_guard lock(mutex_);
  return log_;
}

std::size_t MockTransport::call_count() const {
  std::lock_guard lock(mutex_);
  return log_.size();
}

int MockTransport::max_in_flight() const {
  std::lock_guard lock(mutex_);
  return max_in_flight_;
}

std::unique_ptr<Client> mock_client(std::shared_ptr<MockTransport> transport, const std::string& name,
                                    int max_parallel) {
  BackendConfig config;
  config.name = name;
  config.endpoint_url = "mock://";
  config.max_parallel = max_parallel;
  config.retry.base_backoff_ms = 0;
  return std::make_unique<Client>(std::move(config), std::move(transport));
}

}  // namespace argen
