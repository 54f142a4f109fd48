#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "argen/backends.hpp"

namespace argen {

// Offline stand-in for a chat model, selected with an endpoint_url of
// "mock://sim". Answers are a pure function of the model name and the prompt,
// and always come back in the format the prompt asks for.
class SimulatedTransport : public Transport {
 public:
  ChatResponse send(const BackendConfig& config, const nlohmann::json& payload) override;
};

std::string simulate_response(std::string_view model, std::string_view prompt);

std::uint64_t fnv1a64(std::string_view data, std::uint64_t basis = 0xcbf29ce484222325ULL);

bool is_simulated_endpoint(const std::string& endpoint_url);

}  // namespace argen
