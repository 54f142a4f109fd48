#include "argen/simulated.hpp"

#include <algorithm>
#include <iterator>
#include <regex>
#include <sstream>
#include <vector>

#include "argen/mock.hpp"

namespace argen {

std::uint64_t fnv1a64(std::string_view data, std::uint64_t basis) {
  std::uint64_t h = basis;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

bool is_simulated_endpoint(const std::string& endpoint_url) { return endpoint_url.rfind("mock://", 0) == 0; }

namespace {

struct Option {
  char label;
  std::string text;
};

std::vector<Option> options_in(std::string_view prompt) {
  static const std::regex kLine(R"(^([A-Z])\. (.+)$)");
  std::vector<Option> out;
  std::istringstream in{std::string(prompt)};
  std::string line;
  while (std::getline(in, line)) {
    std::smatch m;
    if (!std::regex_match(line, m, kLine)) continue;
    const char label = m[1].str()[0];
    if (label != static_cast<char>('A' + out.size())) continue;
    out.push_back({label, m[2].str()});
  }
  return out;
}

std::string first_line(std::string_view prompt) {
  const auto nl = prompt.find('\n');
  return std::string(prompt.substr(0, nl));
}

// Splitmix step so consecutive draws from one hash stay independent.
std::uint64_t next(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::string ranking_line(const std::vector<Option>& options, std::uint64_t state) {
  std::vector<char> labels;
  for (const auto& o : options) labels.push_back(o.label);
  for (std::size_t i = labels.size(); i > 1; --i) std::swap(labels[i - 1], labels[next(state) % i]);
  std::string out = "Ranking: ";
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (i) out += " > ";
    out.push_back(labels[i]);
  }
  return out;
}

std::size_t requested_count(std::string_view prompt) {
  static const std::regex kCount(R"(List (\d+) )");
  std::string s(prompt);
  std::smatch m;
  if (std::regex_search(s, m, kCount)) return std::stoul(m[1].str());
  return 3;
}

}  // namespace

std::string simulate_response(std::string_view model, std::string_view prompt) {
  std::uint64_t state = fnv1a64(prompt, fnv1a64(model));
  const auto options = options_in(prompt);
  const std::string question = first_line(prompt);

  if (prompt.find("VERDICT: TRUTHFUL") != std::string_view::npos) {
    return next(state) % 3 == 0 ? "The answer conflicts with the references.\nVERDICT: UNTRUTHFUL"
                                : "The answer agrees with the references.\nVERDICT: TRUTHFUL";
  }
  if (prompt.find("distinct candidate answers") != std::string_view::npos) {
    const std::size_t count = requested_count(prompt);
    const std::uint64_t tag = next(state) % 100000;
    std::string out;
    for (std::size_t i = 0; i < count; ++i) {
      out += "Answer " + std::to_string(tag) + "-" + std::to_string(i + 1) + " to: " + question + "\n";
    }
    return out;
  }
  if (options.size() < 2) return "I cannot tell which option is meant.";

  if (prompt.find("Ranking: <letter> > <letter>") != std::string_view::npos) {
    return "Weighing the material above.\n" + ranking_line(options, state);
  }
  if (prompt.find("Supporting: <argument") != std::string_view::npos) {
    std::string out;
    for (const auto& o : options) {
      out += "Choice " + std::string(1, o.label) + ":\n";
      out += "Supporting: \"" + o.text + "\" fits the wording of the question.\n";
      out += "Attacking: \"" + o.text + "\" leaves part of the question unexplained.\n\n";
    }
    return out;
  }
  if (prompt.find("Assumptions:\n- <proposition>") != std::string_view::npos) {
    std::string out;
    for (const auto& o : options) {
      out += "Choice " + std::string(1, o.label) + ":\nAssumptions:\n";
      const auto n = 1 + next(state) % 3;
      for (std::uint64_t k = 0; k < n; ++k) out += "- Premise " + std::to_string(k + 1) + " behind " + o.label + "\n";
      out += "\n";
    }
    return out;
  }

  const auto& pick = options[next(state) % options.size()];
  std::string out;
  switch (next(state) % 3) {
    case 0: out = "Final Answer: " + std::string(1, pick.label); break;
    case 1: out = "Looking at each option in turn, " + pick.text + " holds up best.\nFinal Answer: " + pick.label; break;
    default: out = "Option " + std::string(1, pick.label) + " is the most defensible.\n\nFinal Answer: " + pick.label;
  }
  return out;
}

ChatResponse SimulatedTransport::send(const BackendConfig& config, const nlohmann::json& payload) {
  const std::string prompt = user_prompt_of(payload);
  ChatResponse r;
  r.text = simulate_response(config.wire_model(), prompt);
  r.finish_reason = "stop";
  auto words = [](const std::string& s) {
    std::istringstream in(s);
    return static_cast<std::int64_t>(std::distance(std::istream_iterator<std::string>(in), {}));
  };
  r.prompt_tokens = words(prompt);
  r.completion_tokens = words(r.text);
  r.seed_sent = config.send_seed;
  return r;
}

}  // namespace argen
