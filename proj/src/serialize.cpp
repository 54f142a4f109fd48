#include "argen/serialize.hpp"

namespace argen {

namespace {

ErrorCode parse_error_code(const std::string& name) {
  for (int i = 0; i <= static_cast<int>(ErrorCode::kPrecondition); ++i) {
    auto code = static_cast<ErrorCode>(i);
    if (to_string(code) == name) return code;
  }
  throw Error(ErrorCode::kParseError, "unknown error code '" + name + "'");
}

template <typename T>
T required(const json& j, const char* key) {
  if (!j.contains(key)) throw Error(ErrorCode::kParseError, std::string("missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("field '") + key + "': " + e.what());
  }
}

}  // namespace

void to_json(json& j, const TaskItem& item) {
  j = json::object();
  j["id"] = item.id;
  j["question"] = item.question;
  j["candidates"] = item.candidates;
  j["kind"] = std::string(to_string(item.kind));
  std::visit(
      [&](const auto& gold) {
        using G = std::decay_t<decltype(gold)>;
        if constexpr (std::is_same_v<G, GoldIndex>) {
          j["gold"] = gold.value;
        } else if constexpr (std::is_same_v<G, GoldScore>) {
          j["gold"] = gold.value;
        } else {
          j["gold"] = gold.answers;
        }
      },
      item.gold);
  if (!item.candidate_values.empty()) j["candidate_values"] = item.candidate_values;
  if (item.augmented) {
    j["augmented"] = true;
    j["source_id"] = item.source_id;
  }
}

void from_json(const json& j, TaskItem& item) {
  if (!j.is_object()) throw Error(ErrorCode::kParseError, "record is not a JSON object");
  item = TaskItem{};
  const json& id = j.contains("id") ? j.at("id") : json();
  if (id.is_number_integer()) {
    item.id = std::to_string(id.get<long long>());
  } else {
    item.id = required<std::string>(j, "id");
  }
  item.question = required<std::string>(j, "question");
  if (j.contains("candidates")) item.candidates = required<std::vector<std::string>>(j, "candidates");
  item.kind = parse_task_kind(required<std::string>(j, "kind"));
  if (!j.contains("gold")) throw Error(ErrorCode::kParseError, "missing field 'gold'");
  const json& gold = j.at("gold");
  switch (item.kind) {
    case TaskKind::kMultipleChoice:
    case TaskKind::kBinary:
      if (!gold.is_number_integer() || gold.get<long long>() < 0) {
        throw Error(ErrorCode::kParseError, "gold must be a non-negative integer index");
      }
      item.gold = GoldIndex{gold.get<std::size_t>()};
      break;
    case TaskKind::kScoredRegression:
      if (!gold.is_number()) throw Error(ErrorCode::kParseError, "gold must be a number");
      item.gold = GoldScore{gold.get<double>()};
      break;
    case TaskKind::kOpenGeneration:
      if (gold.is_string()) {
        item.gold = GoldReferences{{gold.get<std::string>()}};
      } else if (gold.is_array()) {
        item.gold = GoldReferences{required<std::vector<std::string>>(j, "gold")};
      } else {
        throw Error(ErrorCode::kParseError, "gold must be a reference string or list");
      }
      break;
  }
  if (j.contains("candidate_values")) item.candidate_values = required<std::vector<double>>(j, "candidate_values");
  if (j.contains("augmented")) item.augmented = required<bool>(j, "augmented");
  if (j.contains("source_id")) item.source_id = required<std::string>(j, "source_id");
}

void to_json(json& j, const CallRecord& call) {
  j = json{{"prompt", call.prompt},
           {"response", call.response},
           {"latency_ms", call.latency_ms},
           {"prompt_tokens", call.prompt_tokens},
           {"completion_tokens", call.completion_tokens},
           {"from_cache", call.from_cache},
           {"seed_sent", call.seed_sent}};
}

void from_json(const json& j, CallRecord& call) {
  call.prompt = required<std::string>(j, "prompt");
  call.response = required<std::string>(j, "response");
  call.latency_ms = j.value("latency_ms", std::int64_t{0});
  call.prompt_tokens = j.value("prompt_tokens", std::int64_t{0});
  call.completion_tokens = j.value("completion_tokens", std::int64_t{0});
  call.from_cache = j.value("from_cache", false);
  call.seed_sent = j.value("seed_sent", true);
}

void to_json(json& j, const Transcript& t) {
  j = json::object();
  j["item_id"] = t.item_id;
  j["strategy"] = t.strategy.label();
  j["calls"] = t.calls;
  j["chosen_index"] = t.chosen_index ? json(*t.chosen_index) : json(nullptr);
  j["parse_status"] = std::string(to_string(t.parse_status));
  j["ranking"] = t.ranking ? json(t.ranking->order) : json(nullptr);
  j["notes"] = t.notes;
  j["failure"] = t.failure ? json(std::string(to_string(*t.failure))) : json(nullptr);
  j["generated_candidates"] = t.generated_candidates;
}

void from_json(const json& j, Transcript& t) {
  t = Transcript{};
  t.item_id = required<std::string>(j, "item_id");
  t.strategy = parse_strategy(required<std::string>(j, "strategy"));
  t.calls = required<std::vector<CallRecord>>(j, "calls");
  if (j.contains("chosen_index") && !j.at("chosen_index").is_null()) {
    t.chosen_index = j.at("chosen_index").get<std::size_t>();
  }
  t.parse_status = parse_parse_status(required<std::string>(j, "parse_status"));
  if (j.contains("ranking") && !j.at("ranking").is_null()) {
    t.ranking = Ranking{j.at("ranking").get<std::vector<std::size_t>>()};
  }
  if (j.contains("notes")) t.notes = j.at("notes").get<std::vector<std::string>>();
  if (j.contains("failure") && !j.at("failure").is_null()) {
    t.failure = parse_error_code(j.at("failure").get<std::string>());
  }
  if (j.contains("generated_candidates")) {
    t.generated_candidates = j.at("generated_candidates").get<std::vector<std::string>>();
  }
}

std::string dump_line(const json& j) {
  return j.dump(-1, ' ', false, json::error_handler_t::replace);
}

}  // namespace argen
