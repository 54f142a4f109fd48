#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "argen/error.hpp"

namespace argen {

enum class TaskKind { kMultipleChoice, kBinary, kScoredRegression, kOpenGeneration };

struct GoldIndex {
  std::size_t value = 0;
  bool operator==(const GoldIndex&) const = default;
};

struct GoldScore {
  double value = 0.0;
  bool operator==(const GoldScore&) const = default;
};

// Reference answers for open-generation items, shown to the judge.
struct GoldReferences {
  std::vector<std::string> answers;
  bool operator==(const GoldReferences&) const = default;
};

using Gold = std::variant<GoldIndex, GoldScore, GoldReferences>;

struct TaskItem {
  std::string id;
  std::string question;
  std::vector<std::string> candidates;
  Gold gold;
  TaskKind kind = TaskKind::kMultipleChoice;
  // Numeric value of each candidate for scored-regression items. Empty means
  // the candidate texts themselves are parsed as numbers.
  std::vector<double> candidate_values;
  bool augmented = false;
  std::string source_id;

  bool operator==(const TaskItem&) const = default;
};

enum class StrategyVariant { kZeroShot, kChainOfThought, kArgGenImplicit, kArgGen };
enum class ExecutionMode { kComposite, kTwoCall };

struct StrategyKind {
  StrategyVariant variant = StrategyVariant::kZeroShot;
  ExecutionMode mode = ExecutionMode::kComposite;

  bool is_arg_gen() const {
    return variant == StrategyVariant::kArgGenImplicit || variant == StrategyVariant::kArgGen;
  }
  // Baselines ignore mode; the normalized form always carries kComposite for them.
  StrategyKind normalized() const {
    return is_arg_gen() ? *this : StrategyKind{variant, ExecutionMode::kComposite};
  }
  bool operator==(const StrategyKind& other) const {
    auto a = normalized();
    auto b = other.normalized();
    return a.variant == b.variant && a.mode == b.mode;
  }

  // Short, stable name used in reports and config files: ZS, COT, AGIA, AG,
  // AGIA-2C, AG-2C.
  std::string label() const;
};

// Accepts the short labels above and long forms such as "zero-shot",
// "chain-of-thought", "arg-gen-implicit:two-call".
StrategyKind parse_strategy(std::string_view text);

struct ArgumentTuple {
  std::size_t candidate_index = 0;
  std::string supporting;
  std::string attacking;
  bool operator==(const ArgumentTuple&) const = default;
};

struct AssumptionSet {
  std::size_t candidate_index = 0;
  std::vector<std::string> propositions;
  bool operator==(const AssumptionSet&) const = default;
};

struct Ranking {
  std::vector<std::size_t> order;  // best first

  bool is_permutation_of(std::size_t n) const;
  bool operator==(const Ranking&) const = default;
};

enum class ParseStatus { kOk, kFuzzyMatched, kFailed };

struct CallRecord {
  std::string prompt;
  std::string response;
  std::int64_t latency_ms = 0;
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;
  bool from_cache = false;
  bool seed_sent = true;
  bool operator==(const CallRecord&) const = default;
};

struct Transcript {
  std::string item_id;
  StrategyKind strategy;
  std::vector<CallRecord> calls;
  std::optional<std::size_t> chosen_index;
  ParseStatus parse_status = ParseStatus::kFailed;
  std::optional<Ranking> ranking;
  // Non-fatal degradations (partial ranking, malformed arguments) and the
  // reason for a failed parse.
  std::vector<std::string> notes;
  std::optional<ErrorCode> failure;
  // Candidates produced by candidate generation for open items, in order.
  std::vector<std::string> generated_candidates;

  bool operator==(const Transcript&) const = default;
};

// Display labels: 0 -> "A", 1 -> "B", ... Candidate count is capped at 26.
inline constexpr std::size_t kMaxCandidates = 26;
std::string label_for(std::size_t index);
std::optional<std::size_t> index_for_label(char label);

std::string_view to_string(TaskKind kind);
TaskKind parse_task_kind(std::string_view text);
std::string_view to_string(ParseStatus status);
ParseStatus parse_parse_status(std::string_view text);

TaskItem validate_item(TaskItem item);

// Numeric value of candidate `index` of a scored-regression item.
std::optional<double> candidate_value(const TaskItem& item, std::size_t index);

}  // namespace argen
