#include "argen/core.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>

namespace argen {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidItem: return "InvalidItem";
    case ErrorCode::kTimeout: return "Timeout";
    case ErrorCode::kRateLimited: return "RateLimited";
    case ErrorCode::kAuthFailure: return "AuthFailure";
    case ErrorCode::kMalformedResponse: return "MalformedResponse";
    case ErrorCode::kExhaustedScript: return "ExhaustedScript";
    case ErrorCode::kCacheMiss: return "CacheMiss";
    case ErrorCode::kTransport: return "Transport";
    case ErrorCode::kUnsupportedKind: return "UnsupportedKind";
    case ErrorCode::kGenerationFailed: return "GenerationFailed";
    case ErrorCode::kParseFailure: return "ParseFailure";
    case ErrorCode::kMalformedArguments: return "MalformedArguments";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kEmptyDataset: return "EmptyDataset";
    case ErrorCode::kAlreadyAugmented: return "AlreadyAugmented";
    case ErrorCode::kKindMismatch: return "KindMismatch";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kJudgeParseFailure: return "JudgeParseFailure";
    case ErrorCode::kIncompleteMatrix: return "IncompleteMatrix";
    case ErrorCode::kDegenerateInput: return "DegenerateInput";
    case ErrorCode::kMissingModelMeta: return "MissingModelMeta";
    case ErrorCode::kConfigError: return "ConfigError";
    case ErrorCode::kPartialRun: return "PartialRunError";
    case ErrorCode::kNotFound: return "NotFound";
    case ErrorCode::kPrecondition: return "Precondition";
  }
  return "Unknown";
}

namespace {

std::string lower(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

[[noreturn]] void invalid(const TaskItem& item, const std::string& what) {
  throw Error(ErrorCode::kInvalidItem, "item '" + item.id + "': " + what);
}

}  // namespace

std::string StrategyKind::label() const {
  std::string base;
  switch (variant) {
    case StrategyVariant::kZeroShot: return "ZS";
    case StrategyVariant::kChainOfThought: return "COT";
    case StrategyVariant::kArgGenImplicit: base = "AGIA"; break;
    case StrategyVariant::kArgGen: base = "AG"; break;
  }
  return mode == ExecutionMode::kTwoCall ? base + "-2C" : base;
}

StrategyKind parse_strategy(std::string_view text) {
  std::string s = lower(text);
  ExecutionMode mode = ExecutionMode::kComposite;
  auto strip_suffix = [&](std::string_view suffix) {
    if (s.size() > suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0) {
      s.resize(s.size() - suffix.size());
      return true;
    }
    return false;
  };
  if (strip_suffix("-2c") || strip_suffix(":two-call") || strip_suffix(":explicit-two-call")) {
    mode = ExecutionMode::kTwoCall;
  } else {
    strip_suffix(":composite") || strip_suffix(":composite-single-call");
  }

  StrategyVariant variant;
  if (s == "zs" || s == "zero-shot" || s == "zeroshot") {
    variant = StrategyVariant::kZeroShot;
  } else if (s == "cot" || s == "chain-of-thought" || s == "chainofthought") {
    variant = StrategyVariant::kChainOfThought;
  } else if (s == "agia" || s == "agip" || s == "arg-gen-implicit" || s == "arggenimplicit") {
    variant = StrategyVariant::kArgGenImplicit;
  } else if (s == "ag" || s == "arg-gen" || s == "arggen") {
    variant = StrategyVariant::kArgGen;
  } else {
    throw Error(ErrorCode::kConfigError, "unknown strategy '" + std::string(text) + "'");
  }
  return StrategyKind{variant, mode}.normalized();
}

bool Ranking::is_permutation_of(std::size_t n) const {
  if (order.size() != n) return false;
  std::vector<bool> seen(n, false);
  for (auto idx : order) {
    if (idx >= n || seen[idx]) return false;
    seen[idx] = true;
  }
  return true;
}

std::string label_for(std::size_t index) {
  if (index >= kMaxCandidates) {
    throw Error(ErrorCode::kPrecondition, "candidate index " + std::to_string(index) + " has no label");
  }
  return std::string(1, static_cast<char>('A' + index));
}

std::optional<std::size_t> index_for_label(char label) {
  char up = static_cast<char>(std::toupper(static_cast<unsigned char>(label)));
  if (up < 'A' || up > 'Z') return std::nullopt;
  return static_cast<std::size_t>(up - 'A');
}

std::string_view to_string(TaskKind kind) {
  switch (kind) {
    case TaskKind::kMultipleChoice: return "multiple-choice";
    case TaskKind::kBinary: return "binary";
    case TaskKind::kScoredRegression: return "scored-regression";
    case TaskKind::kOpenGeneration: return "open-generation";
  }
  return "unknown";
}

TaskKind parse_task_kind(std::string_view text) {
  std::string s = lower(text);
  if (s == "multiple-choice" || s == "mc") return TaskKind::kMultipleChoice;
  if (s == "binary") return TaskKind::kBinary;
  if (s == "scored-regression" || s == "regression") return TaskKind::kScoredRegression;
  if (s == "open-generation" || s == "open") return TaskKind::kOpenGeneration;
  throw Error(ErrorCode::kParseError, "unknown task kind '" + std::string(text) + "'");
}

std::string_view to_string(ParseStatus status) {
  switch (status) {
    case ParseStatus::kOk: return "ok";
    case ParseStatus::kFuzzyMatched: return "fuzzy-matched";
    case ParseStatus::kFailed: return "failed";
  }
  return "failed";
}

ParseStatus parse_parse_status(std::string_view text) {
  if (text == "ok") return ParseStatus::kOk;
  if (text == "fuzzy-matched") return ParseStatus::kFuzzyMatched;
  if (text == "failed") return ParseStatus::kFailed;
  throw Error(ErrorCode::kParseError, "unknown parse status '" + std::string(text) + "'");
}

std::optional<double> candidate_value(const TaskItem& item, std::size_t index) {
  if (index >= item.candidates.size()) return std::nullopt;
  if (!item.candidate_values.empty()) return item.candidate_values[index];
  const std::string& text = item.candidates[index];
  auto first = text.find_first_not_of(" \t");
  auto last = text.find_last_not_of(" \t");
  if (first == std::string::npos) return std::nullopt;
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data() + first, text.data() + last + 1, value);
  if (ec != std::errc() || ptr != text.data() + last + 1) return std::nullopt;
  return value;
}

TaskItem validate_item(TaskItem item) {
  if (item.id.empty()) invalid(item, "empty id");
  if (item.question.empty()) invalid(item, "empty question");
  const std::size_t n = item.candidates.size();
  if (n > kMaxCandidates) invalid(item, "more than 26 candidates");
  for (const auto& c : item.candidates) {
    if (c.empty()) invalid(item, "empty candidate text");
  }

  switch (item.kind) {
    case TaskKind::kMultipleChoice:
    case TaskKind::kBinary: {
      if (n < 2) invalid(item, "choice items need at least 2 candidates");
      if (item.kind == TaskKind::kBinary && n != 2) invalid(item, "binary items need exactly 2 candidates");
      const auto* gold = std::get_if<GoldIndex>(&item.gold);
      if (gold == nullptr) invalid(item, "gold must be an answer index");
      if (gold->value >= n) invalid(item, "gold out of range");
      break;
    }
    case TaskKind::kScoredRegression: {
      const auto* gold = std::get_if<GoldScore>(&item.gold);
      if (gold == nullptr) invalid(item, "gold must be a numeric score");
      if (!(gold->value >= 0.0 && gold->value <= 1.0)) invalid(item, "score range");
      if (n < 2) invalid(item, "scored items need at least 2 candidate levels");
      if (!item.candidate_values.empty() && item.candidate_values.size() != n) {
        invalid(item, "candidate_values length differs from candidates");
      }
      for (std::size_t i = 0; i < n; ++i) {
        auto v = candidate_value(item, i);
        if (!v) invalid(item, "candidate " + std::to_string(i) + " has no numeric value");
        if (!(*v >= 0.0 && *v <= 1.0)) invalid(item, "candidate value outside [0,1]");
      }
      break;
    }
    case TaskKind::kOpenGeneration: {
      const auto* gold = std::get_if<GoldReferences>(&item.gold);
      if (gold == nullptr) invalid(item, "gold must be reference answers");
      if (gold->answers.empty()) invalid(item, "no reference answers");
      if (n == 1) invalid(item, "open items carry either no candidates or at least 2");
      break;
    }
  }
  return item;
}

}  // namespace argen
