#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "argen/core.hpp"
#include "argen/prompts.hpp"

namespace argen {

struct ParsedAnswer {
  std::size_t index = 0;
  ParseStatus status = ParseStatus::kOk;
  bool operator==(const ParsedAnswer&) const = default;
};

// Extracts the chosen candidate from free-form output. Tries, in order:
//   1. the last "Final Answer: <label>" (case-insensitive)      -> ok
//   2. a standalone label token on the last non-empty line      -> ok
//   3. the longest candidate text quoted in the response        -> fuzzy-matched
// Throws kParseFailure when nothing matches.
ParsedAnswer parse_final_answer(std::string_view response, const AnswerKey& key);

struct ParsedRanking {
  Ranking ranking;
  ParseStatus status = ParseStatus::kOk;
  std::vector<std::string> notes;
};

// Reads the last "Ranking: B > A > C" line. Omitted candidates are appended
// in original order and ties keep the first-listed label; both degrade the
// status to fuzzy-matched. Without a ranking line the final-answer parser is
// tried and the remaining candidates follow in original order. Throws
// kParseFailure when no candidate can be identified.
ParsedRanking parse_ranking(std::string_view response, const AnswerKey& key);

// Segments "Choice X:" blocks into one tuple per candidate, ordered by
// candidate index. Throws kMalformedArguments when a candidate is missing or
// lacks a supporting or attacking argument.
std::vector<ArgumentTuple> parse_argument_tuples(std::string_view response, const AnswerKey& key);

// Same segmentation; each block must list at least one proposition.
std::vector<AssumptionSet> parse_assumption_sets(std::string_view response, const AnswerKey& key);

// One answer per line; bullets and numbering stripped, blank lines dropped.
std::vector<std::string> parse_candidate_list(std::string_view response);

}  // namespace argen
