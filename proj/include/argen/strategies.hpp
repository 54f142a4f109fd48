#pragma once

#include <vector>

#include "argen/backends.hpp"
#include "argen/core.hpp"
#include "argen/prompts.hpp"

namespace argen {

struct StrategyOptions {
  PromptOptions prompts;
  // Candidates requested for open-generation items.
  std::size_t candidate_count = 4;
  // Generation calls allowed to collect distinct candidates.
  int generation_attempts = 3;
};

struct GeneratedCandidates {
  TaskItem item;
  std::vector<CallRecord> calls;
};

// Asks the model for `count` distinct answers to an open question. Duplicates
// (case-insensitive) are collapsed and the model is asked again for the rest.
GeneratedCandidates generate_candidates(const TaskItem& item, Client& client, std::size_t count,
                                        const StrategyOptions& options = {});

Transcript run_baseline(const TaskItem& item, Client& client, StrategyVariant variant,
                        const StrategyOptions& options = {});

// Argument Generation: supporting and attacking arguments per candidate, then
// a listwise ranking; the top-ranked candidate is the answer.
Transcript run_arg_gen(const TaskItem& item, Client& client, ExecutionMode mode,
                       const StrategyOptions& options = {});

// Implicit-assumption variant: one assumption set per candidate, ranked by
// how feasible it is for all of its propositions to hold together.
Transcript run_arg_gen_implicit(const TaskItem& item, Client& client, ExecutionMode mode,
                                const StrategyOptions& options = {});

// Dispatches on the strategy and runs candidate generation first for open
// items without candidates. Transport errors propagate; parse failures are
// recorded in the transcript.
Transcript run_strategy(const TaskItem& item, Client& client, StrategyKind strategy,
                        const StrategyOptions& options = {});

// Calls a strategy issues for one item, excluding candidate generation.
std::size_t expected_calls(StrategyKind strategy);

CallRecord make_call_record(const std::string& prompt, const ChatResponse& response);

}  // namespace argen
