#include "argen/strategies.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "argen/answer_parser.hpp"

namespace argen {

namespace {

std::string fold(const std::string& text) {
  std::string out;
  for (char c : text) out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  return out;
}

ChatResponse ask(Client& client, const std::string& prompt) {
  ChatRequest request;
  request.user = prompt;
  return client.chat(request);
}

void record_failure(Transcript& t, const Error& e) {
  t.chosen_index.reset();
  t.ranking.reset();
  t.parse_status = ParseStatus::kFailed;
  t.failure = e.code();
  t.notes.push_back(e.what());
}

Transcript single_call(const TaskItem& item, Client& client, StrategyKind strategy,
                       const StrategyOptions& options) {
  const PromptBundle bundle = build_prompt(item, strategy, options.prompts);
  Transcript t;
  t.item_id = item.id;
  t.strategy = strategy.normalized();
  const auto response = ask(client, bundle.calls.front());
  t.calls.push_back(make_call_record(bundle.calls.front(), response));
  if (!response.seed_sent) t.notes.push_back("seed omitted for this endpoint");
  try {
    const ParsedAnswer answer = parse_final_answer(response.text, bundle.answer_key);
    t.chosen_index = answer.index;
    t.parse_status = answer.status;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kParseFailure) throw;
    record_failure(t, e);
  }
  return t;
}

Transcript two_call(const TaskItem& item, Client& client, StrategyVariant variant, const StrategyOptions& options) {
  const StrategyKind strategy{variant, ExecutionMode::kTwoCall};
  const PromptBundle bundle = build_prompt(item, strategy, options.prompts);
  Transcript t;
  t.item_id = item.id;
  t.strategy = strategy;

  const auto generation = ask(client, bundle.calls[0]);
  t.calls.push_back(make_call_record(bundle.calls[0], generation));
  if (!generation.seed_sent) t.notes.push_back("seed omitted for this endpoint");

  bool degraded = false;
  std::string arguments;
  try {
    arguments = variant == StrategyVariant::kArgGenImplicit
                    ? render_assumption_sets(parse_assumption_sets(generation.text, bundle.answer_key))
                    : render_argument_tuples(parse_argument_tuples(generation.text, bundle.answer_key));
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kMalformedArguments) throw;
    // The ranking call still runs, over the unsegmented generation output.
    t.notes.push_back(e.what());
    arguments = generation.text;
    degraded = true;
  }

  const std::string ranking_prompt = render_ranking_prompt(item, variant, arguments, options.prompts);
  const auto ranked = ask(client, ranking_prompt);
  t.calls.push_back(make_call_record(ranking_prompt, ranked));

  try {
    ParsedRanking parsed = parse_ranking(ranked.text, bundle.answer_key);
    t.notes.insert(t.notes.end(), parsed.notes.begin(), parsed.notes.end());
    t.ranking = parsed.ranking;
    t.chosen_index = parsed.ranking.order.front();
    t.parse_status = degraded ? ParseStatus::kFuzzyMatched : parsed.status;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kParseFailure) throw;
    record_failure(t, e);
  }
  return t;
}

Transcript run_arg_gen_variant(const TaskItem& item, Client& client, StrategyVariant variant, ExecutionMode mode,
                               const StrategyOptions& options) {
  if (mode == ExecutionMode::kComposite) return single_call(item, client, StrategyKind{variant, mode}, options);
  return two_call(item, client, variant, options);
}

}  // namespace

CallRecord make_call_record(const std::string& prompt, const ChatResponse& response) {
  CallRecord record;
  record.prompt = prompt;
  record.response = response.text;
  record.latency_ms = response.latency_ms;
  record.prompt_tokens = response.prompt_tokens;
  record.completion_tokens = response.completion_tokens;
  record.from_cache = response.from_cache;
  record.seed_sent = response.seed_sent;
  return record;
}

std::size_t expected_calls(StrategyKind strategy) {
  strategy = strategy.normalized();
  return strategy.mode == ExecutionMode::kTwoCall ? 2 : 1;
}

GeneratedCandidates generate_candidates(const TaskItem& item, Client& client, std::size_t count,
                                        const StrategyOptions& options) {
  if (item.kind != TaskKind::kOpenGeneration) {
    throw Error(ErrorCode::kUnsupportedKind, "candidate generation applies to open-generation items only");
  }
  if (count < 2) throw Error(ErrorCode::kPrecondition, "candidate generation needs count >= 2");
  if (count > kMaxCandidates) throw Error(ErrorCode::kPrecondition, "candidate generation count exceeds 26");

  GeneratedCandidates out;
  out.item = item;
  out.item.candidates.clear();
  std::set<std::string> seen;

  for (int attempt = 0; attempt < options.generation_attempts && out.item.candidates.size() < count; ++attempt) {
    const std::size_t missing = count - out.item.candidates.size();
    std::string prompt;
    if (out.item.candidates.empty()) {
      prompt = render_template(options.prompts.templates.candidate_generation,
                               {{"question", item.question}, {"count", std::to_string(missing)}});
    } else {
      std::string existing;
      for (const auto& c : out.item.candidates) existing.append((existing.empty() ? "- " : "\n- ") + c);
      prompt = render_template(options.prompts.templates.candidate_generation_retry,
                               {{"question", item.question},
                                {"count", std::to_string(missing)},
                                {"existing", existing}});
    }
    const auto response = ask(client, prompt);
    out.calls.push_back(make_call_record(prompt, response));
    for (auto& candidate : parse_candidate_list(response.text)) {
      if (out.item.candidates.size() >= count) break;
      if (!seen.insert(fold(candidate)).second) continue;
      out.item.candidates.push_back(std::move(candidate));
    }
  }

  if (out.item.candidates.size() < count) {
    throw Error(ErrorCode::kGenerationFailed, "obtained " + std::to_string(out.item.candidates.size()) + " of " +
                                                  std::to_string(count) + " distinct candidates for item '" +
                                                  item.id + "'");
  }
  return out;
}

Transcript run_baseline(const TaskItem& item, Client& client, StrategyVariant variant, const StrategyOptions& options) {
  if (variant != StrategyVariant::kZeroShot && variant != StrategyVariant::kChainOfThought) {
    throw Error(ErrorCode::kPrecondition, "run_baseline takes ZeroShot or ChainOfThought");
  }
  return single_call(item, client, StrategyKind{variant, ExecutionMode::kComposite}, options);
}

Transcript run_arg_gen(const TaskItem& item, Client& client, ExecutionMode mode, const StrategyOptions& options) {
  return run_arg_gen_variant(item, client, StrategyVariant::kArgGen, mode, options);
}

Transcript run_arg_gen_implicit(const TaskItem& item, Client& client, ExecutionMode mode,
                                const StrategyOptions& options) {
  return run_arg_gen_variant(item, client, StrategyVariant::kArgGenImplicit, mode, options);
}

Transcript run_strategy(const TaskItem& item, Client& client, StrategyKind strategy, const StrategyOptions& options) {
  strategy = strategy.normalized();
  const TaskItem* target = &item;
  GeneratedCandidates generated;
  if (item.kind == TaskKind::kOpenGeneration && item.candidates.empty()) {
    generated = generate_candidates(item, client, options.candidate_count, options);
    target = &generated.item;
  }

  Transcript t = strategy.is_arg_gen()
                     ? run_arg_gen_variant(*target, client, strategy.variant, strategy.mode, options)
                     : run_baseline(*target, client, strategy.variant, options);
  if (!generated.calls.empty()) {
    t.calls.insert(t.calls.begin(), generated.calls.begin(), generated.calls.end());
    t.generated_candidates = generated.item.candidates;
  }
  return t;
}

}  // namespace argen
