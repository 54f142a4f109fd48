#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "argen/core.hpp"

namespace argen {

// Special instructions appended to the end of the input question, one per
// prompting method. These strings are fixed; do not edit them.
inline constexpr std::string_view kZeroShotInstruction = "Only respond with the correct answer";
inline constexpr std::string_view kChainOfThoughtInstruction = "Let's think about each option step by step";
inline constexpr std::string_view kArgGenImplicitInstruction =
    "When answering, first reason about each choice, and make an argument for why it can be the "
    "answer and why it cannot be the answer. Then identify, for each choice, what implicit "
    "assumptions you might be making for each of your arguments. By implicit assumption, we mean "
    "those propositions that are necessary so that the choice logically follows the question. "
    "Then select one of the choices based on the strongest argument";
inline constexpr std::string_view kArgGenInstruction =
    "When answering, first reason about each choice, and make an argument for why it can be the "
    "answer and why it cannot be the answer. Then select one of the choices based on the strongest "
    "argument.";

// Appended on its own line after the special instruction when the
// final-answer delimiter is enabled.
inline constexpr std::string_view kFinalAnswerDelimiter = "Conclude with 'Final Answer: <letter>'.";

std::string_view special_instruction(StrategyVariant variant);

// Prompt text assets. Placeholders: {question}, {candidates},
// {special_instruction}, {arguments}, {count}, {existing}.
struct PromptTemplates {
  std::string composite;
  std::string argument_generation;
  std::string argument_ranking;
  std::string assumption_generation;
  std::string assumption_ranking;
  std::string candidate_generation;
  std::string candidate_generation_retry;

  static PromptTemplates defaults();
  // Files named <field>.txt in `dir` override the matching default.
  static PromptTemplates load(const std::filesystem::path& dir);
  static const std::vector<std::string>& names();
  const std::string& get(std::string_view name) const;
  std::string& get(std::string_view name);
};

// Single-pass substitution of {name} placeholders. Substituted values are
// never rescanned; unknown placeholders are left as-is.
std::string render_template(std::string_view tmpl, const std::map<std::string, std::string>& values);

struct AnswerOption {
  char label = 'A';
  std::size_t index = 0;
  std::string text;
  bool operator==(const AnswerOption&) const = default;
};
using AnswerKey = std::vector<AnswerOption>;

AnswerKey make_answer_key(const std::vector<std::string>& candidates);
// "A. first\nB. second..."
std::string render_candidates(const AnswerKey& key);

struct PromptOptions {
  bool final_answer_delimiter = true;
  PromptTemplates templates = PromptTemplates::defaults();
};

struct PromptBundle {
  // One prompt for single-call strategies; a generation prompt followed by a
  // ranking template that still holds {arguments} for two-call execution.
  std::vector<std::string> calls;
  AnswerKey answer_key;
};

PromptBundle build_prompt(const TaskItem& item, StrategyKind strategy, const PromptOptions& options = {});

// The ranking prompt for two-call execution with the generated arguments filled in.
std::string render_ranking_prompt(const TaskItem& item, StrategyVariant variant, const std::string& arguments,
                                  const PromptOptions& options);

std::string render_argument_tuples(const std::vector<ArgumentTuple>& tuples);
std::string render_assumption_sets(const std::vector<AssumptionSet>& sets);

}  // namespace argen
