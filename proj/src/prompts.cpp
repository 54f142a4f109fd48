#include "argen/prompts.hpp"

#include <fstream>
#include <sstream>

namespace argen {

std::string_view special_instruction(StrategyVariant variant) {
  switch (variant) {
    case StrategyVariant::kZeroShot: return kZeroShotInstruction;
    case StrategyVariant::kChainOfThought: return kChainOfThoughtInstruction;
    case StrategyVariant::kArgGenImplicit: return kArgGenImplicitInstruction;
    case StrategyVariant::kArgGen: return kArgGenInstruction;
  }
  return kZeroShotInstruction;
}

// Keep in sync with assets/templates/*.txt (checked by prompts_test).
PromptTemplates PromptTemplates::defaults() {
  PromptTemplates t;
  t.composite = "{question}\n\n{candidates}\n\n{special_instruction}";
  t.argument_generation =
      "{question}\n\n{candidates}\n\n"
      "For each choice, make an argument for why it can be the answer and an argument for why it "
      "cannot be the answer. Do not select an answer yet. Use exactly this format for every choice:\n"
      "Choice <letter>:\n"
      "Supporting: <argument for the choice>\n"
      "Attacking: <argument against the choice>";
  t.argument_ranking =
      "{question}\n\n{candidates}\n\n"
      "Below are arguments for and against each choice.\n\n{arguments}\n\n"
      "Rank the choices by the strength of their arguments, strongest first. Answer with a single "
      "line in this format:\n"
      "Ranking: <letter> > <letter> > ...";
  t.assumption_generation =
      "{question}\n\n{candidates}\n\n"
      "For each choice, identify the implicit assumptions that must all hold for the choice to be "
      "the answer, that is, the propositions that are necessary so that the choice logically follows "
      "the question. Do not select an answer yet. Use exactly this format for every choice:\n"
      "Choice <letter>:\n"
      "Assumptions:\n"
      "- <proposition>\n"
      "- <proposition>";
  t.assumption_ranking =
      "{question}\n\n{candidates}\n\n"
      "Below are the implicit assumptions behind each choice.\n\n{arguments}\n\n"
      "Rank the choices by how feasible it is for all of their assumptions to hold at the same time, "
      "most feasible first. Answer with a single line in this format:\n"
      "Ranking: <letter> > <letter> > ...";
  t.candidate_generation =
      "{question}\n\n"
      "List {count} distinct candidate answers to the question above. Write one answer per line, "
      "with no numbering and no commentary.";
  t.candidate_generation_retry =
      "{question}\n\n"
      "List {count} more distinct candidate answers to the question above. Do not repeat any of "
      "these answers:\n{existing}\n\n"
      "Write one answer per line, with no numbering and no commentary.";
  return t;
}

const std::vector<std::string>& PromptTemplates::names() {
  static const std::vector<std::string> kNames{
      "composite",          "argument_generation",  "argument_ranking",          "assumption_generation",
      "assumption_ranking", "candidate_generation", "candidate_generation_retry"};
  return kNames;
}

const std::string& PromptTemplates::get(std::string_view name) const {
  return const_cast<PromptTemplates*>(this)->get(name);
}

std::string& PromptTemplates::get(std::string_view name) {
  if (name == "composite") return composite;
  if (name == "argument_generation") return argument_generation;
  if (name == "argument_ranking") return argument_ranking;
  if (name == "assumption_generation") return assumption_generation;
  if (name == "assumption_ranking") return assumption_ranking;
  if (name == "candidate_generation") return candidate_generation;
  if (name == "candidate_generation_retry") return candidate_generation_retry;
  throw Error(ErrorCode::kConfigError, "unknown template '" + std::string(name) + "'");
}

PromptTemplates PromptTemplates::load(const std::filesystem::path& dir) {
  PromptTemplates t = defaults();
  if (!std::filesystem::is_directory(dir)) {
    throw Error(ErrorCode::kConfigError, "template directory not found: " + dir.string());
  }
  for (const auto& name : names()) {
    const auto path = dir / (name + ".txt");
    std::ifstream in(path, std::ios::binary);
    if (!in) continue;
    std::stringstream buffer;
    buffer << in.rdbuf();
    std::string text = buffer.str();
    // Editors add a trailing newline; the prompt should not end with one.
    while (!text.empty() && (text.back() == '\n' || text.back() == '\r')) text.pop_back();
    t.get(name) = std::move(text);
  }
  return t;
}

std::string render_template(std::string_view tmpl, const std::map<std::string, std::string>& values) {
  std::string out;
  out.reserve(tmpl.size() + 256);
  std::size_t pos = 0;
  while (pos < tmpl.size()) {
    const auto open = tmpl.find('{', pos);
    if (open == std::string_view::npos) {
      out.append(tmpl.substr(pos));
      break;
    }
    out.append(tmpl.substr(pos, open - pos));
    const auto close = tmpl.find('}', open + 1);
    if (close == std::string_view::npos) {
      out.append(tmpl.substr(open));
      break;
    }
    const std::string name(tmpl.substr(open + 1, close - open - 1));
    if (auto it = values.find(name); it != values.end()) {
      out.append(it->second);
      pos = close + 1;
    } else {
      out.push_back('{');
      pos = open + 1;
    }
  }
  return out;
}

AnswerKey make_answer_key(const std::vector<std::string>& candidates) {
  AnswerKey key;
  key.reserve(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    key.push_back(AnswerOption{label_for(i)[0], i, candidates[i]});
  }
  return key;
}

std::string render_candidates(const AnswerKey& key) {
  std::string out;
  for (const auto& option : key) {
    if (!out.empty()) out.push_back('\n');
    out.push_back(option.label);
    out.append(". ");
    out.append(option.text);
  }
  return out;
}

namespace {

void require_candidates(const TaskItem& item) {
  if (item.kind == TaskKind::kOpenGeneration && item.candidates.empty()) {
    throw Error(ErrorCode::kUnsupportedKind,
                "item '" + item.id + "' is open-generation and has no candidates; run candidate generation first");
  }
  if (item.candidates.size() < 2) {
    throw Error(ErrorCode::kPrecondition, "item '" + item.id + "' needs at least 2 candidates");
  }
  if (item.candidates.size() > kMaxCandidates) {
    throw Error(ErrorCode::kPrecondition, "item '" + item.id + "' has more than 26 candidates");
  }
}

std::map<std::string, std::string> base_values(const TaskItem& item, const AnswerKey& key) {
  return {{"question", item.question}, {"candidates", render_candidates(key)}};
}

}  // namespace

PromptBundle build_prompt(const TaskItem& item, StrategyKind strategy, const PromptOptions& options) {
  require_candidates(item);
  strategy = strategy.normalized();

  PromptBundle bundle;
  bundle.answer_key = make_answer_key(item.candidates);
  auto values = base_values(item, bundle.answer_key);

  if (strategy.mode == ExecutionMode::kComposite) {
    std::string instruction(special_instruction(strategy.variant));
    if (options.final_answer_delimiter) {
      instruction.push_back('\n');
      instruction.append(kFinalAnswerDelimiter);
    }
    values["special_instruction"] = std::move(instruction);
    bundle.calls.push_back(render_template(options.templates.composite, values));
    return bundle;
  }

  const bool implicit = strategy.variant == StrategyVariant::kArgGenImplicit;
  const auto& generation = implicit ? options.templates.assumption_generation : options.templates.argument_generation;
  const auto& ranking = implicit ? options.templates.assumption_ranking : options.templates.argument_ranking;
  values["special_instruction"] = std::string(special_instruction(strategy.variant));
  bundle.calls.push_back(render_template(generation, values));
  bundle.calls.push_back(render_template(ranking, values));
  return bundle;
}

std::string render_ranking_prompt(const TaskItem& item, StrategyVariant variant, const std::string& arguments,
                                  const PromptOptions& options) {
  require_candidates(item);
  auto values = base_values(item, make_answer_key(item.candidates));
  values["special_instruction"] = std::string(special_instruction(variant));
  values["arguments"] = arguments;
  const auto& tmpl = variant == StrategyVariant::kArgGenImplicit ? options.templates.assumption_ranking
                                                                  : options.templates.argument_ranking;
  return render_template(tmpl, values);
}

std::string render_argument_tuples(const std::vector<ArgumentTuple>& tuples) {
  std::string out;
  for (const auto& t : tuples) {
    if (!out.empty()) out.append("\n\n");
    out.append("Choice " + label_for(t.candidate_index) + ":\n");
    out.append("Supporting: " + t.supporting + "\n");
    out.append("Attacking: " + t.attacking);
  }
  return out;
}

std::string render_assumption_sets(const std::vector<AssumptionSet>& sets) {
  std::string out;
  for (const auto& s : sets) {
    if (!out.empty()) out.append("\n\n");
    out.append("Choice " + label_for(s.candidate_index) + ":\nAssumptions:");
    for (const auto& p : s.propositions) out.append("\n- " + p);
  }
  return out;
}

}  // namespace argen
