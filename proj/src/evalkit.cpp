#include "argen/evalkit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <regex>
#include <set>

#include "argen/prompts.hpp"
#include "argen/strategies.hpp"

namespace argen {

ItemScore score_item(const TaskItem& item, const Transcript& transcript) {
  if (transcript.item_id != item.id) {
    throw Error(ErrorCode::kPrecondition,
                "transcript for '" + transcript.item_id + "' does not belong to item '" + item.id + "'");
  }
  const bool answered = transcript.parse_status != ParseStatus::kFailed && transcript.chosen_index.has_value();
  ItemScore out;
  switch (item.kind) {
    case TaskKind::kMultipleChoice:
    case TaskKind::kBinary: {
      const auto* gold = std::get_if<GoldIndex>(&item.gold);
      if (gold == nullptr) throw Error(ErrorCode::kKindMismatch, "choice item '" + item.id + "' lacks a gold index");
      out.score = answered && *transcript.chosen_index == gold->value ? 1.0 : 0.0;
      return out;
    }
    case TaskKind::kScoredRegression: {
      const auto* gold = std::get_if<GoldScore>(&item.gold);
      if (gold == nullptr) throw Error(ErrorCode::kKindMismatch, "scored item '" + item.id + "' lacks a gold score");
      double error = 1.0;
      if (answered) {
        if (auto value = candidate_value(item, *transcript.chosen_index)) error = std::abs(*value - gold->value);
      }
      out.abs_error = error;
      out.score = 1.0 - error;
      return out;
    }
    case TaskKind::kOpenGeneration:
      if (!std::holds_alternative<GoldReferences>(item.gold)) {
        throw Error(ErrorCode::kKindMismatch, "open item '" + item.id + "' lacks reference answers");
      }
      out.deferred_to_judge = true;
      return out;
  }
  throw Error(ErrorCode::kKindMismatch, "unknown task kind");
}

double one_minus_mae(const std::vector<double>& predicted, const std::vector<double>& gold) {
  if (predicted.size() != gold.size() || predicted.empty()) {
    throw Error(ErrorCode::kLengthMismatch, "one_minus_mae needs equal, non-zero lengths (" +
                                                std::to_string(predicted.size()) + " vs " +
                                                std::to_string(gold.size()) + ")");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) total += std::abs(predicted[i] - gold[i]);
  return 1.0 - total / static_cast<double>(predicted.size());
}

std::string render_judge_prompt(const TaskItem& item, const std::string& model_answer) {
  const auto* refs = std::get_if<GoldReferences>(&item.gold);
  if (item.kind != TaskKind::kOpenGeneration || refs == nullptr || refs->answers.empty()) {
    throw Error(ErrorCode::kKindMismatch, "judging needs an open-generation item with reference answers");
  }
  std::string references;
  for (const auto& r : refs->answers) references.append((references.empty() ? "- " : "\n- ") + r);
  return render_template(kJudgeTemplate,
                         {{"question", item.question}, {"references", references}, {"answer", model_answer}});
}

bool parse_verdict(std::string_view text) {
  static const std::regex kVerdict(R"(verdict\s*:\s*\**\s*(untruthful|truthful)\b)", std::regex::icase);
  const std::string s(text);
  std::optional<bool> verdict;
  for (auto it = std::sregex_iterator(s.begin(), s.end(), kVerdict); it != std::sregex_iterator(); ++it) {
    std::string word = (*it)[1].str();
    verdict = word.size() == std::string_view("truthful").size();
  }
  if (!verdict) throw Error(ErrorCode::kJudgeParseFailure, "judge reply carries no VERDICT token");
  return *verdict;
}

JudgeVerdict judge_generation(const TaskItem& item, const std::string& model_answer, Client& judge) {
  const std::string prompt = render_judge_prompt(item, model_answer);
  ChatRequest request;
  request.user = prompt;
  const auto response = judge.chat(request);
  JudgeVerdict out;
  out.raw = response.text;
  out.call = make_call_record(prompt, response);
  out.truthful = parse_verdict(response.text);
  return out;
}

// ---- ScoreMatrix -------------------------------------------------------------

void ScoreMatrix::set(const std::string& model, const std::string& task, const std::string& strategy, double score) {
  if (!(score >= 0.0 && score <= 1.0)) {
    throw Error(ErrorCode::kPrecondition, "score " + std::to_string(score) + " outside [0,1]");
  }
  rows_[Setting{model, task}][strategy] = score;
}

std::optional<double> ScoreMatrix::get(const std::string& model, const std::string& task,
                                       const std::string& strategy) const {
  auto row = rows_.find(Setting{model, task});
  if (row == rows_.end()) return std::nullopt;
  auto cell = row->second.find(strategy);
  if (cell == row->second.end()) return std::nullopt;
  return cell->second;
}

double ScoreMatrix::at(const Setting& setting, const std::string& strategy) const {
  auto value = get(setting.model, setting.task, strategy);
  if (!value) {
    throw Error(ErrorCode::kIncompleteMatrix,
                "no score for (" + setting.model + ", " + setting.task + ", " + strategy + ")");
  }
  return *value;
}

void ScoreMatrix::set_model_meta(const std::string& model, double parameter_count_billions) {
  if (!(parameter_count_billions > 0.0)) throw Error(ErrorCode::kPrecondition, "parameter count must be > 0");
  model_meta_[model] = parameter_count_billions;
}

std::optional<double> ScoreMatrix::model_params(const std::string& model) const {
  auto it = model_meta_.find(model);
  if (it == model_meta_.end()) return std::nullopt;
  return it->second;
}

std::vector<Setting> ScoreMatrix::settings() const {
  std::vector<Setting> out;
  for (const auto& [setting, _] : rows_) out.push_back(setting);
  return out;
}

std::vector<std::string> ScoreMatrix::models() const {
  std::set<std::string> names;
  for (const auto& [setting, _] : rows_) names.insert(setting.model);
  return {names.begin(), names.end()};
}

std::vector<std::string> ScoreMatrix::strategies() const {
  std::set<std::string> names;
  for (const auto& [_, row] : rows_) {
    for (const auto& [strategy, __] : row) names.insert(strategy);
  }
  return {names.begin(), names.end()};
}

std::size_t ScoreMatrix::size() const { return rows_.size(); }

void ScoreMatrix::require(const std::vector<std::string>& required) const {
  if (rows_.empty()) throw Error(ErrorCode::kIncompleteMatrix, "score matrix is empty");
  const auto& reference = rows_.begin()->second;
  for (const auto& [setting, row] : rows_) {
    for (const auto& strategy : required) {
      if (!row.count(strategy)) {
        throw Error(ErrorCode::kIncompleteMatrix,
                    "(" + setting.model + ", " + setting.task + ") has no score for " + strategy);
      }
    }
    bool same = row.size() == reference.size();
    for (auto a = row.begin(), b = reference.begin(); same && a != row.end(); ++a, ++b) same = a->first == b->first;
    if (!same) {
      throw Error(ErrorCode::kIncompleteMatrix,
                  "(" + setting.model + ", " + setting.task + ") has a different strategy set than other settings");
    }
  }
}

// ---- statistics ----------------------------------------------------------------

WinRates compute_win_rates(const ScoreMatrix& matrix, const StrategyRoles& roles) {
  matrix.require(roles.all());
  WinRates out;
  for (const auto& s : matrix.settings()) {
    const double zs = matrix.at(s, roles.zero_shot);
    const double cot = matrix.at(s, roles.cot);
    const double implicit = matrix.at(s, roles.ag_implicit);
    const double plain = matrix.at(s, roles.ag);
    const double best = std::max(implicit, plain);
    ++out.settings;
    if (best > zs && best > cot) ++out.wins_vs_all;
    if (best > cot) ++out.wins_vs_cot;
    if (implicit > cot && plain > cot) ++out.both_over_cot;
    if (implicit > cot) ++out.implicit_over_cot;
    if (plain > cot) ++out.plain_over_cot;
  }
  out.vs_all = static_cast<double>(out.wins_vs_all) / static_cast<double>(out.settings);
  out.vs_cot = static_cast<double>(out.wins_vs_cot) / static_cast<double>(out.settings);
  return out;
}

std::string_view to_string(Conditioning c) {
  return c == Conditioning::kStrictBoth ? "strict-both" : "any-variant";
}

Conditioning parse_conditioning(std::string_view text) {
  if (text == "strict-both") return Conditioning::kStrictBoth;
  if (text == "any-variant") return Conditioning::kAnyVariant;
  throw Error(ErrorCode::kConfigError, "unknown conditioning '" + std::string(text) + "'");
}

namespace {

struct DeltaGammaAccumulator {
  double delta_min = 0.0, delta_max = 0.0, gamma_min = 0.0, gamma_max = 0.0;
  std::size_t delta_count = 0, gamma_count = 0;

  DeltaGammaRow finish(std::string model) const {
    DeltaGammaRow row;
    row.model = std::move(model);
    row.delta_count = delta_count;
    row.gamma_count = gamma_count;
    if (delta_count > 0) {
      row.delta_min = delta_min / static_cast<double>(delta_count);
      row.delta_max = delta_max / static_cast<double>(delta_count);
    }
    if (gamma_count > 0) {
      row.gamma_min = gamma_min / static_cast<double>(gamma_count);
      row.gamma_max = gamma_max / static_cast<double>(gamma_count);
    }
    return row;
  }
};

}  // namespace

DeltaGammaReport compute_delta_gamma(const ScoreMatrix& matrix, Conditioning conditioning,
                                     const StrategyRoles& roles) {
  matrix.require(roles.all());
  std::map<std::string, DeltaGammaAccumulator> per_model;
  DeltaGammaAccumulator overall;
  for (const auto& s : matrix.settings()) {
    const double cot = matrix.at(s, roles.cot);
    const double implicit = matrix.at(s, roles.ag_implicit);
    const double plain = matrix.at(s, roles.ag);
    const double worst = std::min(implicit, plain);
    const double best = std::max(implicit, plain);

    const bool in_delta = conditioning == Conditioning::kStrictBoth ? cot > best : cot > worst;
    const bool in_gamma = conditioning == Conditioning::kStrictBoth ? worst > cot : best > cot;
    for (auto* acc : {&per_model[s.model], &overall}) {
      if (in_delta) {
        acc->delta_min += (cot - worst) * 100.0;
        acc->delta_max += (cot - best) * 100.0;
        ++acc->delta_count;
      }
      if (in_gamma) {
        acc->gamma_min += (worst - cot) * 100.0;
        acc->gamma_max += (best - cot) * 100.0;
        ++acc->gamma_count;
      }
    }
  }
  DeltaGammaReport report;
  for (const auto& [model, acc] : per_model) report.rows.push_back(acc.finish(model));
  report.overall = overall.finish("Overall");
  return report;
}

namespace {

std::vector<double> average_ranks(const std::vector<double>& values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.size() < 2) {
    throw Error(ErrorCode::kLengthMismatch, "spearman needs equal lengths >= 2");
  }
  const auto ra = average_ranks(a);
  const auto rb = average_ranks(b);
  const double mean = (static_cast<double>(a.size()) + 1.0) / 2.0;
  double cov = 0.0, var_a = 0.0, var_b = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = ra[i] - mean;
    const double db = rb[i] - mean;
    cov += da * db;
    var_a += da * da;
    var_b += db * db;
  }
  if (var_a == 0.0 || var_b == 0.0) throw Error(ErrorCode::kDegenerateInput, "zero rank variance");
  return std::clamp(cov / std::sqrt(var_a * var_b), -1.0, 1.0);
}

double mean_abs_difference(const ScoreMatrix& matrix, const std::string& strategy_a, const std::string& strategy_b) {
  matrix.require({strategy_a, strategy_b});
  double total = 0.0;
  const auto settings = matrix.settings();
  for (const auto& s : settings) total += std::abs(matrix.at(s, strategy_a) - matrix.at(s, strategy_b));
  return total / static_cast<double>(settings.size()) * 100.0;
}

std::string_view to_string(SizeBucket bucket) {
  switch (bucket) {
    case SizeBucket::kSmall: return "small";
    case SizeBucket::kMedium: return "medium";
    case SizeBucket::kLarge: return "large";
  }
  return "small";
}

SizeBucket bucket_for(double b) {
  if (b < 7.0) return SizeBucket::kSmall;
  if (b <= 8.0) return SizeBucket::kMedium;
  return SizeBucket::kLarge;
}

SizeReport bucket_by_size(const ScoreMatrix& matrix, const StrategyRoles& roles) {
  matrix.require(roles.all());
  const auto strategies = matrix.strategies();
  for (const auto& model : matrix.models()) {
    if (!matrix.model_params(model)) throw Error(ErrorCode::kMissingModelMeta, "no parameter count for " + model);
  }

  struct Acc {
    std::set<std::string> models;
    std::map<std::string, double> sums;
    double ag_cot = 0, agia_cot = 0, ag_zs = 0, agia_zs = 0;
    std::size_t n = 0;
  };
  std::map<SizeBucket, Acc> buckets;
  std::map<std::string, std::pair<std::map<std::string, double>, std::size_t>> per_model;

  for (const auto& s : matrix.settings()) {
    auto& acc = buckets[bucket_for(*matrix.model_params(s.model))];
    acc.models.insert(s.model);
    auto& [model_sums, model_n] = per_model[s.model];
    for (const auto& strategy : strategies) {
      acc.sums[strategy] += matrix.at(s, strategy);
      model_sums[strategy] += matrix.at(s, strategy);
    }
    const double cot = matrix.at(s, roles.cot), zs = matrix.at(s, roles.zero_shot);
    const double ag = matrix.at(s, roles.ag), agia = matrix.at(s, roles.ag_implicit);
    acc.ag_cot += (ag - cot) * 100.0;
    acc.agia_cot += (agia - cot) * 100.0;
    acc.ag_zs += (ag - zs) * 100.0;
    acc.agia_zs += (agia - zs) * 100.0;
    ++acc.n;
    ++model_n;
  }

  SizeReport report;
  for (const auto& [bucket, acc] : buckets) {
    const double n = static_cast<double>(acc.n);
    BucketSummary summary;
    summary.bucket = bucket;
    summary.models.assign(acc.models.begin(), acc.models.end());
    for (const auto& [strategy, sum] : acc.sums) summary.mean_score[strategy] = sum / n;
    summary.ag_gain_vs_cot = acc.ag_cot / n;
    summary.ag_implicit_gain_vs_cot = acc.agia_cot / n;
    summary.ag_gain_vs_zero_shot = acc.ag_zs / n;
    summary.ag_implicit_gain_vs_zero_shot = acc.agia_zs / n;
    report.buckets.push_back(std::move(summary));
  }
  for (const auto& [model, sums_n] : per_model) {
    ModelSeriesPoint point;
    point.model = model;
    point.parameter_count_billions = *matrix.model_params(model);
    for (const auto& [strategy, sum] : sums_n.first) point.mean_score[strategy] = sum / static_cast<double>(sums_n.second);
    report.series.push_back(std::move(point));
  }
  std::stable_sort(report.series.begin(), report.series.end(), [](const auto& a, const auto& b) {
    return a.parameter_count_billions < b.parameter_count_billions;
  });
  return report;
}

std::string format_pct(double pp) {
  const double magnitude = std::floor(std::abs(pp) * 100.0 + 0.5 + 1e-7) / 100.0;
  const double value = magnitude == 0.0 ? 0.0 : std::copysign(magnitude, pp);
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, "%.2f", value);
  return buffer;
}

std::string format_fraction_pct(double fraction) { return format_pct(fraction * 100.0); }

}  // namespace argen
