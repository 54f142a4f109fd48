#include "argen/datasets.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "argen/serialize.hpp"

namespace argen {

std::string_view to_string(Metric metric) {
  switch (metric) {
    case Metric::kAccuracy: return "accuracy";
    case Metric::kOneMinusMae: return "one-minus-mae";
    case Metric::kJudgeWinRate: return "judge-win-rate";
  }
  return "accuracy";
}

Metric parse_metric(std::string_view text) {
  if (text == "accuracy") return Metric::kAccuracy;
  if (text == "one-minus-mae" || text == "1-mae") return Metric::kOneMinusMae;
  if (text == "judge-win-rate" || text == "judge") return Metric::kJudgeWinRate;
  throw Error(ErrorCode::kConfigError, "unknown metric '" + std::string(text) + "'");
}

void DatasetSpec::validate() const {
  auto fail = [this](const std::string& what) {
    throw Error(ErrorCode::kConfigError, "dataset '" + name + "': " + what);
  };
  if (name.empty()) fail("empty name");
  const bool regression = kind == TaskKind::kScoredRegression;
  const bool open = kind == TaskKind::kOpenGeneration;
  if (regression != (metric == Metric::kOneMinusMae)) fail("scored-regression pairs with one-minus-mae only");
  if (open != (metric == Metric::kJudgeWinRate)) fail("open-generation pairs with judge-win-rate only");
  if (sample) {
    if (sample->fraction.has_value() == sample->count.has_value()) fail("sample needs exactly one of fraction or count");
    if (sample->fraction && !(*sample->fraction > 0.0 && *sample->fraction <= 1.0)) {
      fail("sample fraction must lie in (0, 1]");
    }
  }
}

std::vector<TaskItem> parse_items(std::string_view text, const std::string& source_name) {
  std::vector<TaskItem> items;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;

    auto fail = [&](const std::string& what) {
      throw Error(ErrorCode::kParseError, source_name + ":" + std::to_string(line_no) + ": " + what);
    };
    try {
      TaskItem item = json::parse(line).get<TaskItem>();
      items.push_back(validate_item(std::move(item)));
    } catch (const json::exception& e) {
      fail(e.what());
    } catch (const Error& e) {
      fail(e.what());
    }
  }
  if (items.empty()) throw Error(ErrorCode::kEmptyDataset, source_name + " contains no items");
  return items;
}

std::vector<TaskItem> load(const DatasetSpec& spec) {
  spec.validate();
  std::ifstream in(spec.source_path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kParseError, "cannot open " + spec.source_path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  auto items = parse_items(buffer.str(), spec.source_path.string());
  for (const auto& item : items) {
    if (item.kind != spec.kind) {
      throw Error(ErrorCode::kParseError, spec.source_path.string() + ": item '" + item.id + "' has kind " +
                                              std::string(to_string(item.kind)) + ", dataset expects " +
                                              std::string(to_string(spec.kind)));
    }
  }
  if (spec.sample) items = sample_items(items, *spec.sample);
  return items;
}

std::size_t round_half_up(double x) {
  // The epsilon absorbs products such as 0.15 * 10 landing a hair under .5.
  return static_cast<std::size_t>(std::floor(x + 0.5 + 1e-9));
}

std::vector<std::size_t> choose_indices(std::size_t n, std::size_t k, std::uint64_t seed) {
  if (k > n) throw Error(ErrorCode::kPrecondition, "cannot choose more items than exist");
  std::mt19937_64 rng(seed);
  // Rejection sampling keeps the draw uniform and independent of the
  // standard library's distribution implementation.
  auto below = [&rng](std::uint64_t bound) {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t x;
    do {
      x = rng();
    } while (x >= limit);
    return x % bound;
  };
  std::vector<std::size_t> pool(n);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  for (std::size_t i = 0; i < k; ++i) {
    const auto j = i + static_cast<std::size_t>(below(n - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(k);
  std::sort(pool.begin(), pool.end());
  return pool;
}

std::vector<TaskItem> sample_items(const std::vector<TaskItem>& items, const SampleSpec& sample) {
  std::size_t k = sample.count ? *sample.count : round_half_up(sample.fraction.value_or(1.0) * items.size());
  k = std::min(k, items.size());
  std::vector<TaskItem> out;
  for (auto idx : choose_indices(items.size(), k, sample.seed)) out.push_back(items[idx]);
  if (out.empty()) throw Error(ErrorCode::kEmptyDataset, "sampling left no items");
  return out;
}

std::vector<TaskItem> augment_none_option_count(const std::vector<TaskItem>& items, std::size_t count,
                                                std::uint64_t seed) {
  for (const auto& item : items) {
    if (item.kind != TaskKind::kMultipleChoice) {
      throw Error(ErrorCode::kKindMismatch, "item '" + item.id + "' is not multiple-choice");
    }
    const auto* gold = std::get_if<GoldIndex>(&item.gold);
    if (gold == nullptr || gold->value >= item.candidates.size()) {
      throw Error(ErrorCode::kInvalidItem, "item '" + item.id + "' has no usable gold index");
    }
    for (const auto& c : item.candidates) {
      if (c == kNoneOfTheAnswers) {
        throw Error(ErrorCode::kAlreadyAugmented, "item '" + item.id + "' already contains the none option");
      }
    }
  }
  if (count > items.size()) throw Error(ErrorCode::kPrecondition, "augmentation count exceeds item count");

  std::vector<TaskItem> out = items;
  for (auto idx : choose_indices(items.size(), count, seed)) {
    TaskItem copy = items[idx];
    copy.candidates[std::get<GoldIndex>(copy.gold).value] = std::string(kNoneOfTheAnswers);
    copy.augmented = true;
    copy.source_id = items[idx].id;
    copy.id = items[idx].id + "-none";
    out.push_back(std::move(copy));
  }
  return out;
}

std::vector<TaskItem> augment_none_option(const std::vector<TaskItem>& items, double fraction, std::uint64_t seed) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) throw Error(ErrorCode::kPrecondition, "fraction must lie in [0, 1]");
  return augment_none_option_count(items, round_half_up(fraction * static_cast<double>(items.size())), seed);
}

std::string to_jsonl(const std::vector<TaskItem>& items) {
  std::string out;
  for (const auto& item : items) {
    out.append(dump_line(json(item)));
    out.push_back('\n');
  }
  return out;
}

}  // namespace argen
