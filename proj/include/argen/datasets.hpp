#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "argen/core.hpp"

namespace argen {

enum class Metric { kAccuracy, kOneMinusMae, kJudgeWinRate };

std::string_view to_string(Metric metric);
Metric parse_metric(std::string_view text);

struct SampleSpec {
  // Exactly one of fraction (in (0,1]) or count is set.
  std::optional<double> fraction;
  std::optional<std::size_t> count;
  std::uint64_t seed = 0;
};

struct DatasetSpec {
  std::string name;
  TaskKind kind = TaskKind::kMultipleChoice;
  std::filesystem::path source_path;
  Metric metric = Metric::kAccuracy;
  std::optional<SampleSpec> sample;

  // Throws kConfigError when metric and kind are incompatible.
  void validate() const;
};

// The literal that replaces the gold candidate in augmented items.
inline constexpr std::string_view kNoneOfTheAnswers = "None of the Answers are Correct";

// Reads line-delimited JSON records {id, question, candidates, gold, kind}.
// Blank lines are skipped. Throws kParseError naming the 1-based line and
// kEmptyDataset when nothing was read.
std::vector<TaskItem> parse_items(std::string_view text, const std::string& source_name = "<memory>");
std::vector<TaskItem> load(const DatasetSpec& spec);

// Deterministic subset in source order.
std::vector<TaskItem> sample_items(const std::vector<TaskItem>& items, const SampleSpec& sample);

// round(x) with halves rounded up.
std::size_t round_half_up(double x);

// Picks round(fraction * N) (or `count`) items uniformly without replacement
// and appends a copy of each whose gold candidate text is the literal above.
// Originals are kept and come first.
std::vector<TaskItem> augment_none_option(const std::vector<TaskItem>& items, double fraction, std::uint64_t seed);
std::vector<TaskItem> augment_none_option_count(const std::vector<TaskItem>& items, std::size_t count,
                                                std::uint64_t seed);

std::string to_jsonl(const std::vector<TaskItem>& items);

// Uniform k-of-n selection driven by a 64-bit Mersenne Twister; returns
// sorted indices. Identical across platforms for a given seed.
std::vector<std::size_t> choose_indices(std::size_t n, std::size_t k, std::uint64_t seed);

}  // namespace argen
