#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "argen/core.hpp"
#include "argen/datasets.hpp"
#include "argen/evalkit.hpp"
#include "argen/serialize.hpp"

namespace argen {

struct JudgeRecord {
  bool truthful = false;
  std::optional<ErrorCode> failure;
  CallRecord call;
};

// One line of the transcript archive: everything needed to rescore a cell
// without the original config.
struct CellRecord {
  std::string backend;
  double parameter_count_billions = 1.0;
  std::string dataset;
  Metric metric = Metric::kAccuracy;
  TaskItem item;
  Transcript transcript;
  std::optional<JudgeRecord> judge;
};

json cell_to_json(const CellRecord& record);
CellRecord cell_from_json(const json& j);

// Reads <path> line by line; throws kParseError with the line number.
std::vector<CellRecord> read_archive(const std::filesystem::path& path);

struct ItemScoreRecord {
  std::string model;
  std::string task;
  std::string strategy;
  std::string item_id;
  double score = 0.0;
  std::optional<double> abs_error;
  ParseStatus parse_status = ParseStatus::kFailed;
};

struct Analysis {
  ScoreMatrix matrix;
  std::vector<ItemScoreRecord> items;  // canonical order
  std::map<std::string, Metric> task_metrics;
};

// Scores every record and aggregates per (model, task, strategy) with the
// task's metric. Duplicate cells keep the last record.
Analysis analyze(std::vector<CellRecord> records);

// Picks the strategy labels that fill the ZS/CoT/AG roles, preferring the
// composite AG labels; nullopt when the matrix lacks them.
std::optional<StrategyRoles> resolve_roles(const ScoreMatrix& matrix);

// Writes scores.jsonl, score_matrix.csv and, when the four roles are present,
// win_rates.json, delta_gamma.csv, method_pairs.csv, size_buckets.csv,
// bucket_means.csv and model_size_series.csv. Returns the files written.
std::vector<std::filesystem::path> write_reports(const std::filesystem::path& dir, const Analysis& analysis,
                                                 Conditioning conditioning);

std::string delta_gamma_csv(const DeltaGammaReport& report);
std::string win_rates_json(const WinRates& rates);

}  // namespace argen
