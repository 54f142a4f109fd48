#pragma once

#include <atomic>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "argen/backends.hpp"
#include "argen/config.hpp"
#include "argen/report.hpp"

namespace argen {

using TransportFactory = std::function<std::shared_ptr<Transport>(const BackendConfig&)>;

// mock:// endpoints get the simulated model, everything else goes over HTTP.
std::shared_ptr<Transport> default_transport(const BackendConfig& config);

struct RunOptions {
  TransportFactory transports = default_transport;
  // Unset: cache-only exactly when NO_NETWORK=1.
  std::optional<bool> cache_only;
  // Checked before each cell is started; cells never started count as cancelled.
  const std::atomic<bool>* cancel = nullptr;
};

struct CellFailure {
  std::string backend;
  std::string dataset;
  std::string item_id;
  std::string strategy;
  ErrorCode code = ErrorCode::kTransport;
  std::string message;
};

struct RunSummary {
  std::size_t planned_cells = 0;
  std::size_t completed_cells = 0;
  std::size_t cancelled_cells = 0;
  std::vector<CellFailure> failures;
  // Requests that reached a transport, retries included.
  std::size_t backend_calls = 0;
  std::size_t judge_calls = 0;
  std::filesystem::path archive;
  std::vector<std::filesystem::path> reports;

  bool complete() const { return failures.empty() && cancelled_cells == 0; }
};

class PartialRunError : public Error {
 public:
  explicit PartialRunError(RunSummary summary);
  const RunSummary& summary() const { return summary_; }

 private:
  RunSummary summary_;
};

struct DatasetPlan {
  DatasetSpec spec;
  std::vector<TaskItem> items;
};

struct RunPlan {
  std::vector<DatasetPlan> datasets;
  std::size_t cells = 0;
  // Model calls before caching, excluding candidate generation retries.
  std::size_t min_calls = 0;
};

// Validates the config and loads every dataset; makes no backend calls.
RunPlan plan_run(const RunConfig& config);

inline constexpr std::string_view kArchiveName = "transcripts.jsonl";

// Executes every (backend, item, strategy) cell once, appending each finished
// cell to <output_dir>/transcripts.jsonl, then writes the reports there.
// Throws PartialRunError, after persisting the finished cells, when any cell
// failed or was cancelled; reports are skipped in that case.
RunSummary run(const RunConfig& config, const RunOptions& options = {});

}  // namespace argen
