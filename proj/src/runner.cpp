#include "argen/runner.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <map>
#include <mutex>
#include <thread>
#include <tuple>

#include "argen/cache.hpp"
#include "argen/http_transport.hpp"
#include "argen/simulated.hpp"
#include "argen/strategies.hpp"

namespace argen {

std::shared_ptr<Transport> default_transport(const BackendConfig& config) {
  if (is_simulated_endpoint(config.endpoint_url)) return std::make_shared<SimulatedTransport>();
  return std::make_shared<HttpTransport>();
}

namespace {

std::string summarize(const RunSummary& s) {
  std::string msg = std::to_string(s.failures.size()) + " of " + std::to_string(s.planned_cells) + " cells failed";
  if (s.cancelled_cells) msg += ", " + std::to_string(s.cancelled_cells) + " not started";
  if (!s.failures.empty()) {
    const auto& f = s.failures.front();
    msg += "; first: " + f.backend + "/" + f.dataset + "/" + f.item_id + "/" + f.strategy + ": " + f.message;
  }
  return msg;
}

struct Cell {
  std::size_t backend;
  std::size_t dataset;
  std::size_t item;
  std::size_t strategy;
};

}  // namespace

PartialRunError::PartialRunError(RunSummary summary)
    : Error(ErrorCode::kPartialRun, summarize(summary)), summary_(std::move(summary)) {}

RunPlan plan_run(const RunConfig& config) {
  config.validate();
  RunPlan plan;
  std::size_t per_item_calls = 0;
  for (const auto& s : config.strategies) per_item_calls += expected_calls(s);
  for (const auto& spec : config.datasets) {
    DatasetPlan d{spec, load(spec)};
    const std::size_t n = d.items.size();
    plan.cells += n * config.strategies.size() * config.backends.size();
    std::size_t calls = n * per_item_calls;
    if (spec.kind == TaskKind::kOpenGeneration) {
      // One generation call per strategy and one judge call per cell.
      calls += 2 * n * config.strategies.size();
    }
    plan.min_calls += calls * config.backends.size();
    plan.datasets.push_back(std::move(d));
  }
  return plan;
}

RunSummary run(const RunConfig& config, const RunOptions& options) {
  RunPlan plan = plan_run(config);

  bool cache_only = false;
  if (options.cache_only) {
    cache_only = *options.cache_only;
  } else if (const char* env = std::getenv("NO_NETWORK")) {
    cache_only = std::string(env) == "1";
  }

  auto cache = std::make_shared<ResponseCache>(config.cache_dir);
  std::vector<std::unique_ptr<Client>> clients;
  for (const auto& b : config.backends) {
    clients.push_back(std::make_unique<Client>(b, options.transports(b), cache, cache_only));
  }
  std::unique_ptr<Client> judge;
  if (config.judge) judge = std::make_unique<Client>(*config.judge, options.transports(*config.judge), cache, cache_only);

  StrategyOptions strategy_options;
  strategy_options.candidate_count = config.candidate_count;
  strategy_options.prompts.final_answer_delimiter = config.final_answer_delimiter;
  if (!config.templates_dir.empty()) strategy_options.prompts.templates = PromptTemplates::load(config.templates_dir);

  std::vector<Cell> cells;
  for (std::size_t b = 0; b < clients.size(); ++b) {
    for (std::size_t d = 0; d < plan.datasets.size(); ++d) {
      for (std::size_t i = 0; i < plan.datasets[d].items.size(); ++i) {
        for (std::size_t s = 0; s < config.strategies.size(); ++s) cells.push_back({b, d, i, s});
      }
    }
  }

  std::filesystem::create_directories(config.output_dir);
  RunSummary summary;
  summary.planned_cells = cells.size();
  summary.archive = config.output_dir / kArchiveName;
  std::ofstream archive(summary.archive, std::ios::binary | std::ios::trunc);
  if (!archive) throw Error(ErrorCode::kConfigError, "cannot write " + summary.archive.string());

  std::mutex mutex;
  std::vector<CellRecord> records;
  std::atomic<std::size_t> next{0};

  auto execute = [&](const Cell& cell) {
    const auto& backend = config.backends[cell.backend];
    const auto& dataset = plan.datasets[cell.dataset];
    const auto& item = dataset.items[cell.item];
    const auto& strategy = config.strategies[cell.strategy];

    CellRecord record;
    record.backend = backend.name;
    record.parameter_count_billions = backend.parameter_count_billions;
    record.dataset = dataset.spec.name;
    record.metric = dataset.spec.metric;
    record.item = item;
    record.transcript = run_strategy(item, *clients[cell.backend], strategy, strategy_options);

    const auto& t = record.transcript;
    const auto& answers = t.generated_candidates.empty() ? item.candidates : t.generated_candidates;
    if (item.kind == TaskKind::kOpenGeneration && t.chosen_index && *t.chosen_index < answers.size()) {
      const std::string prompt = render_judge_prompt(item, answers[*t.chosen_index]);
      ChatRequest request;
      request.user = prompt;
      const auto response = judge->chat(request);
      JudgeRecord verdict;
      verdict.call = make_call_record(prompt, response);
      try {
        verdict.truthful = parse_verdict(response.text);
      } catch (const Error& e) {
        verdict.failure = e.code();
      }
      record.judge = std::move(verdict);
    }

    const std::string line = dump_line(cell_to_json(record));
    std::lock_guard lock(mutex);
    archive << line << '\n';
    archive.flush();
    records.push_back(std::move(record));
    ++summary.completed_cells;
  };

  auto worker = [&] {
    while (true) {
      if (options.cancel != nullptr && options.cancel->load()) return;
      const std::size_t k = next.fetch_add(1);
      if (k >= cells.size()) return;
      const Cell& cell = cells[k];
      try {
        execute(cell);
      } catch (const Error& e) {
        std::lock_guard lock(mutex);
        summary.failures.push_back({config.backends[cell.backend].name, plan.datasets[cell.dataset].spec.name,
                                    plan.datasets[cell.dataset].items[cell.item].id,
                                    config.strategies[cell.strategy].label(), e.code(), e.what()});
      } catch (const std::exception& e) {
        std::lock_guard lock(mutex);
        summary.failures.push_back({config.backends[cell.backend].name, plan.datasets[cell.dataset].spec.name,
                                    plan.datasets[cell.dataset].items[cell.item].id,
                                    config.strategies[cell.strategy].label(), ErrorCode::kTransport, e.what()});
      }
    }
  };

  const std::size_t threads = std::min<std::size_t>(static_cast<std::size_t>(config.max_parallel_global),
                                                    std::max<std::size_t>(cells.size(), 1));
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  archive.close();

  for (const auto& c : clients) summary.backend_calls += c->transport_calls();
  if (judge) summary.judge_calls = judge->transport_calls();
  summary.cancelled_cells = summary.planned_cells - summary.completed_cells - summary.failures.size();

  if (!summary.complete()) {
    std::sort(summary.failures.begin(), summary.failures.end(), [](const CellFailure& a, const CellFailure& b) {
      return std::tie(a.backend, a.dataset, a.item_id, a.strategy) < std::tie(b.backend, b.dataset, b.item_id, b.strategy);
    });
    throw PartialRunError(std::move(summary));
  }
  summary.reports = write_reports(config.output_dir, analyze(std::move(records)), config.conditioning);
  return summary;
}

}  // namespace argen
