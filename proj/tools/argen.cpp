#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "argen/config.hpp"
#include "argen/datasets.hpp"
#include "argen/report.hpp"
#include "argen/runner.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitPartial = 1;
constexpr int kExitConfig = 2;

std::atomic<bool> g_cancel{false};

void on_signal(int) { g_cancel.store(true); }

void print_summary(const argen::RunSummary& s) {
  std::cout << "cells: " << s.completed_cells << "/" << s.planned_cells << " completed";
  if (!s.failures.empty()) std::cout << ", " << s.failures.size() << " failed";
  if (s.cancelled_cells) std::cout << ", " << s.cancelled_cells << " not started";
  std::cout << "\nbackend calls: " << s.backend_calls << ", judge calls: " << s.judge_calls << "\n";
  std::cout << "transcripts: " << s.archive.string() << "\n";
  for (const auto& p : s.reports) std::cout << "report: " << p.string() << "\n";
}

int cmd_run(const std::string& config_path) {
  const auto config = argen::load_config(config_path);
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  argen::RunOptions options;
  options.cancel = &g_cancel;
  try {
    print_summary(argen::run(config, options));
    return kExitOk;
  } catch (const argen::PartialRunError& e) {
    print_summary(e.summary());
    for (const auto& f : e.summary().failures) {
      std::cerr << "failed: " << f.backend << " " << f.dataset << " " << f.item_id << " " << f.strategy << ": "
                << f.message << "\n";
    }
    std::cerr << "partial run: " << e.what() << "\n";
    return kExitPartial;
  }
}

int cmd_validate(const std::string& config_path) {
  const auto config = argen::load_config(config_path);
  const auto plan = argen::plan_run(config);
  std::cout << "config ok: " << config.backends.size() << " backends, " << plan.datasets.size() << " datasets, "
            << config.strategies.size() << " strategies\n";
  for (const auto& d : plan.datasets) {
    std::cout << "  " << d.spec.name << " (" << argen::to_string(d.spec.kind) << ", " << argen::to_string(d.spec.metric)
              << "): " << d.items.size() << " items\n";
  }
  std::cout << "planned cells: " << plan.cells << "\n";
  std::cout << "planned calls (before caching): " << plan.min_calls << "\n";
  return kExitOk;
}

int cmd_augment(const std::string& in_path, const std::string& out_path, std::optional<double> fraction,
                std::optional<std::size_t> count, std::uint64_t seed) {
  std::ifstream in(in_path, std::ios::binary);
  if (!in) throw argen::Error(argen::ErrorCode::kNotFound, "cannot read " + in_path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  const auto items = argen::parse_items(buffer.str(), in_path);
  const auto out_items = count ? argen::augment_none_option_count(items, *count, seed)
                               : argen::augment_none_option(items, fraction.value_or(0.15), seed);
  std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
  out << argen::to_jsonl(out_items);
  if (!out) throw argen::Error(argen::ErrorCode::kConfigError, "cannot write " + out_path);
  std::cout << "augmented " << out_items.size() - items.size() << " of " << items.size() << " items -> " << out_path
            << "\n";
  return kExitOk;
}

std::filesystem::path archive_in(const std::filesystem::path& p) {
  return std::filesystem::is_directory(p) ? p / argen::kArchiveName : p;
}

int cmd_report(const std::string& transcripts, std::string out_dir, const std::string& conditioning) {
  const auto archive = archive_in(transcripts);
  if (out_dir.empty()) out_dir = archive.parent_path().string();
  auto analysis = argen::analyze(argen::read_archive(archive));
  for (const auto& p : argen::write_reports(out_dir, analysis, argen::parse_conditioning(conditioning))) {
    std::cout << "report: " << p.string() << "\n";
  }
  return kExitOk;
}

int cmd_inspect(const std::string& id, const std::string& transcripts) {
  std::size_t shown = 0;
  for (const auto& r : argen::read_archive(archive_in(transcripts))) {
    if (r.item.id != id) continue;
    const auto& t = r.transcript;
    std::cout << "== " << r.backend << " | " << r.dataset << " | " << t.strategy.label() << " ==\n";
    std::cout << "question: " << r.item.question << "\n";
    const auto& candidates = t.generated_candidates.empty() ? r.item.candidates : t.generated_candidates;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      std::cout << "  " << argen::label_for(i) << ". " << candidates[i] << "\n";
    }
    for (std::size_t i = 0; i < t.calls.size(); ++i) {
      std::cout << "-- call " << i + 1 << (t.calls[i].from_cache ? " (cached)" : "") << " --\n";
      std::cout << "[prompt]\n" << t.calls[i].prompt << "\n[response]\n" << t.calls[i].response << "\n";
    }
    std::cout << "status: " << argen::to_string(t.parse_status);
    if (t.chosen_index) std::cout << ", chosen: " << argen::label_for(*t.chosen_index);
    if (t.ranking) {
      std::cout << ", ranking:";
      for (auto idx : t.ranking->order) std::cout << " " << argen::label_for(idx);
    }
    std::cout << "\n";
    for (const auto& note : t.notes) std::cout << "note: " << note << "\n";
    if (r.judge) std::cout << "judge: " << (r.judge->failure ? "unparseable" : r.judge->truthful ? "truthful" : "untruthful") << "\n";
    std::cout << "\n";
    ++shown;
  }
  if (shown == 0) throw argen::Error(argen::ErrorCode::kNotFound, "no transcript for item '" + id + "'");
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Argument Generation evaluation harness"};
  app.require_subcommand(1);

  std::string config_path;
  auto* run = app.add_subcommand("run", "Execute every configured cell and write reports");
  run->add_option("--config", config_path, "Run configuration (YAML)")->required();

  auto* validate = app.add_subcommand("validate", "Check a configuration and print the planned cell count");
  validate->add_option("--config", config_path, "Run configuration (YAML)")->required();

  std::string in_path, out_path;
  std::optional<double> fraction;
  std::optional<std::size_t> count;
  std::uint64_t seed = 0;
  auto* augment = app.add_subcommand("augment", "Add 'None of the Answers are Correct' variants to a JSONL dataset");
  augment->add_option("--in", in_path, "Input JSONL")->required();
  augment->add_option("--out", out_path, "Output JSONL")->required();
  auto* fraction_opt = augment->add_option("--fraction", fraction, "Fraction of items to augment (default 0.15)");
  augment->add_option("--count", count, "Exact number of items to augment")->excludes(fraction_opt);
  augment->add_option("--seed", seed, "Selection seed")->required();

  std::string transcripts = ".";
  std::string report_out;
  std::string conditioning = "strict-both";
  auto* report = app.add_subcommand("report", "Recompute reports from a transcript archive");
  report->add_option("--transcripts", transcripts, "Directory holding transcripts.jsonl, or the file")->required();
  report->add_option("--out", report_out, "Report directory (default: next to the archive)");
  report->add_option("--conditioning", conditioning, "strict-both or any-variant");

  std::string id;
  auto* inspect = app.add_subcommand("inspect", "Pretty-print the transcripts of one item");
  inspect->add_option("--id", id, "Item id")->required();
  inspect->add_option("--transcripts", transcripts, "Directory holding transcripts.jsonl, or the file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*run) return cmd_run(config_path);
    if (*validate) return cmd_validate(config_path);
    if (*augment) return cmd_augment(in_path, out_path, fraction, count, seed);
    if (*report) return cmd_report(transcripts, report_out, conditioning);
    if (*inspect) return cmd_inspect(id, transcripts);
  } catch (const argen::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitConfig;
}
