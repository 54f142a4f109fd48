#include "argen/report.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <tuple>

namespace argen {

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string fixed6(double v) {
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, "%.6f", v);
  return buffer;
}

std::string opt_pct(const std::optional<double>& v) { return v ? format_pct(*v) : std::string(); }

void write_file(const std::filesystem::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << body;
  if (!out) throw Error(ErrorCode::kConfigError, "cannot write " + path.string());
}

}  // namespace

json cell_to_json(const CellRecord& r) {
  json j{{"backend", r.backend},
         {"parameter_count_billions", r.parameter_count_billions},
         {"dataset", r.dataset},
         {"metric", std::string(to_string(r.metric))},
         {"item", r.item},
         {"transcript", r.transcript}};
  if (r.judge) {
    j["judge"] = json{{"truthful", r.judge->truthful},
                      {"failure", r.judge->failure ? json(std::string(to_string(*r.judge->failure))) : json(nullptr)},
                      {"call", r.judge->call}};
  } else {
    j["judge"] = nullptr;
  }
  return j;
}

CellRecord cell_from_json(const json& j) {
  CellRecord r;
  try {
    r.backend = j.at("backend").get<std::string>();
    r.parameter_count_billions = j.at("parameter_count_billions").get<double>();
    r.dataset = j.at("dataset").get<std::string>();
    r.metric = parse_metric(j.at("metric").get<std::string>());
    r.item = j.at("item").get<TaskItem>();
    r.transcript = j.at("transcript").get<Transcript>();
    if (j.contains("judge") && !j.at("judge").is_null()) {
      const auto& jj = j.at("judge");
      JudgeRecord judge;
      judge.truthful = jj.at("truthful").get<bool>();
      if (jj.contains("failure") && !jj.at("failure").is_null()) judge.failure = ErrorCode::kJudgeParseFailure;
      judge.call = jj.at("call").get<CallRecord>();
      r.judge = judge;
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("malformed archive record: ") + e.what());
  }
  return r;
}

std::vector<CellRecord> read_archive(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kNotFound, "transcript archive not found: " + path.string());
  std::vector<CellRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      records.push_back(cell_from_json(json::parse(line)));
    } catch (const std::exception& e) {
      throw Error(ErrorCode::kParseError, path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return records;
}

Analysis analyze(std::vector<CellRecord> records) {
  using CellKey = std::tuple<std::string, std::string, std::string, std::string>;
  std::map<CellKey, CellRecord> cells;
  for (auto& r : records) {
    CellKey key{r.backend, r.dataset, r.item.id, r.transcript.strategy.label()};
    cells.insert_or_assign(std::move(key), std::move(r));
  }

  Analysis analysis;
  struct Group {
    Metric metric;
    std::vector<double> scores;
    std::vector<double> errors;
  };
  std::map<std::tuple<std::string, std::string, std::string>, Group> groups;

  for (const auto& [key, r] : cells) {
    const auto& [model, task, item_id, strategy] = key;
    ItemScoreRecord rec{model, task, strategy, item_id, 0.0, std::nullopt, r.transcript.parse_status};
    if (r.item.kind == TaskKind::kOpenGeneration) {
      rec.score = r.judge && !r.judge->failure && r.judge->truthful ? 1.0 : 0.0;
    } else {
      const ItemScore s = score_item(r.item, r.transcript);
      rec.score = s.score;
      rec.abs_error = s.abs_error;
    }
    analysis.items.push_back(rec);
    analysis.task_metrics[task] = r.metric;
    analysis.matrix.set_model_meta(model, r.parameter_count_billions);

    auto& group = groups.try_emplace({model, task, strategy}, Group{r.metric, {}, {}}).first->second;
    group.scores.push_back(rec.score);
    if (rec.abs_error) group.errors.push_back(*rec.abs_error);
  }

  for (const auto& [key, group] : groups) {
    const auto& [model, task, strategy] = key;
    double score = 0.0;
    if (group.metric == Metric::kOneMinusMae && !group.errors.empty()) {
      score = one_minus_mae(group.errors, std::vector<double>(group.errors.size(), 0.0));
    } else {
      for (double s : group.scores) score += s;
      score /= static_cast<double>(group.scores.size());
    }
    analysis.matrix.set(model, task, strategy, std::clamp(score, 0.0, 1.0));
  }
  return analysis;
}

std::optional<StrategyRoles> resolve_roles(const ScoreMatrix& matrix) {
  const auto present = matrix.strategies();
  const std::set<std::string> have(present.begin(), present.end());
  for (const auto& roles : {StrategyRoles{}, StrategyRoles{"ZS", "COT", "AGIA-2C", "AG-2C"}}) {
    bool ok = true;
    for (const auto& s : roles.all()) ok = ok && have.count(s) > 0;
    if (!ok) continue;
    try {
      matrix.require(roles.all());
      return roles;
    } catch (const Error&) {
      return std::nullopt;
    }
  }
  return std::nullopt;
}

std::string delta_gamma_csv(const DeltaGammaReport& report) {
  std::string out = "model,delta_min,delta_max,gamma_min,gamma_max,delta_settings,gamma_settings\n";
  auto row = [&](const DeltaGammaRow& r) {
    out += csv_field(r.model) + "," + opt_pct(r.delta_min) + "," + opt_pct(r.delta_max) + "," + opt_pct(r.gamma_min) +
           "," + opt_pct(r.gamma_max) + "," + std::to_string(r.delta_count) + "," + std::to_string(r.gamma_count) +
           "\n";
  };
  for (const auto& r : report.rows) row(r);
  row(report.overall);
  return out;
}

std::string win_rates_json(const WinRates& w) {
  json j{{"settings", w.settings},
         {"wins_vs_all", w.wins_vs_all},
         {"wins_vs_cot", w.wins_vs_cot},
         {"vs_all_pct", format_fraction_pct(w.vs_all)},
         {"vs_cot_pct", format_fraction_pct(w.vs_cot)},
         {"both_variants_over_cot", w.both_over_cot},
         {"implicit_over_cot", w.implicit_over_cot},
         {"plain_over_cot", w.plain_over_cot}};
  return j.dump(2) + "\n";
}

std::vector<std::filesystem::path> write_reports(const std::filesystem::path& dir, const Analysis& analysis,
                                                 Conditioning conditioning) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  auto emit = [&](const std::string& name, const std::string& body) {
    write_file(dir / name, body);
    written.push_back(dir / name);
  };

  {
    std::string body;
    for (const auto& r : analysis.items) {
      json j{{"model", r.model},
             {"task", r.task},
             {"strategy", r.strategy},
             {"item_id", r.item_id},
             {"score", r.score},
             {"parse_status", std::string(to_string(r.parse_status))}};
      if (r.abs_error) j["abs_error"] = *r.abs_error;
      body += dump_line(j) + "\n";
    }
    emit("scores.jsonl", body);
  }
  {
    std::string body = "model,task,metric,strategy,score\n";
    for (const auto& s : analysis.matrix.settings()) {
      for (const auto& strategy : analysis.matrix.strategies()) {
        auto v = analysis.matrix.get(s.model, s.task, strategy);
        if (!v) continue;
        body += csv_field(s.model) + "," + csv_field(s.task) + "," +
                std::string(to_string(analysis.task_metrics.at(s.task))) + "," + strategy + "," + fixed6(*v) + "\n";
      }
    }
    emit("score_matrix.csv", body);
  }

  const auto roles = resolve_roles(analysis.matrix);
  if (!roles) return written;
  const auto& m = analysis.matrix;

  emit("win_rates.json", win_rates_json(compute_win_rates(m, *roles)));
  emit("delta_gamma.csv", delta_gamma_csv(compute_delta_gamma(m, conditioning, *roles)));

  {
    const auto strategies = roles->all();
    const auto settings = m.settings();
    std::string body = "strategy_a,strategy_b,mean_abs_difference,spearman\n";
    for (std::size_t a = 0; a < strategies.size(); ++a) {
      for (std::size_t b = a + 1; b < strategies.size(); ++b) {
        std::vector<double> col_a, col_b;
        for (const auto& s : settings) {
          col_a.push_back(m.at(s, strategies[a]));
          col_b.push_back(m.at(s, strategies[b]));
        }
        std::string rho;
        try {
          rho = fixed6(spearman(col_a, col_b));
        } catch (const Error&) {
          // Fewer than two settings or a constant column: undefined.
        }
        body += strategies[a] + "," + strategies[b] + "," +
                format_pct(mean_abs_difference(m, strategies[a], strategies[b])) + "," + rho + "\n";
      }
    }
    emit("method_pairs.csv", body);
  }

  const SizeReport sizes = bucket_by_size(m, *roles);
  {
    std::string body = "bucket,models";
    for (const auto& s : roles->all()) body += "," + s + "_mean";
    body += ",ag_gain_vs_cot,ag_implicit_gain_vs_cot,ag_gain_vs_zs,ag_implicit_gain_vs_zs\n";
    for (const auto& b : sizes.buckets) {
      std::string models;
      for (const auto& name : b.models) models += (models.empty() ? "" : ";") + name;
      body += std::string(to_string(b.bucket)) + "," + csv_field(models);
      for (const auto& s : roles->all()) body += "," + format_fraction_pct(b.mean_score.at(s));
      body += "," + format_pct(b.ag_gain_vs_cot) + "," + format_pct(b.ag_implicit_gain_vs_cot) + "," +
              format_pct(b.ag_gain_vs_zero_shot) + "," + format_pct(b.ag_implicit_gain_vs_zero_shot) + "\n";
    }
    emit("size_buckets.csv", body);
  }
  {
    std::string body = "bucket,strategy,mean_pct\n";
    for (const auto& b : sizes.buckets) {
      for (const auto& s : roles->all()) {
        body += std::string(to_string(b.bucket)) + "," + s + "," + format_fraction_pct(b.mean_score.at(s)) + "\n";
      }
    }
    emit("bucket_means.csv", body);
  }
  {
    std::string body = "model,parameter_count_billions,strategy,mean_pct\n";
    for (const auto& p : sizes.series) {
      char params[32];
      std::snprintf(params, sizeof params, "%g", p.parameter_count_billions);
      for (const auto& s : roles->all()) {
        body += csv_field(p.model) + "," + params + "," + s + "," + format_fraction_pct(p.mean_score.at(s)) + "\n";
      }
    }
    emit("model_size_series.csv", body);
  }
  return written;
}

}  // namespace argen
