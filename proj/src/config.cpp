#include "argen/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

namespace argen {

namespace {

[[noreturn]] void config_error(const std::string& what) { throw Error(ErrorCode::kConfigError, what); }

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() ? path : (base / path).lexically_normal();
}

template <typename T>
T scalar(const YAML::Node& node, const std::string& where) {
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    config_error("bad value for '" + where + "'");
  }
}

BackendConfig parse_backend(const YAML::Node& node, const std::string& where) {
  if (!node.IsMap()) config_error(where + " must be a mapping");
  BackendConfig b;
  if (node["preset"]) {
    const auto name = scalar<std::string>(node["preset"], where + ".preset");
    auto preset = find_preset(name);
    if (!preset) config_error(where + ": unknown preset '" + name + "'");
    b = *preset;
  }
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    const auto& v = kv.second;
    const auto at = where + "." + key;
    if (key == "preset") continue;
    if (key == "name") b.name = scalar<std::string>(v, at);
    else if (key == "model") b.model = scalar<std::string>(v, at);
    else if (key == "endpoint_url") b.endpoint_url = scalar<std::string>(v, at);
    else if (key == "api_key_env") b.api_key_env = scalar<std::string>(v, at);
    else if (key == "parameter_count_billions") b.parameter_count_billions = scalar<double>(v, at);
    else if (key == "temperature") b.temperature = scalar<double>(v, at);
    else if (key == "seed") b.seed = scalar<std::int64_t>(v, at);
    else if (key == "send_seed") b.send_seed = scalar<bool>(v, at);
    else if (key == "max_parallel") b.max_parallel = scalar<int>(v, at);
    else if (key == "timeout_ms") b.timeout_ms = scalar<int>(v, at);
    else if (key == "max_tokens") b.max_tokens = scalar<int>(v, at);
    else if (key == "max_attempts") b.retry.max_attempts = scalar<int>(v, at);
    else if (key == "base_backoff_ms") b.retry.base_backoff_ms = scalar<int>(v, at);
    else config_error("unknown key '" + at + "'");
  }
  return b;
}

DatasetSpec parse_dataset(const YAML::Node& node, const std::string& where, const std::filesystem::path& base) {
  if (!node.IsMap()) config_error(where + " must be a mapping");
  DatasetSpec d;
  bool have_source = false;
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    const auto& v = kv.second;
    const auto at = where + "." + key;
    if (key == "name") {
      d.name = scalar<std::string>(v, at);
    } else if (key == "kind") {
      try {
        d.kind = parse_task_kind(scalar<std::string>(v, at));
      } catch (const Error& e) {
        config_error(at + ": " + e.what());
      }
    } else if (key == "source") {
      d.source_path = resolve(base, scalar<std::string>(v, at));
      have_source = true;
    } else if (key == "metric") {
      d.metric = parse_metric(scalar<std::string>(v, at));
    } else if (key == "sample") {
      SampleSpec s;
      if (v["fraction"]) s.fraction = scalar<double>(v["fraction"], at + ".fraction");
      if (v["count"]) s.count = scalar<std::size_t>(v["count"], at + ".count");
      if (v["seed"]) s.seed = scalar<std::uint64_t>(v["seed"], at + ".seed");
      d.sample = s;
    } else {
      config_error("unknown key '" + at + "'");
    }
  }
  if (!have_source) config_error(where + ": missing source");
  return d;
}

}  // namespace

void RunConfig::validate() const {
  if (backends.empty()) config_error("no backends configured");
  if (datasets.empty()) config_error("no datasets configured");
  if (strategies.empty()) config_error("no strategies configured");
  if (max_parallel_global < 1) config_error("max_parallel_global must be at least 1");
  if (candidate_count < 2 || candidate_count > kMaxCandidates) config_error("candidate_count must lie in [2, 26]");

  std::set<std::string> names;
  for (const auto& b : backends) {
    b.validate();
    if (!names.insert(b.name).second) config_error("duplicate backend name '" + b.name + "'");
  }
  names.clear();
  bool needs_judge = false;
  for (const auto& d : datasets) {
    d.validate();
    if (!names.insert(d.name).second) config_error("duplicate dataset name '" + d.name + "'");
    needs_judge = needs_judge || d.metric == Metric::kJudgeWinRate;
  }
  std::set<std::string> labels;
  for (const auto& s : strategies) {
    if (!labels.insert(s.label()).second) config_error("duplicate strategy '" + s.label() + "'");
  }
  if (needs_judge && !judge) config_error("a judge-win-rate dataset is configured but no judge backend");
  if (!needs_judge && judge) config_error("a judge backend is configured but no dataset uses judge-win-rate");
  if (judge) judge->validate();
}

RunConfig parse_config(const std::string& yaml_text, const std::filesystem::path& base_dir) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::Exception& e) {
    config_error(std::string("invalid YAML: ") + e.what());
  }
  if (!root.IsMap()) config_error("config must be a mapping");

  RunConfig c;
  c.cache_dir = base_dir / "cache";
  c.output_dir = base_dir / "out";
  for (const auto& kv : root) {
    const auto key = kv.first.as<std::string>();
    const auto& v = kv.second;
    if (key == "backends") {
      if (!v.IsSequence()) config_error("backends must be a list");
      for (std::size_t i = 0; i < v.size(); ++i) c.backends.push_back(parse_backend(v[i], "backends[" + std::to_string(i) + "]"));
    } else if (key == "datasets") {
      if (!v.IsSequence()) config_error("datasets must be a list");
      for (std::size_t i = 0; i < v.size(); ++i) {
        c.datasets.push_back(parse_dataset(v[i], "datasets[" + std::to_string(i) + "]", base_dir));
      }
    } else if (key == "strategies") {
      if (!v.IsSequence()) config_error("strategies must be a list");
      for (const auto& s : v) {
        try {
          c.strategies.push_back(parse_strategy(scalar<std::string>(s, "strategies")));
        } catch (const Error& e) {
          config_error(std::string("strategies: ") + e.what());
        }
      }
    } else if (key == "judge") {
      if (!v.IsNull()) c.judge = parse_backend(v, "judge");
    } else if (key == "cache_dir") {
      c.cache_dir = resolve(base_dir, scalar<std::string>(v, key));
    } else if (key == "output_dir") {
      c.output_dir = resolve(base_dir, scalar<std::string>(v, key));
    } else if (key == "templates_dir") {
      c.templates_dir = resolve(base_dir, scalar<std::string>(v, key));
    } else if (key == "max_parallel_global") {
      c.max_parallel_global = scalar<int>(v, key);
    } else if (key == "final_answer_delimiter") {
      c.final_answer_delimiter = scalar<bool>(v, key);
    } else if (key == "conditioning") {
      try {
        c.conditioning = parse_conditioning(scalar<std::string>(v, key));
      } catch (const Error& e) {
        config_error(e.what());
      }
    } else if (key == "candidate_count") {
      c.candidate_count = scalar<std::size_t>(v, key);
    } else {
      config_error("unknown key '" + key + "'");
    }
  }
  c.validate();
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) config_error("cannot read config " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str(), std::filesystem::absolute(path).parent_path());
}

}  // namespace argen
