#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "argen/backends.hpp"
#include "argen/core.hpp"
#include "argen/datasets.hpp"
#include "argen/evalkit.hpp"

namespace argen {

struct RunConfig {
  std::vector<BackendConfig> backends;
  std::vector<DatasetSpec> datasets;
  std::vector<StrategyKind> strategies;
  std::optional<BackendConfig> judge;
  std::filesystem::path cache_dir;
  std::filesystem::path output_dir;
  std::filesystem::path templates_dir;  // empty: built-in templates
  int max_parallel_global = 4;
  bool final_answer_delimiter = true;
  Conditioning conditioning = Conditioning::kStrictBoth;
  std::size_t candidate_count = 4;

  // Throws kConfigError on the first violated invariant.
  void validate() const;
};

// Parses YAML text. Relative paths resolve against `base_dir`.
RunConfig parse_config(const std::string& yaml_text, const std::filesystem::path& base_dir);
RunConfig load_config(const std::filesystem::path& path);

}  // namespace argen
