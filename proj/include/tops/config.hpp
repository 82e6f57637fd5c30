#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "tops/client.hpp"
#include "tops/effort.hpp"

namespace tops {

// Pipeline-wide configuration. Source precedence, lowest to highest:
// config-file values, environment variables (TOPS_API_KEY, TOPS_CACHE_DIR),
// command-line flags.
struct PipelineConfig {
  EndpointConfig generation;
  EndpointConfig judge;
  double judge_temperature = 0.0;
  std::filesystem::path reference_tokenizer;
  long long gap_tokens = 300;
  SamplingParams sampling;
  std::filesystem::path cache_dir = "cache";
  std::filesystem::path out_dir = "out";
  std::vector<long long> seeds = {0, 1, 2, 3, 4};
  std::optional<std::string> neutral_system_prompt;
  bool judge_rescue = false;  // opt-in per stage
  EffortRegistry prompts;
};

// Flat key-value file with dotted section keys ("generation.base_url = ...",
// '#' comments). Prompt overrides (prompts.low/medium/high) name files whose
// contents replace the built-in prompts verbatim.
PipelineConfig load_config(const std::filesystem::path& path);

// Environment overrides applied by load_config; exposed for the CLI layer.
void apply_env_overrides(PipelineConfig& config);

}  // namespace tops
