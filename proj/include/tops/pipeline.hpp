#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tops/config.hpp"
#include "tops/types.hpp"

namespace tops {

// Internal invariant violation; maps to exit code 4.
class InvariantViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

struct StageReport {
  std::filesystem::path primary_output;
  std::vector<std::filesystem::path> outputs;
  size_t records = 0;
  size_t errors = 0;
};

// generate: sample (and grade) n responses per problem under one effort (or
// none), resumable through the response cache.
struct GenerateOptions {
  std::filesystem::path problems_file;
  std::optional<Effort> effort;
  std::optional<int> n_samples;         // overrides config.sampling.n_samples
  std::optional<long long> base_seed;   // overrides config.sampling.base_seed
  bool retry_errors = false;
  std::optional<std::filesystem::path> output;
};
StageReport cmd_generate(const PipelineConfig& config, const GenerateOptions& options);

// curate-seed: all-correct filter, length reorder, pairwise gap gate, seed
// SFT dataset + stats CSV.
struct CurateSeedOptions {
  std::filesystem::path problems_file;
  std::filesystem::path low_file;
  std::filesystem::path medium_file;
  std::filesystem::path high_file;
  std::optional<std::filesystem::path> dataset_output;
  std::optional<std::filesystem::path> stats_output;
};
StageReport cmd_curate_seed(const PipelineConfig& config, const CurateSeedOptions& options);

// select: thinking-optimal (or random-baseline) SFT dataset, optionally
// merging the seed low-effort records.
enum class SelectMode { shortest, random };
struct SelectOptions {
  std::filesystem::path problems_file;
  std::vector<std::filesystem::path> generations_files;
  std::optional<std::filesystem::path> seed_dataset_file;
  SelectMode mode = SelectMode::shortest;
  uint64_t rng_seed = 0;
  std::optional<std::filesystem::path> output;
};
StageReport cmd_select(const PipelineConfig& config, const SelectOptions& options);

// pairs: iterative SFT dataset + DPO preference pairs from k-sample batches.
struct PairsOptions {
  std::filesystem::path problems_file;
  std::filesystem::path samples_file;
  std::optional<std::filesystem::path> sft_output;
  std::optional<std::filesystem::path> dpo_output;
};
StageReport cmd_pairs(const PipelineConfig& config, const PairsOptions& options);

// analyze: accuracy over seeds, distinct-answer counts, judge-based round
// forensics, or length stats, depending on which inputs are given.
struct AnalyzeOptions {
  std::optional<std::string> benchmark;                // accuracy report label
  std::vector<std::filesystem::path> accuracy_runs;    // one graded file per seed
  std::optional<std::filesystem::path> distinct_file;  // k-sample graded file
  std::optional<std::filesystem::path> rounds_file;    // graded file to judge
  std::optional<std::filesystem::path> problems_file;  // required for --rounds
  std::optional<size_t> rounds_subsample;
  uint64_t subsample_seed = 0;
  bool micro_ratio = false;
  std::optional<std::filesystem::path> lengths_file;  // graded file for length stats
  std::optional<std::filesystem::path> output;
};
StageReport cmd_analyze(const PipelineConfig& config, const AnalyzeOptions& options);

// estimate-tokens: hidden-trace estimates from provider usage records.
struct EstimateOptions {
  std::filesystem::path usage_file;
  std::optional<std::filesystem::path> output;
};
StageReport cmd_estimate_tokens(const PipelineConfig& config, const EstimateOptions& options);

}  // namespace tops
