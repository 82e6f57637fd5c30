#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tops/client.hpp"
#include "tops/config.hpp"
#include "tops/jsonl.hpp"
#include "tops/pipeline.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitSchema = 2;
constexpr int kExitEndpoint = 3;
constexpr int kExitInvariant = 4;

std::optional<tops::Effort> parse_effort_flag(const std::string& value) {
  if (value.empty()) return std::nullopt;
  auto effort = tops::effort_from_name(value);
  if (!effort) throw CLI::ValidationError("--effort", "must be low, medium, or high");
  return effort;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Thinking-optimal scaling data pipeline"};
  app.require_subcommand(1);

  std::string config_path;
  app.add_option("--config", config_path, "pipeline config file")->required();

  // generate
  auto* generate = app.add_subcommand("generate", "sample and grade responses");
  std::string gen_problems, gen_effort, gen_out;
  int gen_n = -1;
  long long gen_base_seed = -1;
  bool gen_retry_errors = false;
  generate->add_option("--problems", gen_problems, "problems JSONL")->required();
  generate->add_option("--effort", gen_effort, "low|medium|high (omit for effort-free)");
  generate->add_option("--n", gen_n, "samples per problem (overrides config)");
  generate->add_option("--base-seed", gen_base_seed, "request seed base (overrides config)");
  generate->add_flag("--retry-errors", gen_retry_errors, "refetch cached error records");
  generate->add_option("--out", gen_out, "output JSONL path");

  // curate-seed
  auto* curate = app.add_subcommand("curate-seed", "build the seed SFT dataset");
  std::string cs_problems, cs_low, cs_medium, cs_high, cs_out, cs_stats;
  curate->add_option("--problems", cs_problems)->required();
  curate->add_option("--low", cs_low, "graded generations under the low prompt")->required();
  curate->add_option("--medium", cs_medium)->required();
  curate->add_option("--high", cs_high)->required();
  curate->add_option("--out", cs_out, "seed dataset JSONL path");
  curate->add_option("--stats", cs_stats, "stats CSV path");

  // select
  auto* select = app.add_subcommand("select", "build the thinking-optimal SFT dataset");
  std::string sel_problems, sel_seed_dataset, sel_mode = "shortest", sel_out;
  std::vector<std::string> sel_generations;
  uint64_t sel_rng_seed = 0;
  select->add_option("--problems", sel_problems)->required();
  select->add_option("--generations", sel_generations, "graded JSONL, one per effort")
      ->required()
      ->expected(-1);
  select->add_option("--seed-dataset", sel_seed_dataset, "seed dataset for the low-effort merge");
  select->add_option("--mode", sel_mode)->check(CLI::IsMember({"shortest", "random"}));
  select->add_option("--rng-seed", sel_rng_seed, "seed for --mode random");
  select->add_option("--out", sel_out);

  // pairs
  auto* pairs = app.add_subcommand("pairs", "build iterative SFT and DPO datasets");
  std::string pr_problems, pr_samples, pr_sft_out, pr_dpo_out;
  pairs->add_option("--problems", pr_problems)->required();
  pairs->add_option("--samples", pr_samples, "graded k-sample JSONL")->required();
  pairs->add_option("--sft-out", pr_sft_out);
  pairs->add_option("--dpo-out", pr_dpo_out);

  // analyze
  auto* analyze = app.add_subcommand("analyze", "reports: accuracy, distinct answers, rounds");
  std::vector<std::string> an_runs;
  std::string an_benchmark, an_distinct, an_rounds, an_problems, an_lengths, an_out;
  uint64_t an_subsample_seed = 0;
  size_t an_subsample = 0;
  bool an_micro = false;
  analyze->add_option("--run", an_runs, "graded JSONL, one per seed (accuracy report)");
  analyze->add_option("--benchmark", an_benchmark, "accuracy report label");
  analyze->add_option("--distinct", an_distinct, "k-sample graded JSONL");
  analyze->add_option("--rounds", an_rounds, "graded JSONL to send to the judge");
  analyze->add_option("--problems", an_problems, "problems JSONL (for --rounds)");
  analyze->add_option("--subsample", an_subsample, "judge only N sampled responses");
  analyze->add_option("--subsample-seed", an_subsample_seed, "seed for --subsample")
      ->needs(analyze->get_option("--subsample"));
  analyze->add_flag("--micro-ratio", an_micro, "micro-average the wrong-round ratio");
  analyze->add_option("--lengths", an_lengths, "graded JSONL for per-effort length stats");
  analyze->add_option("--out", an_out, "report CSV path");

  // estimate-tokens
  auto* estimate = app.add_subcommand("estimate-tokens", "hidden-trace token estimates");
  std::string et_usage, et_out;
  estimate->add_option("--usage", et_usage, "usage records JSONL")->required();
  estimate->add_option("--out", et_out);

  CLI11_PARSE(app, argc, argv);

  try {
    tops::PipelineConfig config = tops::load_config(config_path);

    if (generate->parsed()) {
      tops::GenerateOptions options;
      options.problems_file = gen_problems;
      options.effort = parse_effort_flag(gen_effort);
      if (gen_n > 0) options.n_samples = gen_n;
      if (gen_base_seed >= 0) options.base_seed = gen_base_seed;
      options.retry_errors = gen_retry_errors;
      if (!gen_out.empty()) options.output = gen_out;
      auto report = tops::cmd_generate(config, options);
      std::cout << "generate: " << report.records << " records (" << report.errors
                << " errors) -> " << report.primary_output.string() << '\n';
    } else if (curate->parsed()) {
      tops::CurateSeedOptions options;
      options.problems_file = cs_problems;
      options.low_file = cs_low;
      options.medium_file = cs_medium;
      options.high_file = cs_high;
      if (!cs_out.empty()) options.dataset_output = cs_out;
      if (!cs_stats.empty()) options.stats_output = cs_stats;
      auto report = tops::cmd_curate_seed(config, options);
      std::cout << "curate-seed: " << report.records << " records -> "
                << report.primary_output.string() << '\n';
    } else if (select->parsed()) {
      tops::SelectOptions options;
      options.problems_file = sel_problems;
      for (const std::string& f : sel_generations) options.generations_files.emplace_back(f);
      if (!sel_seed_dataset.empty()) options.seed_dataset_file = sel_seed_dataset;
      options.mode = sel_mode == "random" ? tops::SelectMode::random : tops::SelectMode::shortest;
      options.rng_seed = sel_rng_seed;
      if (!sel_out.empty()) options.output = sel_out;
      auto report = tops::cmd_select(config, options);
      std::cout << "select: " << report.records << " records -> "
                << report.primary_output.string() << '\n';
    } else if (pairs->parsed()) {
      tops::PairsOptions options;
      options.problems_file = pr_problems;
      options.samples_file = pr_samples;
      if (!pr_sft_out.empty()) options.sft_output = pr_sft_out;
      if (!pr_dpo_out.empty()) options.dpo_output = pr_dpo_out;
      auto report = tops::cmd_pairs(config, options);
      std::cout << "pairs: " << report.records << " records -> "
                << report.primary_output.string() << '\n';
    } else if (analyze->parsed()) {
      tops::AnalyzeOptions options;
      for (const std::string& f : an_runs) options.accuracy_runs.emplace_back(f);
      if (!an_benchmark.empty()) options.benchmark = an_benchmark;
      if (!an_distinct.empty()) options.distinct_file = an_distinct;
      if (!an_rounds.empty()) options.rounds_file = an_rounds;
      if (!an_problems.empty()) options.problems_file = an_problems;
      if (an_subsample > 0) options.rounds_subsample = an_subsample;
      options.subsample_seed = an_subsample_seed;
      options.micro_ratio = an_micro;
      if (!an_lengths.empty()) options.lengths_file = an_lengths;
      if (!an_out.empty()) options.output = an_out;
      auto report = tops::cmd_analyze(config, options);
      std::cout << "analyze: " << report.records << " records -> "
                << report.primary_output.string() << '\n';
    } else if (estimate->parsed()) {
      tops::EstimateOptions options;
      options.usage_file = et_usage;
      if (!et_out.empty()) options.output = et_out;
      auto report = tops::cmd_estimate_tokens(config, options);
      std::cout << "estimate-tokens: " << report.records << " rows (" << report.errors
                << " excluded) -> " << report.primary_output.string() << '\n';
    }
  } catch (const tops::SchemaError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitSchema;
  } catch (const tops::EndpointExhausted& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitEndpoint;
  } catch (const tops::InvariantViolation& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kExitInvariant;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitSchema;
  }
  return kExitOk;
}
