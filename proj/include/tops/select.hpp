#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tops/types.hpp"

namespace tops {

// The thinking-optimal choice: among correct candidates, the minimum
// token_count; ties broken by lower effort rank, then lower sample_index.
// Absent when no candidate is correct. Candidates share one problem.
std::optional<VerifiedGeneration> select_shortest_correct(
    std::span<const VerifiedGeneration> candidates);

// Baseline: uniform choice over correct candidates, deterministic in
// (rng_seed, problem_id digest).
std::optional<VerifiedGeneration> select_random_correct(
    std::span<const VerifiedGeneration> candidates, uint64_t rng_seed);

struct BuildTopOptions {
  // When set, every record carries this system prompt (chat-template
  // compatibility); by default selected records carry none.
  std::optional<std::string> neutral_system_prompt;
  std::function<void(const std::string&)> log = nullptr;
};

// D_TOP: one record per selected problem without an effort prompt, plus the
// seed low-effort records with their system prompt removed. On an id
// collision the selection wins and the seed record is dropped (logged).
// Output sorted by problem_id; at most one record per problem.
std::vector<TrainingExample> build_top_dataset(
    const std::map<std::string, VerifiedGeneration>& selections,
    const std::map<std::string, Problem>& problems,
    std::span<const TrainingExample> seed_low_records, const BuildTopOptions& options = {});

struct ProblemSamples {
  Problem problem;
  std::vector<VerifiedGeneration> samples;
};

// Iterative SFT: per problem the shortest correct sample; problems with no
// correct sample emit nothing.
std::vector<TrainingExample> build_iter_sft(std::span<const ProblemSamples> samples_by_problem,
                                            const BuildTopOptions& options = {});

// Preference pairs per problem holding both a correct and an incorrect
// sample: chosen = shortest correct; rejected = longest incorrect
// (longest_wrong), plus a second pair with the shortest incorrect when it is
// strictly shorter than chosen (shorter_wrong). When both rules pick the
// same response only the longest_wrong pair is emitted.
std::vector<PreferencePair> build_preference_pairs(
    std::span<const ProblemSamples> samples_by_problem);

}  // namespace tops
