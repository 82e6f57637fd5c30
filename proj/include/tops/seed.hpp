#pragma once

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "tops/effort.hpp"
#include "tops/types.hpp"

namespace tops {

// One problem with exactly one graded response per prompt-time effort level,
// indexed by effort rank.
struct EffortTriple {
  Problem problem;
  std::array<VerifiedGeneration, 3> responses;
};

// A triple that survived the gates: responses relabeled by length ascending
// (low = shortest), every pairwise token gap strictly greater than
// gap_tokens, all three correct.
struct OrderedTriple {
  Problem problem;
  std::array<VerifiedGeneration, 3> by_assigned_effort;
  long long gap_tokens = 0;
};

// Keeps triples whose three responses are all correct; stable problem_id order.
std::vector<EffortTriple> filter_all_correct(std::vector<EffortTriple> triples);

// Sorts the responses by token_count ascending, reassigns the effort tags by
// length (the prompt-time tags are discarded; raw tag and length disagree
// often enough that relabeling is required), and keeps the triple only when
// every pairwise difference strictly exceeds gap_tokens. Duplicate token
// counts can never satisfy the strict gap.
std::optional<OrderedTriple> reorder_and_gap_filter(const EffortTriple& triple,
                                                    long long gap_tokens = 300);

// Three SFT records per triple: system = assigned-effort prompt, user =
// problem statement, assistant = response text. Ordered by problem_id then
// effort rank.
std::vector<TrainingExample> build_seed_dataset(std::span<const OrderedTriple> ordered,
                                                const EffortRegistry& prompts);

struct SeedStats {
  size_t problems = 0;
  std::array<double, 3> mean_tokens = {0.0, 0.0, 0.0};  // by assigned effort rank
};

SeedStats seed_stats(std::span<const OrderedTriple> ordered);

}  // namespace tops
