#include "tops/seed.hpp"

#include <algorithm>

namespace tops {

std::vector<EffortTriple> filter_all_correct(std::vector<EffortTriple> triples) {
  std::vector<EffortTriple> kept;
  kept.reserve(triples.size());
  for (EffortTriple& t : triples) {
    bool all_correct = std::all_of(t.responses.begin(), t.responses.end(),
                                   [](const VerifiedGeneration& r) { return r.is_correct; });
    if (all_correct) kept.push_back(std::move(t));
  }
  std::stable_sort(kept.begin(), kept.end(), [](const EffortTriple& a, const EffortTriple& b) {
    return a.problem.id < b.problem.id;
  });
  return kept;
}

std::optional<OrderedTriple> reorder_and_gap_filter(const EffortTriple& triple,
                                                    long long gap_tokens) {
  std::array<VerifiedGeneration, 3> sorted = triple.responses;
  std::sort(sorted.begin(), sorted.end(),
            [](const VerifiedGeneration& a, const VerifiedGeneration& b) {
              return a.token_count < b.token_count;
            });
  for (int i = 0; i < 3; ++i) {
    for (int j = i + 1; j < 3; ++j) {
      if (sorted[j].token_count - sorted[i].token_count <= gap_tokens) return std::nullopt;
    }
  }
  OrderedTriple out;
  out.problem = triple.problem;
  out.gap_tokens = gap_tokens;
  for (int rank = 0; rank < 3; ++rank) {
    sorted[rank].generation.effort = kAllEfforts[rank];
    out.by_assigned_effort[rank] = std::move(sorted[rank]);
  }
  return out;
}

std::vector<TrainingExample> build_seed_dataset(std::span<const OrderedTriple> ordered,
                                                const EffortRegistry& prompts) {
  std::vector<TrainingExample> records;
  records.reserve(ordered.size() * 3);

  std::vector<const OrderedTriple*> sorted;
  sorted.reserve(ordered.size());
  for (const OrderedTriple& t : ordered) sorted.push_back(&t);
  std::sort(sorted.begin(), sorted.end(), [](const OrderedTriple* a, const OrderedTriple* b) {
    return a->problem.id < b->problem.id;
  });

  for (const OrderedTriple* t : sorted) {
    for (Effort effort : kAllEfforts) {
      const VerifiedGeneration& response = t->by_assigned_effort[effort_rank(effort)];
      TrainingExample ex;
      ex.system = prompts.system_prompt_for(effort);
      ex.user = t->problem.statement;
      ex.assistant = response.generation.text;
      ex.provenance = {t->problem.id, std::string(effort_name(effort)),
                       response.generation.sample_index, response.token_count};
      records.push_back(std::move(ex));
    }
  }
  return records;
}

SeedStats seed_stats(std::span<const OrderedTriple> ordered) {
  SeedStats stats;
  stats.problems = ordered.size();
  if (ordered.empty()) return stats;
  for (const OrderedTriple& t : ordered) {
    for (int rank = 0; rank < 3; ++rank) {
      stats.mean_tokens[rank] += static_cast<double>(t.by_assigned_effort[rank].token_count);
    }
  }
  for (double& m : stats.mean_tokens) m /= static_cast<double>(ordered.size());
  return stats;
}

}  // namespace tops
