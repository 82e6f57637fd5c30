#include "tops/select.hpp"

#include <algorithm>

#include "tops/sha256.hpp"

namespace tops {

namespace {

int rank_or_max(const std::optional<Effort>& effort) {
  return effort ? effort_rank(*effort) : 3;
}

// (token_count, effort rank, sample_index) lexicographic order
bool shorter(const VerifiedGeneration& a, const VerifiedGeneration& b) {
  if (a.token_count != b.token_count) return a.token_count < b.token_count;
  int ra = rank_or_max(a.generation.effort), rb = rank_or_max(b.generation.effort);
  if (ra != rb) return ra < rb;
  return a.generation.sample_index < b.generation.sample_index;
}

uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::optional<VerifiedGeneration> select_shortest_correct(
    std::span<const VerifiedGeneration> candidates) {
  const VerifiedGeneration* best = nullptr;
  for (const VerifiedGeneration& c : candidates) {
    if (!c.is_correct) continue;
    if (best == nullptr || shorter(c, *best)) best = &c;
  }
  if (best == nullptr) return std::nullopt;
  return *best;
}

std::optional<VerifiedGeneration> select_random_correct(
    std::span<const VerifiedGeneration> candidates, uint64_t rng_seed) {
  std::vector<const VerifiedGeneration*> correct;
  for (const VerifiedGeneration& c : candidates) {
    if (c.is_correct) correct.push_back(&c);
  }
  if (correct.empty()) return std::nullopt;

  // stable cross-platform choice: splitmix over (seed, problem_id digest)
  const std::string& id = correct.front()->generation.problem_id;
  std::string digest = sha256_hex(id);
  uint64_t id_bits = 0;
  for (int i = 0; i < 16; ++i) {
    char c = digest[size_t(i)];
    id_bits = id_bits * 16 + uint64_t(c <= '9' ? c - '0' : c - 'a' + 10);
  }
  uint64_t draw = splitmix64(rng_seed ^ id_bits);
  return *correct[draw % correct.size()];
}

std::vector<TrainingExample> build_top_dataset(
    const std::map<std::string, VerifiedGeneration>& selections,
    const std::map<std::string, Problem>& problems,
    std::span<const TrainingExample> seed_low_records, const BuildTopOptions& options) {
  std::vector<TrainingExample> out;
  out.reserve(selections.size() + seed_low_records.size());

  for (const auto& [problem_id, response] : selections) {
    auto it = problems.find(problem_id);
    if (it == problems.end()) {
      throw std::invalid_argument("selection references unknown problem: " + problem_id);
    }
    TrainingExample ex;
    ex.system = options.neutral_system_prompt;
    ex.user = it->second.statement;
    ex.assistant = response.generation.text;
    std::string effort = response.generation.effort
                             ? std::string(effort_name(*response.generation.effort))
                             : std::string("iter");
    ex.provenance = {problem_id, effort, response.generation.sample_index, response.token_count};
    out.push_back(std::move(ex));
  }

  for (const TrainingExample& seed : seed_low_records) {
    if (selections.count(seed.provenance.problem_id) > 0) {
      if (options.log) {
        options.log("duplicate problem id in seed merge, keeping selection: " +
                    seed.provenance.problem_id);
      }
      continue;
    }
    TrainingExample ex = seed;
    ex.system = options.neutral_system_prompt;
    out.push_back(std::move(ex));
  }

  std::sort(out.begin(), out.end(), [](const TrainingExample& a, const TrainingExample& b) {
    return a.provenance.problem_id < b.provenance.problem_id;
  });
  return out;
}

std::vector<TrainingExample> build_iter_sft(std::span<const ProblemSamples> samples_by_problem,
                                            const BuildTopOptions& options) {
  std::vector<TrainingExample> out;
  for (const ProblemSamples& group : samples_by_problem) {
    auto chosen = select_shortest_correct(group.samples);
    if (!chosen) continue;
    TrainingExample ex;
    ex.system = options.neutral_system_prompt;
    ex.user = group.problem.statement;
    ex.assistant = chosen->generation.text;
    ex.provenance = {group.problem.id, "iter", chosen->generation.sample_index,
                     chosen->token_count};
    out.push_back(std::move(ex));
  }
  std::sort(out.begin(), out.end(), [](const TrainingExample& a, const TrainingExample& b) {
    return a.provenance.problem_id < b.provenance.problem_id;
  });
  return out;
}

std::vector<PreferencePair> build_preference_pairs(
    std::span<const ProblemSamples> samples_by_problem) {
  std::vector<PreferencePair> out;
  for (const ProblemSamples& group : samples_by_problem) {
    auto chosen = select_shortest_correct(group.samples);
    if (!chosen) continue;

    const VerifiedGeneration* longest_wrong = nullptr;
    const VerifiedGeneration* shortest_wrong = nullptr;
    for (const VerifiedGeneration& s : group.samples) {
      if (s.is_correct) continue;
      if (longest_wrong == nullptr || shorter(*longest_wrong, s)) longest_wrong = &s;
      if (shortest_wrong == nullptr || shorter(s, *shortest_wrong)) shortest_wrong = &s;
    }
    if (longest_wrong == nullptr) continue;

    auto make_pair = [&](const VerifiedGeneration& rejected, RejectReason reason) {
      PreferencePair pair;
      pair.problem_id = group.problem.id;
      pair.user = group.problem.statement;
      pair.chosen = chosen->generation.text;
      pair.rejected = rejected.generation.text;
      pair.reason = reason;
      pair.chosen_tokens = chosen->token_count;
      pair.rejected_tokens = rejected.token_count;
      return pair;
    };

    out.push_back(make_pair(*longest_wrong, RejectReason::longest_wrong));
    bool same_record = shortest_wrong == longest_wrong;
    if (!same_record && shortest_wrong->token_count < chosen->token_count) {
      out.push_back(make_pair(*shortest_wrong, RejectReason::shorter_wrong));
    }
  }
  std::sort(out.begin(), out.end(), [](const PreferencePair& a, const PreferencePair& b) {
    if (a.problem_id != b.problem_id) return a.problem_id < b.problem_id;
    return a.reason < b.reason;
  });
  return out;
}

}  // namespace tops
