#pragma once

#include <map>
#include <optional>
#include <string>

#include "tops/effort.hpp"

namespace tops {

// A task with a gold answer; the unit of the seed and self-improvement pools.
struct Problem {
  std::string id;
  std::string statement;
  std::string gold_answer;
  std::string source;
  std::map<std::string, std::string> tags;
};

// Stable fallback id when the ingested data carries none: hex digest of
// (source + statement), so re-ingestion is idempotent.
std::string derive_problem_id(const std::string& source, const std::string& statement);

enum class FinishReason { stop, length, error };

std::string_view finish_reason_name(FinishReason r);
std::optional<FinishReason> finish_reason_from_name(std::string_view name);

// One sampled response. effort is absent for effort-free models (the
// iterative stage). finish_reason=length marks a truncated-but-kept response.
struct Generation {
  std::string problem_id;
  std::optional<Effort> effort;
  int sample_index = 0;
  long long seed = 0;
  double temperature = 1.0;
  int max_tokens = 16384;
  std::string text;
  FinishReason finish_reason = FinishReason::stop;
  std::optional<long long> provider_reasoning_tokens;
  std::optional<long long> provider_completion_tokens;
};

// A generation with its grading verdict and reference-tokenizer length.
struct VerifiedGeneration {
  Generation generation;
  std::optional<std::string> extracted_answer;
  bool is_correct = false;
  long long token_count = 0;
};

// One SFT record. provenance.effort is "low"/"medium"/"high" or "iter".
struct Provenance {
  std::string problem_id;
  std::string effort;
  int sample_index = 0;
  long long token_count = 0;
};

struct TrainingExample {
  std::optional<std::string> system;
  std::string user;
  std::string assistant;
  Provenance provenance;
};

enum class RejectReason { longest_wrong, shorter_wrong };

std::string_view reject_reason_name(RejectReason r);

// One DPO record: chosen is graded correct, rejected graded incorrect.
struct PreferencePair {
  std::string problem_id;  // ordering key only, not serialized
  std::string user;
  std::string chosen;
  std::string rejected;
  RejectReason reason = RejectReason::longest_wrong;
  long long chosen_tokens = 0;
  long long rejected_tokens = 0;
};

}  // namespace tops
