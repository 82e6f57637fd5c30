#pragma once

#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "tops/types.hpp"

namespace tops {

// Usage numbers for one provider response with a hidden reasoning trace:
// the summary re-tokenized by the reference tokenizer, and the provider's
// own reasoning/completion token counts.
struct TokenEstimateInputs {
  long long summary_tokens_reference = 0;
  long long reasoning_tokens_provider = 0;
  long long completion_tokens_provider = 0;
};

// Estimation requires completion > reasoning > 0 and summary > 0.
class DegenerateUsage : public std::runtime_error {
 public:
  explicit DegenerateUsage(std::string field)
      : std::runtime_error("degenerate usage field: " + field), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

// summary * reasoning / (completion - reasoning); the hidden-trace length
// under the reference tokenizer, assuming summary and hidden text share a
// tokens-per-provider-token ratio.
double estimate_hidden_cot_tokens(const TokenEstimateInputs& inputs);

struct LengthStatsRow {
  std::string group;
  double mean_tokens = 0.0;
  double std_tokens = 0.0;  // population standard deviation
  size_t count = 0;
};

// Per-group mean/std of token_count. Rows come out sorted by group name.
std::vector<LengthStatsRow> length_stats(
    std::span<const VerifiedGeneration> records,
    const std::function<std::string(const VerifiedGeneration&)>& group_key);

}  // namespace tops
