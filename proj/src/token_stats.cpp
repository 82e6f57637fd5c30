#include "tops/token_stats.hpp"

#include <cmath>
#include <map>

namespace tops {

double estimate_hidden_cot_tokens(const TokenEstimateInputs& inputs) {
  if (inputs.summary_tokens_reference <= 0) throw DegenerateUsage("summary_tokens_reference");
  if (inputs.reasoning_tokens_provider <= 0) throw DegenerateUsage("reasoning_tokens_provider");
  if (inputs.completion_tokens_provider <= inputs.reasoning_tokens_provider) {
    throw DegenerateUsage("completion_tokens_provider");
  }
  return static_cast<double>(inputs.summary_tokens_reference) *
         static_cast<double>(inputs.reasoning_tokens_provider) /
         static_cast<double>(inputs.completion_tokens_provider - inputs.reasoning_tokens_provider);
}

std::vector<LengthStatsRow> length_stats(
    std::span<const VerifiedGeneration> records,
    const std::function<std::string(const VerifiedGeneration&)>& group_key) {
  if (records.empty()) throw std::invalid_argument("length_stats requires at least one record");

  std::map<std::string, std::vector<long long>> groups;
  for (const VerifiedGeneration& r : records) groups[group_key(r)].push_back(r.token_count);

  std::vector<LengthStatsRow> rows;
  rows.reserve(groups.size());
  for (const auto& [name, counts] : groups) {
    double mean = 0.0;
    for (long long c : counts) mean += static_cast<double>(c);
    mean /= static_cast<double>(counts.size());
    double var = 0.0;
    for (long long c : counts) {
      double d = static_cast<double>(c) - mean;
      var += d * d;
    }
    var /= static_cast<double>(counts.size());
    rows.push_back({name, mean, std::sqrt(var), counts.size()});
  }
  return rows;
}

}  // namespace tops
