#include "tops/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <set>
#include <sstream>

#include "tops/answer.hpp"
#include "tops/bpe.hpp"
#include "tops/sha256.hpp"

namespace tops {

namespace {

constexpr std::string_view kRoundsMarker = "#### Number of rounds:";
constexpr std::string_view kWrongRoundsMarker = "#### Number of wrong rounds:";

constexpr std::string_view kReflectionTransition =
    "\n\nWait, I need to re-examine the previous steps.\n\n";

std::optional<int> parse_int_after(const std::string& text, std::string_view marker) {
  size_t pos = text.rfind(marker);
  if (pos == std::string::npos) return std::nullopt;
  size_t i = pos + marker.size();
  while (i < text.size() && (text[i] == ' ' || text[i] == '\t')) ++i;
  size_t start = i;
  while (i < text.size() && text[i] >= '0' && text[i] <= '9') ++i;
  if (i == start) return std::nullopt;
  return std::stoi(text.substr(start, i - start));
}

}  // namespace

AccuracyReportRow accuracy_report(const std::string& benchmark,
                                  std::span<const std::vector<VerifiedGeneration>> per_seed_runs) {
  if (per_seed_runs.empty()) throw std::invalid_argument("accuracy_report requires at least one run");

  std::set<std::string> reference_ids;
  for (const VerifiedGeneration& r : per_seed_runs.front()) {
    reference_ids.insert(r.generation.problem_id);
  }
  for (size_t s = 1; s < per_seed_runs.size(); ++s) {
    std::set<std::string> ids;
    for (const VerifiedGeneration& r : per_seed_runs[s]) ids.insert(r.generation.problem_id);
    if (ids != reference_ids) {
      std::ostringstream msg;
      msg << "seed run " << s << " covers a different problem set; missing:";
      for (const std::string& id : reference_ids) {
        if (ids.count(id) == 0) msg << ' ' << id;
      }
      for (const std::string& id : ids) {
        if (reference_ids.count(id) == 0) msg << " +" << id;
      }
      throw std::invalid_argument(msg.str());
    }
  }

  std::vector<double> accuracies;
  double token_sum = 0.0;
  size_t token_n = 0;
  for (const std::vector<VerifiedGeneration>& run : per_seed_runs) {
    if (run.empty()) throw std::invalid_argument("accuracy_report: empty seed run");
    size_t correct = 0;
    for (const VerifiedGeneration& r : run) {
      if (r.is_correct) ++correct;
      token_sum += static_cast<double>(r.token_count);
      ++token_n;
    }
    accuracies.push_back(100.0 * static_cast<double>(correct) / static_cast<double>(run.size()));
  }

  double mean = 0.0;
  for (double a : accuracies) mean += a;
  mean /= static_cast<double>(accuracies.size());
  double var = 0.0;
  for (double a : accuracies) var += (a - mean) * (a - mean);
  var /= static_cast<double>(accuracies.size());

  return {benchmark, mean, std::sqrt(var), token_sum / static_cast<double>(token_n)};
}

int distinct_answers(std::span<const VerifiedGeneration> samples) {
  if (samples.empty()) throw std::invalid_argument("distinct_answers requires k >= 1");

  // union-find over pairwise equivalence; extraction failures never join
  std::vector<size_t> parent(samples.size());
  for (size_t i = 0; i < parent.size(); ++i) parent[i] = i;
  std::function<size_t(size_t)> find = [&](size_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };

  for (size_t i = 0; i < samples.size(); ++i) {
    if (!samples[i].extracted_answer) continue;
    for (size_t j = i + 1; j < samples.size(); ++j) {
      if (!samples[j].extracted_answer) continue;
      if (answers_equivalent(*samples[i].extracted_answer, *samples[j].extracted_answer)) {
        parent[find(i)] = find(j);
      }
    }
  }

  std::set<size_t> roots;
  for (size_t i = 0; i < samples.size(); ++i) roots.insert(find(i));
  return static_cast<int>(roots.size());
}

std::string render_round_judge_prompt(const Problem& problem, const std::string& solution,
                                      const std::string& gold) {
  std::string prompt =
      "You will be provided with a math problem and a solution generated by a reasoning "
      "model.\n"
      "The model's response may consist of multiple reasoning rounds.\n"
      "One reasoning round is a part of the full model generation and is defined as a "
      "complete reasoning process or verification process that explicitly contains the "
      "final answer.\n"
      "Your task is to carefully analyze the response to determine the number of reasoning "
      "rounds it contains, and identify how many of these solutions contain erroneous "
      "steps, including intermediate erroneous steps or erroneous final answer that is "
      "different from the ground truth answer.\n"
      "After you reasoning process, please give your final conclusions as \"#### Number of "
      "rounds: <number>\" and \"#### Number of wrong rounds: <number>\".\n"
      "\n"
      "Problem: {question}\n"
      "Solution: {solution}\n"
      "Ground Truth Answer: {answer}";

  auto substitute = [&](std::string_view placeholder, const std::string& value) {
    size_t pos = prompt.find(placeholder);
    if (pos != std::string::npos) prompt.replace(pos, placeholder.size(), value);
  };
  substitute("{question}", problem.statement);
  substitute("{solution}", solution);
  substitute("{answer}", gold);
  return prompt;
}

RoundParseResult parse_round_judgment(const std::string& problem_id,
                                      const std::string& judge_text) {
  RoundParseResult result;
  auto rounds = parse_int_after(judge_text, kRoundsMarker);
  auto wrong = parse_int_after(judge_text, kWrongRoundsMarker);
  if (!rounds || !wrong) {
    result.status = RoundParseResult::Status::missing_marker;
    result.judgment.problem_id = problem_id;
    result.judgment.raw_judge_text = judge_text;
    return result;
  }
  if (*wrong > *rounds) {
    result.status = RoundParseResult::Status::inconsistent_counts;
    result.judgment.problem_id = problem_id;
    result.judgment.raw_judge_text = judge_text;
    return result;
  }
  result.status = RoundParseResult::Status::ok;
  result.judgment = {problem_id, *rounds, *wrong, judge_text};
  return result;
}

RoundStats round_stats(std::span<const RoundJudgment> judgments, bool micro_average) {
  if (judgments.empty()) throw std::invalid_argument("round_stats requires at least one judgment");
  RoundStats stats;
  double ratio_sum = 0.0;
  size_t ratio_n = 0;
  long long rounds_sum = 0, wrong_sum = 0;
  for (const RoundJudgment& j : judgments) {
    stats.mean_rounds += j.rounds;
    stats.mean_wrong_rounds += j.wrong_rounds;
    rounds_sum += j.rounds;
    wrong_sum += j.wrong_rounds;
    if (j.rounds == 0) {
      ++stats.ratio_exclusions;
    } else {
      ratio_sum += static_cast<double>(j.wrong_rounds) / static_cast<double>(j.rounds);
      ++ratio_n;
    }
  }
  stats.mean_rounds /= static_cast<double>(judgments.size());
  stats.mean_wrong_rounds /= static_cast<double>(judgments.size());
  if (micro_average) {
    stats.mean_wrong_ratio =
        rounds_sum == 0 ? 0.0 : static_cast<double>(wrong_sum) / static_cast<double>(rounds_sum);
  } else {
    stats.mean_wrong_ratio = ratio_n == 0 ? 0.0 : ratio_sum / static_cast<double>(ratio_n);
  }
  return stats;
}

AssembleResult assemble_reflective_cot(const Generation& initial_wrong,
                                       const std::string& critique,
                                       const std::string& reflection) {
  if (reflection.empty()) {
    throw std::invalid_argument("reflective CoT requires a non-empty reflection segment");
  }

  // critique quotes erroneous steps as "..." segments
  std::vector<std::string> quotes;
  size_t pos = 0;
  while (pos < critique.size()) {
    size_t open = critique.find('"', pos);
    if (open == std::string::npos) break;
    size_t close = critique.find('"', open + 1);
    if (close == std::string::npos) break;
    if (close > open + 1) quotes.push_back(critique.substr(open + 1, close - open - 1));
    pos = close + 1;
  }
  if (quotes.empty()) {
    throw std::invalid_argument("critique must quote at least one erroneous step");
  }

  AssembleResult result;
  result.cot.text = initial_wrong.text;
  result.cot.text += kReflectionTransition;
  result.cot.text += reflection;
  result.cot.initial_response_id =
      initial_wrong.problem_id + "#" + std::to_string(initial_wrong.sample_index);
  result.cot.critique_id = sha256_hex(critique).substr(0, 16);

  for (const std::string& quote : quotes) {
    size_t at = initial_wrong.text.find(quote);
    if (at == std::string::npos) {
      result.unmatched_quotes.push_back(quote);
      continue;
    }
    result.cot.erroneous_spans.emplace_back(at, at + quote.size());
  }

  std::sort(result.cot.erroneous_spans.begin(), result.cot.erroneous_spans.end());
  // merge overlaps so the span list stays disjoint
  std::vector<std::pair<size_t, size_t>> merged;
  for (const auto& span : result.cot.erroneous_spans) {
    if (!merged.empty() && span.first <= merged.back().second) {
      merged.back().second = std::max(merged.back().second, span.second);
    } else {
      merged.push_back(span);
    }
  }
  result.cot.erroneous_spans = std::move(merged);
  return result;
}

std::vector<bool> emit_loss_mask(const AnnotatedCoT& cot, const BpeTokenizer& tokenizer) {
  auto spans = tokenizer.encode_with_offsets(cot.text);
  std::vector<bool> mask(spans.size(), false);
  for (size_t i = 0; i < spans.size(); ++i) {
    for (const auto& [begin, end] : cot.erroneous_spans) {
      if (spans[i].begin < end && begin < spans[i].end) {
        mask[i] = true;
        break;
      }
    }
  }
  return mask;
}

}  // namespace tops
