#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tops/types.hpp"

namespace tops {

class BpeTokenizer;

// Judge verdict for one response: how many reasoning rounds it contains and
// how many of them carry erroneous steps or a wrong final answer.
struct RoundJudgment {
  std::string problem_id;
  int rounds = 0;
  int wrong_rounds = 0;
  std::string raw_judge_text;
};

struct RoundParseResult {
  enum class Status { ok, missing_marker, inconsistent_counts };
  Status status = Status::missing_marker;
  RoundJudgment judgment;  // valid only when status == ok
};

// A long CoT assembled from a wrong initial response plus reflection, with
// the critique-quoted erroneous steps located as byte ranges [begin, end)
// into text; spans are in-bounds, non-overlapping, sorted.
struct AnnotatedCoT {
  std::string text;
  std::vector<std::pair<size_t, size_t>> erroneous_spans;
  std::string initial_response_id;
  std::string critique_id;
};

struct AssembleResult {
  AnnotatedCoT cot;
  std::vector<std::string> unmatched_quotes;  // critique quotes not found in the initial response
};

struct AccuracyReportRow {
  std::string benchmark;
  double mean_accuracy = 0.0;  // percent
  double std_accuracy = 0.0;   // population std over seeds
  double mean_tokens = 0.0;    // over all graded records of all seeds
};

// Mean/std of accuracy over per-seed runs of the same problem set. Throws
// std::invalid_argument listing missing ids when coverage differs.
AccuracyReportRow accuracy_report(const std::string& benchmark,
                                  std::span<const std::vector<VerifiedGeneration>> per_seed_runs);

// Number of equivalence classes among the extracted answers of k samples of
// one problem; every extraction failure counts as its own class.
int distinct_answers(std::span<const VerifiedGeneration> samples);

// Judge prompt asking for total and erroneous reasoning-round counts; pure
// placeholder interpolation, no escaping.
std::string render_round_judge_prompt(const Problem& problem, const std::string& solution,
                                      const std::string& gold);

// Parses the last "#### Number of rounds:" / "#### Number of wrong rounds:"
// lines; both integers are required and wrong <= total must hold.
RoundParseResult parse_round_judgment(const std::string& problem_id,
                                      const std::string& judge_text);

struct RoundStats {
  double mean_rounds = 0.0;
  double mean_wrong_rounds = 0.0;
  double mean_wrong_ratio = 0.0;
  size_t ratio_exclusions = 0;  // judgments with rounds == 0
};

// Arithmetic means over judgments; the ratio is macro-averaged per response
// by default, micro (sum wrong / sum rounds) behind the flag.
RoundStats round_stats(std::span<const RoundJudgment> judgments, bool micro_average = false);

// Concatenates the initial response, a fixed transition line, and the
// reflection; locates each double-quoted critique substring in the initial
// response (first exact occurrence). Quotes without a match are reported in
// unmatched_quotes and skipped. Throws std::invalid_argument when the
// reflection is empty or the critique quotes nothing.
AssembleResult assemble_reflective_cot(const Generation& initial_wrong,
                                       const std::string& critique, const std::string& reflection);

// mask[i] is true iff token i's byte interval intersects an erroneous span.
std::vector<bool> emit_loss_mask(const AnnotatedCoT& cot, const BpeTokenizer& tokenizer);

}  // namespace tops
