#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "tops/rational.hpp"
#include "tops/types.hpp"

namespace tops {

class BpeTokenizer;

// Normalized answer form. numeric is present iff the normalized string
// parses as an integer, finite decimal, or fraction a/b (b != 0).
struct CanonicalAnswer {
  std::string raw;
  std::string normalized;
  std::optional<Rational> numeric;
};

struct Extraction {
  std::optional<std::string> answer;
  bool failure = false;  // last \boxed{...} present but unbalanced
};

// Final-answer extraction: content of the last balanced \boxed{...}; when no
// \boxed occurs, the text after the last "#### " marker up to end-of-line.
// A malformed last \boxed yields no answer and sets failure.
Extraction extract_final_answer_detailed(std::string_view text);
std::optional<std::string> extract_final_answer(std::string_view text);

// Normalization rules, applied in order: trim; strip outer '$'; drop
// \left/\right and the spacing commands \! \, \; \: "\ "; collapse
// whitespace runs to single spaces; rewrite \frac{a}{b} and \dfrac{a}{b} as
// a/b; strip a trailing \% and a trailing period; drop thousands separators
// (a comma between a digit and exactly three digits); lowercase. Command
// matching is case-insensitive, which keeps the map idempotent.
CanonicalAnswer normalize_answer(std::string_view text);

// Equivalence: equal normalized strings, or exactly equal rationals, or --
// when at least one side is a decimal literal -- rationals within 1e-9.
bool answers_equivalent(std::string_view a, std::string_view b);

// Extract + compare against gold + attach the reference-tokenizer length.
// Truncated (finish_reason=length) responses are still graded; error
// responses grade as incorrect.
VerifiedGeneration grade(const Generation& generation, const std::string& gold,
                         const BpeTokenizer& tokenizer);

// Judge prompt for rescuing rule-graded-incorrect responses whose final
// answer matches the gold up to formatting. Verdict must be a bare YES/NO.
std::string render_format_rescue_prompt(const Problem& problem, const std::string& response_text,
                                        const std::string& gold);

// Strict yes/no verdict parse; nullopt when the reply carries neither token.
std::optional<bool> parse_yes_no_verdict(std::string_view judge_reply);

// Applies a rescue verdict: flips is_correct to true on YES, never to false.
void apply_format_rescue(VerifiedGeneration& graded, std::optional<bool> verdict);

}  // namespace tops
