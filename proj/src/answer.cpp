#include "tops/answer.hpp"

#include <algorithm>
#include <cctype>

#include "tops/bpe.hpp"

namespace tops {

namespace {

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

char lower(char c) { return static_cast<char>(std::tolower(static_cast<unsigned char>(c))); }

bool istarts_with(std::string_view s, size_t pos, std::string_view prefix) {
  if (pos + prefix.size() > s.size()) return false;
  for (size_t i = 0; i < prefix.size(); ++i) {
    if (lower(s[pos + i]) != lower(prefix[i])) return false;
  }
  return true;
}

// Matches the {...} group starting at pos (which must be '{'), honoring
// \{ \} escapes. Returns the content and the index one past '}'.
std::optional<std::pair<std::string, size_t>> match_brace_group(std::string_view s, size_t pos) {
  if (pos >= s.size() || s[pos] != '{') return std::nullopt;
  int depth = 0;
  for (size_t i = pos; i < s.size(); ++i) {
    if (s[i] == '\\' && i + 1 < s.size() && (s[i + 1] == '{' || s[i + 1] == '}')) {
      ++i;
      continue;
    }
    if (s[i] == '{') {
      ++depth;
    } else if (s[i] == '}') {
      --depth;
      if (depth == 0) return std::make_pair(std::string(s.substr(pos + 1, i - pos - 1)), i + 1);
    }
  }
  return std::nullopt;
}

std::string trim(std::string_view s) {
  size_t b = 0, e = s.size();
  while (b < e && is_space(s[b])) ++b;
  while (e > b && is_space(s[e - 1])) --e;
  return std::string(s.substr(b, e - b));
}

// Removes every case-insensitive occurrence of cmd.
void erase_command(std::string& s, std::string_view cmd) {
  std::string out;
  out.reserve(s.size());
  size_t i = 0;
  while (i < s.size()) {
    if (istarts_with(s, i, cmd)) {
      i += cmd.size();
    } else {
      out.push_back(s[i]);
      ++i;
    }
  }
  s = std::move(out);
}

std::string collapse_whitespace(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  bool in_run = false;
  for (char c : s) {
    if (is_space(c)) {
      in_run = true;
    } else {
      if (in_run && !out.empty()) out.push_back(' ');
      in_run = false;
      out.push_back(c);
    }
  }
  return out;
}

std::string convert_fractions(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  size_t i = 0;
  while (i < s.size()) {
    size_t cmd_len = 0;
    if (istarts_with(s, i, "\\dfrac")) {
      cmd_len = 6;
    } else if (istarts_with(s, i, "\\frac")) {
      cmd_len = 5;
    }
    if (cmd_len > 0) {
      auto a = match_brace_group(s, i + cmd_len);
      if (a) {
        auto b = match_brace_group(s, a->second);
        if (b) {
          out += a->first;
          out.push_back('/');
          out += b->first;
          i = b->second;
          continue;
        }
      }
    }
    out.push_back(s[i]);
    ++i;
  }
  return out;
}

bool is_digit(char c) { return c >= '0' && c <= '9'; }

// A comma is a thousands separator iff it sits between a digit and a group
// of exactly three digits; "(0,1)" keeps its comma, "3,150" loses it.
std::string remove_thousands_separators(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (size_t i = 0; i < s.size(); ++i) {
    if (s[i] == ',' && i > 0 && is_digit(s[i - 1])) {
      size_t group = 0;
      while (group < 3 && i + 1 + group < s.size() && is_digit(s[i + 1 + group])) ++group;
      bool exactly_three = group == 3 && (i + 4 >= s.size() || !is_digit(s[i + 4]));
      if (exactly_three) continue;
    }
    out.push_back(s[i]);
  }
  return out;
}

}  // namespace

Extraction extract_final_answer_detailed(std::string_view text) {
  size_t last_boxed = text.rfind("\\boxed{");
  if (last_boxed != std::string_view::npos) {
    auto group = match_brace_group(text, last_boxed + 6);
    if (!group) return {std::nullopt, true};
    return {group->first, false};
  }
  size_t last_marker = text.rfind("#### ");
  if (last_marker != std::string_view::npos) {
    size_t start = last_marker + 5;
    size_t eol = text.find_first_of("\r\n", start);
    if (eol == std::string_view::npos) eol = text.size();
    return {std::string(text.substr(start, eol - start)), false};
  }
  return {std::nullopt, false};
}

std::optional<std::string> extract_final_answer(std::string_view text) {
  return extract_final_answer_detailed(text).answer;
}

namespace {

std::string normalize_pass(const std::string& input) {
  std::string s = trim(input);
  size_t b = 0, e = s.size();
  while (b < e && s[b] == '$') ++b;
  while (e > b && s[e - 1] == '$') --e;
  s = trim(std::string_view(s).substr(b, e - b));

  erase_command(s, "\\left");
  erase_command(s, "\\right");
  erase_command(s, "\\!");
  erase_command(s, "\\,");
  erase_command(s, "\\;");
  erase_command(s, "\\:");
  erase_command(s, "\\ ");

  s = collapse_whitespace(s);
  s = convert_fractions(s);

  if (s.size() >= 2 && s.compare(s.size() - 2, 2, "\\%") == 0) s.resize(s.size() - 2);
  if (!s.empty() && s.back() == '.') s.pop_back();
  s = remove_thousands_separators(s);

  std::transform(s.begin(), s.end(), s.begin(), lower);
  return s;
}

}  // namespace

CanonicalAnswer normalize_answer(std::string_view text) {
  CanonicalAnswer result;
  result.raw = std::string(text);

  // Every pass either shrinks the string or leaves it unchanged, so this
  // terminates; iterating makes normalization idempotent even when one rule
  // exposes a match for an earlier rule (e.g. a trailing '$' behind a period).
  std::string s(text);
  for (;;) {
    std::string next = normalize_pass(s);
    if (next == s) break;
    s = std::move(next);
  }

  result.normalized = std::move(s);
  result.numeric = parse_rational(result.normalized);
  return result;
}

bool answers_equivalent(std::string_view a, std::string_view b) {
  CanonicalAnswer ca = normalize_answer(a);
  CanonicalAnswer cb = normalize_answer(b);
  if (ca.normalized == cb.normalized) return true;
  if (ca.numeric && cb.numeric) {
    if (*ca.numeric == *cb.numeric) return true;
    bool decimal_involved = ca.normalized.find('.') != std::string::npos ||
                            cb.normalized.find('.') != std::string::npos;
    if (decimal_involved) return rational_within_nano(*ca.numeric, *cb.numeric);
  }
  return false;
}

VerifiedGeneration grade(const Generation& generation, const std::string& gold,
                         const BpeTokenizer& tokenizer) {
  VerifiedGeneration out;
  out.generation = generation;
  out.token_count = tokenizer.count_tokens(generation.text);
  if (generation.finish_reason == FinishReason::error) return out;
  Extraction extraction = extract_final_answer_detailed(generation.text);
  out.extracted_answer = extraction.answer;
  out.is_correct = extraction.answer.has_value() && answers_equivalent(*extraction.answer, gold);
  return out;
}

std::string render_format_rescue_prompt(const Problem& problem, const std::string& response_text,
                                        const std::string& gold) {
  std::string prompt =
      "You will be shown a math problem, a model response, and the ground truth answer.\n"
      "The response was graded incorrect by a rule-based checker. Decide whether the final "
      "answer given in the response is actually mathematically equal to the ground truth "
      "answer and was only missed because of formatting (notation, units, LaTeX style, "
      "ordering of equivalent forms).\n"
      "Reply with exactly one word: YES if the final answer matches the ground truth, "
      "otherwise NO.\n\n";
  prompt += "Problem: " + problem.statement + "\n";
  prompt += "Response: " + response_text + "\n";
  prompt += "Ground Truth Answer: " + gold + "\n";
  return prompt;
}

std::optional<bool> parse_yes_no_verdict(std::string_view judge_reply) {
  std::string token;
  for (char c : judge_reply) {
    if (std::isalpha(static_cast<unsigned char>(c))) {
      token.push_back(lower(c));
      if (token.size() > 3) return std::nullopt;
    } else if (!token.empty()) {
      break;
    }
  }
  if (token == "yes") return true;
  if (token == "no") return false;
  return std::nullopt;
}

void apply_format_rescue(VerifiedGeneration& graded, std::optional<bool> verdict) {
  if (verdict.has_value() && *verdict) graded.is_correct = true;
}

}  // namespace tops
