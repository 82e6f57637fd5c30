#include <doctest.h>

#include <random>

#include "tops/analysis.hpp"
#include "tops/answer.hpp"
#include "tops/bpe.hpp"

using namespace tops;

namespace {

VerifiedGeneration sample(const std::string& id, const std::optional<std::string>& answer,
                          bool correct = false, long long tokens = 0) {
  VerifiedGeneration v;
  v.generation.problem_id = id;
  v.extracted_answer = answer;
  v.is_correct = correct;
  v.token_count = tokens;
  return v;
}

const BpeTokenizer& tokenizer() {
  static BpeTokenizer tok = BpeTokenizer::load(TOPS_FIXTURE_DIR "/tokenizer_split.json");
  return tok;
}

}  // namespace

TEST_CASE("accuracy report: perfect runs and arithmetic") {
  std::vector<std::vector<VerifiedGeneration>> runs;
  for (int seed = 0; seed < 5; ++seed) {
    std::vector<VerifiedGeneration> run;
    for (int p = 0; p < 10; ++p) {
      run.push_back(sample("p" + std::to_string(p), "1", true, 100));
    }
    runs.push_back(run);
  }
  AccuracyReportRow row = accuracy_report("bench", runs);
  CHECK(row.mean_accuracy == doctest::Approx(100.0));
  CHECK(row.std_accuracy == doctest::Approx(0.0));
  CHECK(row.mean_tokens == doctest::Approx(100.0));
}

TEST_CASE("accuracy report: mean over seeds {90,90,95,95,95} is 93") {
  std::vector<std::vector<VerifiedGeneration>> runs;
  for (int correct_count : {18, 18, 19, 19, 19}) {  // out of 20
    std::vector<VerifiedGeneration> run;
    for (int p = 0; p < 20; ++p) {
      run.push_back(sample("p" + std::to_string(p), "1", p < correct_count, 50));
    }
    runs.push_back(run);
  }
  AccuracyReportRow row = accuracy_report("bench", runs);
  CHECK(row.mean_accuracy == doctest::Approx(93.0));
}

TEST_CASE("accuracy means match a streaming oracle to 1e-12") {
  std::mt19937 rng(5);
  std::uniform_int_distribution<int> coin(0, 1);
  std::vector<std::vector<VerifiedGeneration>> runs;
  double stream_mean = 0.0;
  for (int seed = 0; seed < 7; ++seed) {
    std::vector<VerifiedGeneration> run;
    size_t correct = 0;
    for (int p = 0; p < 97; ++p) {
      bool ok = coin(rng) == 1;
      if (ok) ++correct;
      run.push_back(sample("p" + std::to_string(p), "1", ok, 10));
    }
    double acc = 100.0 * double(correct) / 97.0;
    stream_mean += (acc - stream_mean) / double(seed + 1);  // one-pass mean
    runs.push_back(run);
  }
  AccuracyReportRow row = accuracy_report("bench", runs);
  CHECK(std::abs(row.mean_accuracy - stream_mean) < 1e-12);
}

TEST_CASE("accuracy report rejects mismatched coverage listing ids") {
  std::vector<std::vector<VerifiedGeneration>> runs;
  runs.push_back({sample("a", "1", true), sample("b", "1", true)});
  runs.push_back({sample("a", "1", true), sample("c", "1", true)});
  CHECK_THROWS_WITH_AS(accuracy_report("bench", runs),
                       doctest::Contains("different problem set"), std::invalid_argument);
}

TEST_CASE("distinct answers: set cardinality with equivalence-aware grouping") {
  std::vector<VerifiedGeneration> s;
  for (const char* a : {"4", "4", "4", "5", "4"}) s.push_back(sample("p", a));
  CHECK(distinct_answers(s) == 2);

  s.clear();
  for (const char* a : {"1/2", "0.5", "3"}) s.push_back(sample("p", a));
  CHECK(distinct_answers(s) == 2);

  s.assign(5, sample("p", std::nullopt));
  CHECK(distinct_answers(s) == 5);  // each failure is its own class
}

TEST_CASE("distinct answers equals a pairwise-partition oracle and stays in [1,k]") {
  std::mt19937 rng(31);
  const std::vector<std::string> pool = {"1/2", "0.5", "2/4", "3", "3.0", "x", "(0,1)", "7"};
  std::uniform_int_distribution<size_t> pick(0, pool.size());
  std::uniform_int_distribution<int> k_dist(1, 8);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<VerifiedGeneration> s;
    int k = k_dist(rng);
    for (int i = 0; i < k; ++i) {
      size_t j = pick(rng);
      if (j == pool.size()) {
        s.push_back(sample("p", std::nullopt));
      } else {
        s.push_back(sample("p", pool[j]));
      }
    }
    // oracle: connected components by BFS over the pairwise relation
    std::vector<int> component(s.size(), -1);
    int n_components = 0;
    for (size_t i = 0; i < s.size(); ++i) {
      if (component[i] >= 0) continue;
      int label = n_components++;
      std::vector<size_t> queue = {i};
      component[i] = label;
      while (!queue.empty()) {
        size_t u = queue.back();
        queue.pop_back();
        for (size_t v = 0; v < s.size(); ++v) {
          if (component[v] >= 0 || !s[u].extracted_answer || !s[v].extracted_answer) continue;
          if (answers_equivalent(*s[u].extracted_answer, *s[v].extracted_answer)) {
            component[v] = label;
            queue.push_back(v);
          }
        }
      }
    }
    int got = distinct_answers(s);
    CHECK(got == n_components);
    CHECK(got >= 1);
    CHECK(got <= k);
  }
}

TEST_CASE("round judge prompt carries the marker instructions and substitutions") {
  Problem p;
  p.statement = "What is 2+2?";
  std::string prompt = render_round_judge_prompt(p, "I think 4. #### done", "4");
  CHECK(prompt.find("#### Number of rounds:") != std::string::npos);
  CHECK(prompt.find("#### Number of wrong rounds:") != std::string::npos);
  CHECK(prompt.find("Problem: What is 2+2?") != std::string::npos);
  CHECK(prompt.find("Solution: I think 4. #### done") != std::string::npos);
  CHECK(prompt.find("Ground Truth Answer: 4") != std::string::npos);
  CHECK(prompt.find("{question}") == std::string::npos);
  CHECK(prompt.find("{solution}") == std::string::npos);
  CHECK(prompt.find("{answer}") == std::string::npos);
}

TEST_CASE("round judgment parsing: direct, last-occurrence, errors") {
  auto r = parse_round_judgment("p", "analysis...\n#### Number of rounds: 3\n#### Number of wrong rounds: 1");
  CHECK(r.status == RoundParseResult::Status::ok);
  CHECK(r.judgment.rounds == 3);
  CHECK(r.judgment.wrong_rounds == 1);

  r = parse_round_judgment("p",
                           "#### Number of rounds: 2\n#### Number of wrong rounds: 0\n"
                           "wait\n#### Number of rounds: 4\n#### Number of wrong rounds: 2");
  CHECK(r.status == RoundParseResult::Status::ok);
  CHECK(r.judgment.rounds == 4);
  CHECK(r.judgment.wrong_rounds == 2);

  r = parse_round_judgment("p", "#### Number of rounds: 2");
  CHECK(r.status == RoundParseResult::Status::missing_marker);

  r = parse_round_judgment("p", "#### Number of rounds: 2\n#### Number of wrong rounds: 5");
  CHECK(r.status == RoundParseResult::Status::inconsistent_counts);
}

TEST_CASE("render -> parse round trip over synthetic compliant replies") {
  std::mt19937 rng(17);
  std::uniform_int_distribution<int> rounds_dist(0, 12);
  for (int trial = 0; trial < 200; ++trial) {
    int rounds = rounds_dist(rng);
    std::uniform_int_distribution<int> wrong_dist(0, rounds);
    int wrong = wrong_dist(rng);
    std::string reply = "Let me analyze.\n#### Number of rounds: " + std::to_string(rounds) +
                        "\n#### Number of wrong rounds: " + std::to_string(wrong) + "\n";
    auto r = parse_round_judgment("p", reply);
    REQUIRE(r.status == RoundParseResult::Status::ok);
    CHECK(r.judgment.rounds == rounds);
    CHECK(r.judgment.wrong_rounds == wrong);
  }
}

TEST_CASE("round stats: worked examples") {
  std::vector<RoundJudgment> js = {{"a", 2, 0, ""}, {"b", 4, 2, ""}};
  RoundStats stats = round_stats(js);
  CHECK(stats.mean_rounds == doctest::Approx(3.0));
  CHECK(stats.mean_wrong_rounds == doctest::Approx(1.0));
  CHECK(stats.mean_wrong_ratio == doctest::Approx(0.25));
  CHECK(stats.ratio_exclusions == 0);

  js = {{"a", 3, 0, ""}, {"b", 5, 0, ""}};
  CHECK(round_stats(js).mean_wrong_ratio == doctest::Approx(0.0));

  js = {{"a", 5, 5, ""}};
  CHECK(round_stats(js).mean_wrong_ratio == doctest::Approx(1.0));

  js = {{"a", 0, 0, ""}, {"b", 4, 1, ""}};
  stats = round_stats(js);
  CHECK(stats.ratio_exclusions == 1);
  CHECK(stats.mean_wrong_ratio == doctest::Approx(0.25));

  // micro average: sum wrong / sum rounds
  js = {{"a", 2, 1, ""}, {"b", 8, 1, ""}};
  CHECK(round_stats(js, true).mean_wrong_ratio == doctest::Approx(0.2));
  CHECK(round_stats(js, false).mean_wrong_ratio == doctest::Approx(0.3125));
}

TEST_CASE("reflective CoT assembly locates quoted steps") {
  Generation initial;
  initial.problem_id = "p";
  initial.sample_index = 2;
  initial.text = "Step 1: 2+2=5. Step 2: therefore 10.";

  auto result = assemble_reflective_cot(initial, "The claim \"2+2=5\" is wrong.",
                                        "Correcting: 2+2=4, so the answer is 8.");
  REQUIRE(result.cot.erroneous_spans.size() == 1);
  auto [begin, end] = result.cot.erroneous_spans[0];
  CHECK(result.cot.text.substr(begin, end - begin) == "2+2=5");
  CHECK(result.unmatched_quotes.empty());
  CHECK(result.cot.text.rfind(initial.text, 0) == 0);
  CHECK(result.cot.text.find("Correcting: 2+2=4") != std::string::npos);
  CHECK(result.cot.initial_response_id == "p#2");

  // two quoted steps -> two sorted non-overlapping spans
  auto two = assemble_reflective_cot(
      initial, "Both \"2+2=5\" and \"therefore 10\" are wrong.", "Fix.");
  REQUIRE(two.cot.erroneous_spans.size() == 2);
  CHECK(two.cot.erroneous_spans[0].second <= two.cot.erroneous_spans[1].first);

  // unmatched quote: recorded, not fatal
  auto missed = assemble_reflective_cot(initial, "\"2+2=5\" and \"not present\" are wrong.",
                                        "Fix.");
  CHECK(missed.cot.erroneous_spans.size() == 1);
  REQUIRE(missed.unmatched_quotes.size() == 1);
  CHECK(missed.unmatched_quotes[0] == "not present");

  CHECK_THROWS_AS(assemble_reflective_cot(initial, "\"2+2=5\" wrong", ""), std::invalid_argument);
  CHECK_THROWS_AS(assemble_reflective_cot(initial, "no quotes here", "fix"), std::invalid_argument);
}

TEST_CASE("loss mask: empty, full, and split-token spans") {
  AnnotatedCoT cot;
  cot.text = "So the answer is wrong here.";

  auto mask = emit_loss_mask(cot, tokenizer());
  CHECK(mask.size() == size_t(tokenizer().count_tokens(cot.text)));
  CHECK(std::none_of(mask.begin(), mask.end(), [](bool m) { return m; }));

  cot.erroneous_spans = {{0, cot.text.size()}};
  mask = emit_loss_mask(cot, tokenizer());
  CHECK(std::all_of(mask.begin(), mask.end(), [](bool m) { return m; }));
}

TEST_CASE("loss mask: masked tokens cover the annotated spans exactly where they intersect") {
  AnnotatedCoT cot;
  cot.text = "Step 1: 2+2=5. Step 2: therefore the final answer is 10.";
  size_t begin = cot.text.find("2+2=5");
  cot.erroneous_spans = {{begin, begin + 5}};

  auto spans = tokenizer().encode_with_offsets(cot.text);
  auto mask = emit_loss_mask(cot, tokenizer());
  REQUIRE(mask.size() == spans.size());
  for (size_t i = 0; i < spans.size(); ++i) {
    bool intersects = spans[i].begin < begin + 5 && begin < spans[i].end;
    CHECK(mask[i] == intersects);
  }
  // union of masked token bytes covers the span
  size_t covered_begin = cot.text.size(), covered_end = 0;
  for (size_t i = 0; i < spans.size(); ++i) {
    if (mask[i]) {
      covered_begin = std::min(covered_begin, spans[i].begin);
      covered_end = std::max(covered_end, spans[i].end);
    }
  }
  CHECK(covered_begin <= begin);
  CHECK(covered_end >= begin + 5);
}
