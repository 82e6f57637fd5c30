#include <doctest.h>

#include <map>
#include <random>
#include <set>
#include <stdexcept>

#include "tops/seed.hpp"

using namespace tops;

namespace {

VerifiedGeneration response(const std::string& id, Effort effort, long long tokens, bool correct,
                            const std::string& text = "body") {
  VerifiedGeneration v;
  v.generation.problem_id = id;
  v.generation.effort = effort;
  v.generation.text = text;
  v.is_correct = correct;
  v.token_count = tokens;
  return v;
}

EffortTriple triple(const std::string& id, std::array<long long, 3> tokens,
                    std::array<bool, 3> correct = {true, true, true}) {
  EffortTriple t;
  t.problem.id = id;
  t.problem.statement = "statement " + id;
  t.problem.gold_answer = "1";
  for (int rank = 0; rank < 3; ++rank) {
    t.responses[rank] = response(id, kAllEfforts[size_t(rank)], tokens[size_t(rank)],
                                 correct[size_t(rank)], "text-" + std::to_string(tokens[size_t(rank)]));
  }
  return t;
}

}  // namespace

TEST_CASE("filter_all_correct keeps only (T,T,T), ordered by id") {
  std::vector<EffortTriple> triples;
  triples.push_back(triple("b", {1000, 1400, 1750}));
  triples.push_back(triple("a", {900, 1300, 1700}, {true, false, true}));
  triples.push_back(triple("c", {900, 1300, 1700}));
  auto kept = filter_all_correct(std::move(triples));
  REQUIRE(kept.size() == 2);
  CHECK(kept[0].problem.id == "b");
  CHECK(kept[1].problem.id == "c");

  std::vector<EffortTriple> none;
  CHECK(filter_all_correct(std::move(none)).empty());
}

TEST_CASE("reorder keeps triples with all pairwise gaps over the threshold") {
  auto kept = reorder_and_gap_filter(triple("p", {1000, 1400, 1750}));
  REQUIRE(kept.has_value());
  CHECK(kept->by_assigned_effort[0].token_count == 1000);
  CHECK(kept->by_assigned_effort[1].token_count == 1400);
  CHECK(kept->by_assigned_effort[2].token_count == 1750);

  CHECK(!reorder_and_gap_filter(triple("p", {1000, 1250, 1600})).has_value());  // gap 250
}

TEST_CASE("reorder relabels by length regardless of the prompt-time tags") {
  // raw order: low prompt produced the longest response
  auto kept = reorder_and_gap_filter(triple("p", {1750, 1400, 1000}));
  REQUIRE(kept.has_value());
  CHECK(kept->by_assigned_effort[0].token_count == 1000);
  CHECK(kept->by_assigned_effort[0].generation.effort == Effort::low);
  CHECK(kept->by_assigned_effort[2].token_count == 1750);
  CHECK(kept->by_assigned_effort[2].generation.effort == Effort::high);
}

TEST_CASE("duplicate token counts never satisfy the strict gap") {
  CHECK(!reorder_and_gap_filter(triple("p", {1000, 1000, 1400})).has_value());
  CHECK(!reorder_and_gap_filter(triple("p", {1000, 1400, 1400})).has_value());
}

TEST_CASE("boundary: a gap of exactly the threshold is rejected") {
  CHECK(!reorder_and_gap_filter(triple("p", {1000, 1300, 1700}), 300).has_value());
  CHECK(reorder_and_gap_filter(triple("p", {1000, 1301, 1700}), 300).has_value());
}

TEST_CASE("gap gate agrees with a brute-force checker on random triples") {
  std::mt19937 rng(42);
  std::uniform_int_distribution<long long> tokens(0, 2000);
  for (int trial = 0; trial < 1000; ++trial) {
    std::array<long long, 3> t = {tokens(rng), tokens(rng), tokens(rng)};
    auto result = reorder_and_gap_filter(triple("p", t), 300);

    std::array<long long, 3> sorted = t;
    std::sort(sorted.begin(), sorted.end());
    bool expected = true;
    for (int i = 0; i < 3 && expected; ++i) {
      for (int j = i + 1; j < 3; ++j) {
        long long gap = sorted[size_t(j)] - sorted[size_t(i)];
        if (gap < 0) gap = -gap;
        if (gap <= 300) {
          expected = false;
          break;
        }
      }
    }
    CAPTURE(t[0]);
    CAPTURE(t[1]);
    CAPTURE(t[2]);
    CHECK(result.has_value() == expected);
    if (result) {
      CHECK(result->by_assigned_effort[0].token_count < result->by_assigned_effort[1].token_count);
      CHECK(result->by_assigned_effort[1].token_count < result->by_assigned_effort[2].token_count);
    }
  }
}

TEST_CASE("seed dataset: three records per triple with the three distinct prompts") {
  EffortRegistry prompts;
  std::vector<OrderedTriple> ordered;
  ordered.push_back(*reorder_and_gap_filter(triple("p", {1000, 1400, 1750})));

  auto records = build_seed_dataset(ordered, prompts);
  REQUIRE(records.size() == 3);
  CHECK(records[0].system == prompts.system_prompt_for(Effort::low));
  CHECK(records[1].system == prompts.system_prompt_for(Effort::medium));
  CHECK(records[2].system == prompts.system_prompt_for(Effort::high));
  CHECK(records[0].assistant == "text-1000");
  CHECK(records[2].assistant == "text-1750");
  for (const TrainingExample& r : records) {
    CHECK(r.user == "statement p");
    CHECK(r.provenance.problem_id == "p");
  }

  std::vector<OrderedTriple> none;
  CHECK(build_seed_dataset(none, prompts).empty());
}

TEST_CASE("seed dataset cardinality: 3 x |input|, one record per effort per problem") {
  EffortRegistry prompts;
  std::vector<OrderedTriple> ordered;
  for (int i = 0; i < 17; ++i) {
    ordered.push_back(*reorder_and_gap_filter(
        triple("p" + std::to_string(i), {1000, 1400, 1800})));
  }
  auto records = build_seed_dataset(ordered, prompts);
  CHECK(records.size() == 3 * ordered.size());
  std::map<std::string, std::set<std::string>> efforts_per_problem;
  for (const TrainingExample& r : records) {
    CHECK(efforts_per_problem[r.provenance.problem_id].insert(r.provenance.effort).second);
  }
  for (const auto& [_, efforts] : efforts_per_problem) CHECK(efforts.size() == 3);
}

TEST_CASE("seed stats: single and averaged triples") {
  std::vector<OrderedTriple> ordered;
  ordered.push_back(*reorder_and_gap_filter(triple("a", {1000, 1400, 1750})));
  SeedStats stats = seed_stats(ordered);
  CHECK(stats.problems == 1);
  CHECK(stats.mean_tokens[0] == doctest::Approx(1000));
  CHECK(stats.mean_tokens[1] == doctest::Approx(1400));
  CHECK(stats.mean_tokens[2] == doctest::Approx(1750));

  ordered.push_back(*reorder_and_gap_filter(triple("b", {2000, 2400, 2750})));
  stats = seed_stats(ordered);
  CHECK(stats.problems == 2);
  CHECK(stats.mean_tokens[0] == doctest::Approx(1500));
  CHECK(stats.mean_tokens[1] == doctest::Approx(1900));
  CHECK(stats.mean_tokens[2] == doctest::Approx(2250));
}
