#include <doctest.h>

#include <stdexcept>

#include <set>

#include "tops/effort.hpp"

using namespace tops;

TEST_CASE("effort ranks are 0/1/2 and strictly monotone") {
  CHECK(effort_rank(Effort::low) == 0);
  CHECK(effort_rank(Effort::medium) == 1);
  CHECK(effort_rank(Effort::high) == 2);
  CHECK(effort_rank(Effort::low) < effort_rank(Effort::medium));
  CHECK(effort_rank(Effort::medium) < effort_rank(Effort::high));
}

TEST_CASE("effort_rank is a bijection onto {0,1,2}") {
  std::set<int> ranks;
  for (Effort e : kAllEfforts) ranks.insert(effort_rank(e));
  CHECK(ranks == std::set<int>{0, 1, 2});
}

TEST_CASE("system prompts match the published openings") {
  CHECK(system_prompt_for(Effort::low).rfind("You have extremely limited time to think", 0) == 0);
  CHECK(system_prompt_for(Effort::medium).rfind("You have sufficient time to think", 0) == 0);
  CHECK(system_prompt_for(Effort::high).rfind("You have unlimited time to think", 0) == 0);
}

TEST_CASE("prompts are non-empty, distinct, and stable across calls") {
  std::set<std::string> prompts;
  for (Effort e : kAllEfforts) {
    const std::string& p = system_prompt_for(e);
    CHECK(!p.empty());
    CHECK(p == system_prompt_for(e));
    prompts.insert(p);
  }
  CHECK(prompts.size() == 3);
}

TEST_CASE("effort name round trip") {
  for (Effort e : kAllEfforts) {
    auto back = effort_from_name(effort_name(e));
    REQUIRE(back.has_value());
    CHECK(*back == e);
  }
  CHECK(!effort_from_name("max").has_value());
}

TEST_CASE("registry override replaces one prompt and keeps the others") {
  EffortRegistry registry;
  registry.override_prompt(Effort::medium, "think about it for a while");
  CHECK(registry.system_prompt_for(Effort::medium) == "think about it for a while");
  CHECK(registry.system_prompt_for(Effort::low) == system_prompt_for(Effort::low));
  CHECK(registry.system_prompt_for(Effort::high) == system_prompt_for(Effort::high));
  CHECK_THROWS_AS(registry.override_prompt(Effort::low, ""), std::invalid_argument);
}
