#include <doctest.h>

#include <fstream>
#include <random>

#include <nlohmann/json.hpp>

#include "tops/bpe.hpp"

using namespace tops;
using json = nlohmann::json;

namespace {

const BpeTokenizer& split_tokenizer() {
  static BpeTokenizer tok = BpeTokenizer::load(TOPS_FIXTURE_DIR "/tokenizer_split.json");
  return tok;
}

const BpeTokenizer& bytelevel_tokenizer() {
  static BpeTokenizer tok = BpeTokenizer::load(TOPS_FIXTURE_DIR "/tokenizer_bytelevel.json");
  return tok;
}

json load_json(const char* name) {
  std::ifstream in(std::string(TOPS_FIXTURE_DIR "/") + name);
  REQUIRE(in.good());
  return json::parse(in);
}

}  // namespace

TEST_CASE("empty text encodes to zero tokens") {
  CHECK(split_tokenizer().count_tokens("") == 0);
  CHECK(bytelevel_tokenizer().count_tokens("") == 0);
}

TEST_CASE("Split-layout tokenizer matches the reference encoder on the frozen corpus") {
  const BpeTokenizer& tok = split_tokenizer();
  for (const json& row : load_json("token_count_corpus.json")) {
    std::string text = row.at("text").get<std::string>();
    long long expected = row.at("count").get<long long>();
    CAPTURE(text);
    CHECK(tok.count_tokens(text) == expected);
  }
}

TEST_CASE("ByteLevel-layout tokenizer matches the reference encoder") {
  const BpeTokenizer& tok = bytelevel_tokenizer();
  for (const json& row : load_json("token_count_corpus_bytelevel.json")) {
    std::string text = row.at("text").get<std::string>();
    long long expected = row.at("count").get<long long>();
    CAPTURE(text);
    CHECK(tok.count_tokens(text) == expected);
  }
}

TEST_CASE("junction pairs: exact counts frozen from the reference encoder") {
  const BpeTokenizer& tok = split_tokenizer();
  for (const json& row : load_json("token_concat_pairs.json")) {
    std::string a = row.at("a").get<std::string>();
    std::string b = row.at("b").get<std::string>();
    CAPTURE(a);
    CAPTURE(b);
    CHECK(tok.count_tokens(a) == row.at("count_a").get<long long>());
    CHECK(tok.count_tokens(b) == row.at("count_b").get<long long>());
    CHECK(tok.count_tokens(a + b) == row.at("count_ab").get<long long>());
  }
}

TEST_CASE("concatenation property: count(a+b) <= count(a) + count(b)") {
  // Holds when the junction cannot re-chunk: a ends with a letter or digit
  // and b does not start with a letter. Letter-letter junctions can re-merge
  // across the boundary and are excluded.
  const BpeTokenizer& tok = split_tokenizer();
  const std::vector<std::string> enders = {"hello", "world", "answer", "x+y7", "步骤",
                                           "Thus", "42", "2^100", "tokens", "-5"};
  const std::vector<std::string> starters = {" the answer", " is 42", " 3.14", "\nnew line",
                                             "  ", "#### 72", ", then", ". Next", "!?",
                                             "123", ": x = 4", "\t tab"};
  std::mt19937 rng(20240517);
  std::uniform_int_distribution<size_t> pick_e(0, enders.size() - 1);
  std::uniform_int_distribution<size_t> pick_s(0, starters.size() - 1);
  std::uniform_int_distribution<int> pick_k(1, 4);

  for (int trial = 0; trial < 300; ++trial) {
    std::string a, b;
    for (int k = pick_k(rng); k > 0; --k) a += starters[pick_s(rng)];
    a += enders[pick_e(rng)];
    for (int k = pick_k(rng); k > 0; --k) b += starters[pick_s(rng)];
    CAPTURE(a);
    CAPTURE(b);
    CHECK(tok.count_tokens(a + b) <= tok.count_tokens(a) + tok.count_tokens(b));
  }
}

TEST_CASE("encoding is deterministic across calls") {
  const BpeTokenizer& tok = split_tokenizer();
  std::string text = "Wait, I should double check: 17 * 23 = 391. \\boxed{391}";
  CHECK(tok.encode(text) == tok.encode(text));
}

TEST_CASE("offsets tile the text exactly") {
  const BpeTokenizer& tok = split_tokenizer();
  for (std::string text : {std::string("So the answer is \\boxed{42}."),
                           std::string("prefix <|endoftext|> suffix"),
                           std::string("数学の問題 and 3,150 dollars\nnew line")}) {
    auto spans = tok.encode_with_offsets(text);
    size_t at = 0;
    for (const auto& span : spans) {
      CHECK(span.begin == at);
      CHECK(span.end > span.begin);
      at = span.end;
    }
    CHECK(at == text.size());
  }
}

TEST_CASE("added special tokens encode as single ids") {
  const BpeTokenizer& tok = split_tokenizer();
  auto ids = tok.encode("<|endoftext|>");
  REQUIRE(ids.size() == 1);
  CHECK(ids[0] == 0);
}
