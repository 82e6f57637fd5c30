#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace tops {

// Byte-level BPE tokenizer loaded from the single-file JSON serialization
// (vocabulary + merges + pre-tokenization rules). Encoding is deterministic
// and the handle is immutable after load, so counting is parallel-safe.
//
// Supported layouts: ByteLevel pre-tokenizer (GPT-2 split regex), or a
// Split(Regex) + ByteLevel(use_regex=false) sequence in the cl100k/Qwen
// pattern family. An NFC normalizer entry is accepted but input text is
// assumed to already be composed.
class BpeTokenizer {
 public:
  struct TokenSpan {
    int id = 0;
    size_t begin = 0;  // byte offsets into the encoded text
    size_t end = 0;
  };

  static BpeTokenizer load(const std::filesystem::path& tokenizer_json);
  static BpeTokenizer from_json(const nlohmann::json& doc);

  std::vector<int> encode(std::string_view text) const;
  std::vector<TokenSpan> encode_with_offsets(std::string_view text) const;

  // BPE length of the text with no special tokens prepended or appended.
  long long count_tokens(std::string_view text) const;

  size_t vocab_size() const { return token_to_id_.size(); }
  const std::filesystem::path& loaded_from() const { return loaded_from_; }

 private:
  BpeTokenizer() = default;

  enum class LetterPrefix { space_only, any_non_newline };
  enum class DigitMode { single, up_to_three, run_with_space };

  struct SplitRules {
    bool ci_contractions = false;
    LetterPrefix letter_prefix = LetterPrefix::space_only;
    DigitMode digit_mode = DigitMode::run_with_space;
    bool punct_newline_suffix = false;
    bool newline_run_branch = false;
  };

  void parse_model(const nlohmann::json& doc);
  void parse_pre_tokenizer(const nlohmann::json& doc);
  void parse_added_tokens(const nlohmann::json& doc);
  void build_byte_table();

  size_t next_chunk_end(std::string_view text, size_t start) const;
  void encode_chunk(std::string_view chunk, size_t chunk_offset,
                    std::vector<TokenSpan>& out) const;

  std::unordered_map<std::string, int> token_to_id_;
  std::vector<std::pair<int, int>> merges_;
  std::unordered_map<uint64_t, std::pair<int, int>> merge_map_;  // pair -> {rank, merged id}
  struct AddedToken {
    std::string content;
    int id = 0;
  };
  std::vector<AddedToken> added_tokens_;  // sorted longest-first
  int byte_initial_id_[256] = {};
  SplitRules rules_;
  std::filesystem::path loaded_from_;
};

}  // namespace tops
