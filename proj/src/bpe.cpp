#include "tops/bpe.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "tops/unicode_ranges.inc"

namespace tops {

namespace {

using json = nlohmann::json;

bool in_ranges(uint32_t cp, const uint32_t ranges[][2], size_t count) {
  size_t lo = 0, hi = count;
  while (lo < hi) {
    size_t mid = (lo + hi) / 2;
    if (cp > ranges[mid][1]) {
      lo = mid + 1;
    } else if (cp < ranges[mid][0]) {
      hi = mid;
    } else {
      return true;
    }
  }
  return false;
}

bool is_letter(uint32_t cp) { return in_ranges(cp, detail::kLetterRanges, detail::kLetterRanges_count); }
bool is_number(uint32_t cp) { return in_ranges(cp, detail::kNumberRanges, detail::kNumberRanges_count); }
bool is_space_cp(uint32_t cp) { return in_ranges(cp, detail::kSpaceRanges, detail::kSpaceRanges_count); }
bool is_newline(uint32_t cp) { return cp == '\r' || cp == '\n'; }

// Decodes one UTF-8 character; malformed bytes are treated as single-byte
// codepoints, matching how byte-level BPE tolerates arbitrary input.
size_t utf8_decode(std::string_view s, size_t pos, uint32_t& cp) {
  uint8_t c0 = static_cast<uint8_t>(s[pos]);
  if (c0 < 0x80) {
    cp = c0;
    return 1;
  }
  if ((c0 >> 5) == 0x6 && pos + 1 < s.size()) {
    cp = (uint32_t(c0 & 0x1F) << 6) | (uint8_t(s[pos + 1]) & 0x3F);
    return 2;
  }
  if ((c0 >> 4) == 0xE && pos + 2 < s.size()) {
    cp = (uint32_t(c0 & 0x0F) << 12) | ((uint8_t(s[pos + 1]) & 0x3F) << 6) |
         (uint8_t(s[pos + 2]) & 0x3F);
    return 3;
  }
  if ((c0 >> 3) == 0x1E && pos + 3 < s.size()) {
    cp = (uint32_t(c0 & 0x07) << 18) | ((uint8_t(s[pos + 1]) & 0x3F) << 12) |
         ((uint8_t(s[pos + 2]) & 0x3F) << 6) | (uint8_t(s[pos + 3]) & 0x3F);
    return 4;
  }
  cp = c0;
  return 1;
}

std::string codepoint_to_utf8(uint32_t cp) {
  std::string out;
  if (cp <= 0x7F) {
    out.push_back(char(cp));
  } else if (cp <= 0x7FF) {
    out.push_back(char(0xC0 | (cp >> 6)));
    out.push_back(char(0x80 | (cp & 0x3F)));
  } else if (cp <= 0xFFFF) {
    out.push_back(char(0xE0 | (cp >> 12)));
    out.push_back(char(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(char(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(char(0xF0 | (cp >> 18)));
    out.push_back(char(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(char(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(char(0x80 | (cp & 0x3F)));
  }
  return out;
}

uint64_t pack_pair(int a, int b) {
  return (uint64_t(uint32_t(a)) << 32) | uint32_t(b);
}

enum class CharClass { letter, number, space, newline, apostrophe, other };

CharClass classify(uint32_t cp) {
  if (is_newline(cp)) return CharClass::newline;
  if (cp == '\'') return CharClass::apostrophe;
  if (is_space_cp(cp)) return CharClass::space;
  if (is_letter(cp)) return CharClass::letter;
  if (is_number(cp)) return CharClass::number;
  return CharClass::other;
}

}  // namespace

BpeTokenizer BpeTokenizer::load(const std::filesystem::path& tokenizer_json) {
  std::ifstream in(tokenizer_json);
  if (!in) throw std::runtime_error("cannot open tokenizer file: " + tokenizer_json.string());
  json doc = json::parse(in);
  BpeTokenizer tok = from_json(doc);
  tok.loaded_from_ = tokenizer_json;
  return tok;
}

BpeTokenizer BpeTokenizer::from_json(const json& doc) {
  BpeTokenizer tok;
  if (doc.contains("normalizer") && !doc.at("normalizer").is_null()) {
    std::string type = doc.at("normalizer").value("type", "");
    // NFC is accepted as identity; pipeline text is composed already.
    if (type != "NFC") throw std::runtime_error("unsupported tokenizer normalizer: " + type);
  }
  tok.parse_model(doc);
  tok.parse_pre_tokenizer(doc);
  tok.parse_added_tokens(doc);
  tok.build_byte_table();
  return tok;
}

void BpeTokenizer::parse_model(const json& doc) {
  const json& model = doc.at("model");
  std::string type = model.value("type", "BPE");
  if (type != "BPE") throw std::runtime_error("unsupported tokenizer model type: " + type);
  if (model.value("byte_fallback", false)) {
    throw std::runtime_error("byte_fallback tokenizers are not supported");
  }

  const json& vocab = model.at("vocab");
  token_to_id_.reserve(vocab.size());
  for (auto it = vocab.begin(); it != vocab.end(); ++it) {
    token_to_id_.emplace(it.key(), it.value().get<int>());
  }

  const json& merges = model.at("merges");
  merges_.reserve(merges.size());
  for (const json& m : merges) {
    std::string left, right;
    if (m.is_string()) {
      std::string s = m.get<std::string>();
      size_t sp = s.find(' ');
      if (sp == std::string::npos) continue;
      left = s.substr(0, sp);
      right = s.substr(sp + 1);
    } else if (m.is_array() && m.size() == 2) {
      left = m[0].get<std::string>();
      right = m[1].get<std::string>();
    } else {
      continue;
    }
    auto l = token_to_id_.find(left);
    auto r = token_to_id_.find(right);
    auto merged = token_to_id_.find(left + right);
    if (l == token_to_id_.end() || r == token_to_id_.end() || merged == token_to_id_.end()) {
      continue;
    }
    merge_map_.emplace(pack_pair(l->second, r->second),
                       std::make_pair(int(merges_.size()), merged->second));
    merges_.emplace_back(l->second, r->second);
  }
}

void BpeTokenizer::parse_pre_tokenizer(const json& doc) {
  if (!doc.contains("pre_tokenizer") || doc.at("pre_tokenizer").is_null()) {
    throw std::runtime_error("tokenizer file lacks a pre_tokenizer");
  }

  bool have_split_regex = false;
  bool have_byte_level = false;

  auto handle_node = [&](const json& node) {
    std::string type = node.value("type", "");
    if (type == "ByteLevel") {
      have_byte_level = true;
      if (node.value("add_prefix_space", false)) {
        throw std::runtime_error("add_prefix_space=true is not supported");
      }
      if (node.value("use_regex", true) && !have_split_regex) {
        // GPT-2 split pattern
        rules_.ci_contractions = false;
        rules_.letter_prefix = LetterPrefix::space_only;
        rules_.digit_mode = DigitMode::run_with_space;
        rules_.punct_newline_suffix = false;
        rules_.newline_run_branch = false;
        have_split_regex = true;
      }
    } else if (type == "Split") {
      std::string behavior = node.value("behavior", "Isolated");
      if (behavior != "Isolated") {
        throw std::runtime_error("unsupported Split behavior: " + behavior);
      }
      if (node.value("invert", false)) throw std::runtime_error("inverted Split is not supported");
      std::string pattern;
      if (node.contains("pattern") && node.at("pattern").is_object()) {
        pattern = node.at("pattern").value("Regex", "");
      }
      if (pattern.empty()) throw std::runtime_error("Split pre_tokenizer lacks a Regex pattern");

      rules_.ci_contractions = pattern.find("(?i:") != std::string::npos;
      rules_.punct_newline_suffix = pattern.find("[\\r\\n]*") != std::string::npos;
      rules_.newline_run_branch = pattern.find("\\s*[\\r\\n]+") != std::string::npos;
      rules_.letter_prefix = pattern.find("[^\\r\\n\\p{L}\\p{N}]?\\p{L}+") != std::string::npos
                                 ? LetterPrefix::any_non_newline
                                 : LetterPrefix::space_only;
      if (pattern.find("\\p{N}{1,3}") != std::string::npos) {
        rules_.digit_mode = DigitMode::up_to_three;
      } else if (pattern.find("\\p{N}+") != std::string::npos) {
        rules_.digit_mode = DigitMode::run_with_space;
      } else if (pattern.find("\\p{N}") != std::string::npos) {
        rules_.digit_mode = DigitMode::single;
      } else {
        throw std::runtime_error("unrecognized Split pattern: " + pattern);
      }
      have_split_regex = true;
    } else if (type == "Sequence") {
      return;  // children handled by the caller
    } else {
      throw std::runtime_error("unsupported pre_tokenizer type: " + type);
    }
  };

  const json& pre = doc.at("pre_tokenizer");
  if (pre.value("type", "") == "Sequence") {
    for (const json& sub : pre.at("pretokenizers")) handle_node(sub);
  } else {
    handle_node(pre);
  }
  if (!have_split_regex || !have_byte_level) {
    throw std::runtime_error("pre_tokenizer must provide a split pattern and a ByteLevel stage");
  }
}

void BpeTokenizer::parse_added_tokens(const json& doc) {
  if (!doc.contains("added_tokens")) return;
  for (const json& t : doc.at("added_tokens")) {
    std::string content = t.at("content").get<std::string>();
    int id = t.at("id").get<int>();
    token_to_id_.emplace(content, id);
    added_tokens_.push_back({std::move(content), id});
  }
  std::sort(added_tokens_.begin(), added_tokens_.end(),
            [](const AddedToken& a, const AddedToken& b) {
              return a.content.size() > b.content.size();
            });
}

void BpeTokenizer::build_byte_table() {
  // GPT-2 byte-to-unicode map: visible bytes stay themselves, the rest are
  // shifted into the U+0100.. range in order.
  int shift = 0;
  for (int b = 0; b < 256; ++b) {
    bool visible = (b >= 33 && b <= 126) || (b >= 161 && b <= 172) || (b >= 174 && b <= 255);
    uint32_t cp = visible ? uint32_t(b) : uint32_t(256 + shift++);
    auto it = token_to_id_.find(codepoint_to_utf8(cp));
    byte_initial_id_[b] = it == token_to_id_.end() ? -1 : it->second;
  }
}

// One chunk of the split pattern starting at `start`; returns one-past-end.
size_t BpeTokenizer::next_chunk_end(std::string_view text, size_t start) const {
  uint32_t cp0 = 0;
  size_t len0 = utf8_decode(text, start, cp0);
  CharClass cc0 = classify(cp0);

  // contractions: '(?:[sdmt]|ll|ve|re), case-insensitive in the cl100k family
  if (cp0 == '\'' && start + 1 < text.size()) {
    auto fold = [&](char c) {
      return rules_.ci_contractions ? char(std::tolower(static_cast<unsigned char>(c))) : c;
    };
    char c1 = fold(text[start + 1]);
    if (c1 == 's' || c1 == 't' || c1 == 'm' || c1 == 'd') return start + 2;
    if (start + 2 < text.size()) {
      char c2 = fold(text[start + 2]);
      if ((c1 == 'l' && c2 == 'l') || (c1 == 'r' && c2 == 'e') || (c1 == 'v' && c2 == 'e')) {
        return start + 3;
      }
    }
  }

  // letters with an optional one-character prefix
  {
    size_t p = start;
    if (rules_.letter_prefix == LetterPrefix::any_non_newline) {
      if (cc0 != CharClass::newline && cc0 != CharClass::letter && cc0 != CharClass::number) {
        p += len0;
      }
    } else {
      if (cp0 == ' ') p += 1;
    }
    if (p < text.size()) {
      uint32_t cp = 0;
      size_t n = utf8_decode(text, p, cp);
      if (classify(cp) == CharClass::letter) {
        while (p < text.size()) {
          n = utf8_decode(text, p, cp);
          if (classify(cp) != CharClass::letter) break;
          p += n;
        }
        return p;
      }
    }
  }

  // digits
  {
    size_t p = start;
    if (rules_.digit_mode == DigitMode::run_with_space && cp0 == ' ') p += 1;
    if (p < text.size()) {
      uint32_t cp = 0;
      size_t n = utf8_decode(text, p, cp);
      if (classify(cp) == CharClass::number) {
        size_t limit = rules_.digit_mode == DigitMode::single
                           ? 1
                           : (rules_.digit_mode == DigitMode::up_to_three
                                  ? 3
                                  : std::numeric_limits<size_t>::max());
        size_t taken = 0;
        while (p < text.size() && taken < limit) {
          n = utf8_decode(text, p, cp);
          if (classify(cp) != CharClass::number) break;
          p += n;
          ++taken;
        }
        return p;
      }
    }
  }

  // punctuation run with optional leading space
  {
    size_t p = start;
    if (cp0 == ' ') p += 1;
    size_t run_start = p;
    while (p < text.size()) {
      uint32_t cp = 0;
      size_t n = utf8_decode(text, p, cp);
      CharClass cc = classify(cp);
      if (cc == CharClass::other || cc == CharClass::apostrophe) {
        p += n;
      } else {
        break;
      }
    }
    if (p > run_start) {
      if (rules_.punct_newline_suffix) {
        while (p < text.size() && (text[p] == '\r' || text[p] == '\n')) ++p;
      }
      return p;
    }
  }

  // whitespace branches
  if (cc0 == CharClass::space || cc0 == CharClass::newline) {
    size_t ws_end = start;
    size_t last_newline = std::string_view::npos;
    while (ws_end < text.size()) {
      uint32_t cp = 0;
      size_t n = utf8_decode(text, ws_end, cp);
      CharClass cc = classify(cp);
      if (cc != CharClass::space && cc != CharClass::newline) break;
      if (cc == CharClass::newline) last_newline = ws_end;
      ws_end += n;
    }
    if (rules_.newline_run_branch && last_newline != std::string_view::npos) {
      return last_newline + 1;  // \s*[\r\n]+ ends at the final newline
    }
    if (ws_end >= text.size()) return ws_end;  // \s+(?!\S) to end of segment
    if (ws_end - start >= 2) {
      // back off one character so the final space can prefix the next chunk
      size_t p = start, prev = start;
      while (p < ws_end) {
        uint32_t cp = 0;
        prev = p;
        p += utf8_decode(text, p, cp);
      }
      return prev > start ? prev : ws_end;
    }
    return ws_end;
  }

  return start + len0;  // lone character chunk
}

void BpeTokenizer::encode_chunk(std::string_view chunk, size_t chunk_offset,
                                std::vector<TokenSpan>& out) const {
  if (chunk.empty()) return;
  std::vector<int> ids;
  std::vector<size_t> lens;  // byte length per symbol
  ids.reserve(chunk.size());
  lens.reserve(chunk.size());
  for (unsigned char byte : chunk) {
    int id = byte_initial_id_[byte];
    if (id < 0) continue;  // byte missing from vocab; cannot happen with complete files
    ids.push_back(id);
    lens.push_back(1);
  }

  while (ids.size() > 1) {
    int best_rank = std::numeric_limits<int>::max();
    size_t best_idx = 0;
    for (size_t i = 0; i + 1 < ids.size(); ++i) {
      auto it = merge_map_.find(pack_pair(ids[i], ids[i + 1]));
      if (it != merge_map_.end() && it->second.first < best_rank) {
        best_rank = it->second.first;
        best_idx = i;
      }
    }
    if (best_rank == std::numeric_limits<int>::max()) break;
    auto it = merge_map_.find(pack_pair(ids[best_idx], ids[best_idx + 1]));
    ids[best_idx] = it->second.second;
    lens[best_idx] += lens[best_idx + 1];
    ids.erase(ids.begin() + best_idx + 1);
    lens.erase(lens.begin() + best_idx + 1);
  }

  size_t at = chunk_offset;
  for (size_t i = 0; i < ids.size(); ++i) {
    out.push_back({ids[i], at, at + lens[i]});
    at += lens[i];
  }
}

std::vector<BpeTokenizer::TokenSpan> BpeTokenizer::encode_with_offsets(std::string_view text) const {
  std::vector<TokenSpan> out;

  // added tokens split the text first; the pre-tokenizer runs per segment
  size_t segment_start = 0;
  size_t pos = 0;
  auto flush_segment = [&](size_t end) {
    size_t p = segment_start;
    while (p < end) {
      size_t chunk_end = next_chunk_end(text.substr(0, end), p);
      if (chunk_end <= p) chunk_end = p + 1;
      encode_chunk(text.substr(p, chunk_end - p), p, out);
      p = chunk_end;
    }
  };

  while (pos < text.size()) {
    const AddedToken* hit = nullptr;
    if (!added_tokens_.empty()) {
      for (const AddedToken& t : added_tokens_) {
        if (t.content.size() <= text.size() - pos &&
            text.compare(pos, t.content.size(), t.content) == 0) {
          hit = &t;
          break;
        }
      }
    }
    if (hit != nullptr) {
      flush_segment(pos);
      out.push_back({hit->id, pos, pos + hit->content.size()});
      pos += hit->content.size();
      segment_start = pos;
    } else {
      uint32_t cp = 0;
      pos += utf8_decode(text, pos, cp);
    }
  }
  flush_segment(text.size());
  return out;
}

std::vector<int> BpeTokenizer::encode(std::string_view text) const {
  std::vector<int> ids;
  for (const TokenSpan& span : encode_with_offsets(text)) ids.push_back(span.id);
  return ids;
}

long long BpeTokenizer::count_tokens(std::string_view text) const {
  return static_cast<long long>(encode_with_offsets(text).size());
}

}  // namespace tops
