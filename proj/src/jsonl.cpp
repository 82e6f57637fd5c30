#include "tops/jsonl.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

namespace tops {

namespace {

using json = nlohmann::json;

std::vector<json> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open input file: " + path.string());
  std::vector<json> docs;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json doc = json::parse(line, nullptr, false);
    if (doc.is_discarded()) throw SchemaError(path.string(), line_no, "invalid JSON");
    if (!doc.is_object()) throw SchemaError(path.string(), line_no, "expected a JSON object");
    docs.push_back(std::move(doc));
  }
  return docs;
}

std::string require_string(const json& doc, const char* key, const std::filesystem::path& path,
                           size_t line) {
  if (!doc.contains(key) || !doc.at(key).is_string()) {
    throw SchemaError(path.string(), line, std::string("missing string field '") + key + "'");
  }
  return doc.at(key).get<std::string>();
}

template <typename T>
void write_jsonl_atomic(const std::filesystem::path& path, const std::vector<T>& records,
                        json (*to_json)(const T&)) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open output file: " + tmp.string());
    for (const T& r : records) out << to_json(r).dump() << '\n';
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace

json generation_to_json(const VerifiedGeneration& record) {
  const Generation& g = record.generation;
  json doc;
  doc["problem_id"] = g.problem_id;
  if (g.effort) doc["effort"] = std::string(effort_name(*g.effort));
  doc["sample_index"] = g.sample_index;
  doc["seed"] = g.seed;
  doc["text"] = g.text;
  doc["finish_reason"] = std::string(finish_reason_name(g.finish_reason));
  doc["token_count"] = record.token_count;
  if (record.extracted_answer) doc["extracted_answer"] = *record.extracted_answer;
  doc["is_correct"] = record.is_correct;
  if (g.provider_reasoning_tokens) doc["provider_reasoning_tokens"] = *g.provider_reasoning_tokens;
  if (g.provider_completion_tokens) {
    doc["provider_completion_tokens"] = *g.provider_completion_tokens;
  }
  return doc;
}

VerifiedGeneration generation_from_json(const json& doc) {
  VerifiedGeneration record;
  Generation& g = record.generation;
  g.problem_id = doc.at("problem_id").get<std::string>();
  if (doc.contains("effort") && !doc.at("effort").is_null()) {
    auto effort = effort_from_name(doc.at("effort").get<std::string>());
    if (!effort) throw SchemaError("unknown effort level: " + doc.at("effort").dump());
    g.effort = *effort;
  }
  g.sample_index = doc.value("sample_index", 0);
  g.seed = doc.value("seed", 0LL);
  g.text = doc.value("text", "");
  auto reason = finish_reason_from_name(doc.value("finish_reason", "stop"));
  if (!reason) throw SchemaError("unknown finish_reason: " + doc.at("finish_reason").dump());
  g.finish_reason = *reason;
  record.token_count = doc.value("token_count", 0LL);
  if (doc.contains("extracted_answer") && !doc.at("extracted_answer").is_null()) {
    record.extracted_answer = doc.at("extracted_answer").get<std::string>();
  }
  record.is_correct = doc.value("is_correct", false);
  if (doc.contains("provider_reasoning_tokens")) {
    g.provider_reasoning_tokens = doc.at("provider_reasoning_tokens").get<long long>();
  }
  if (doc.contains("provider_completion_tokens")) {
    g.provider_completion_tokens = doc.at("provider_completion_tokens").get<long long>();
  }
  return record;
}

json training_example_to_json(const TrainingExample& record) {
  json doc;
  if (record.system) doc["system"] = *record.system;
  doc["user"] = record.user;
  doc["assistant"] = record.assistant;
  doc["provenance"] = {{"problem_id", record.provenance.problem_id},
                       {"effort", record.provenance.effort},
                       {"sample_index", record.provenance.sample_index},
                       {"token_count", record.provenance.token_count}};
  return doc;
}

TrainingExample training_example_from_json(const json& doc) {
  TrainingExample record;
  if (doc.contains("system") && !doc.at("system").is_null()) {
    record.system = doc.at("system").get<std::string>();
  }
  record.user = doc.at("user").get<std::string>();
  record.assistant = doc.at("assistant").get<std::string>();
  const json& prov = doc.at("provenance");
  record.provenance.problem_id = prov.at("problem_id").get<std::string>();
  record.provenance.effort = prov.value("effort", "");
  record.provenance.sample_index = prov.value("sample_index", 0);
  record.provenance.token_count = prov.value("token_count", 0LL);
  return record;
}

json preference_pair_to_json(const PreferencePair& record) {
  json doc;
  doc["user"] = record.user;
  doc["chosen"] = record.chosen;
  doc["rejected"] = record.rejected;
  doc["reason"] = std::string(reject_reason_name(record.reason));
  doc["chosen_tokens"] = record.chosen_tokens;
  doc["rejected_tokens"] = record.rejected_tokens;
  return doc;
}

json round_judgment_to_json(const RoundJudgment& record) {
  json doc;
  doc["problem_id"] = record.problem_id;
  doc["rounds"] = record.rounds;
  doc["wrong_rounds"] = record.wrong_rounds;
  doc["raw_judge_text"] = record.raw_judge_text;
  return doc;
}

std::vector<Problem> read_problems(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open problems file: " + path.string());
  std::vector<Problem> problems;
  std::set<std::string> seen;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json doc = json::parse(line, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) {
      throw SchemaError(path.string(), line_no, "invalid JSON object");
    }
    Problem p;
    p.statement = require_string(doc, "statement", path, line_no);
    p.gold_answer = require_string(doc, "gold_answer", path, line_no);
    if (p.statement.empty()) throw SchemaError(path.string(), line_no, "empty statement");
    if (p.gold_answer.empty()) throw SchemaError(path.string(), line_no, "empty gold_answer");
    p.source = doc.value("source", "");
    p.id = doc.value("id", "");
    if (p.id.empty()) p.id = derive_problem_id(p.source, p.statement);
    if (doc.contains("tags")) {
      for (const auto& [k, v] : doc.at("tags").items()) {
        p.tags[k] = v.is_string() ? v.get<std::string>() : v.dump();
      }
    }
    if (!seen.insert(p.id).second) {
      throw SchemaError(path.string(), line_no, "duplicate problem id: " + p.id);
    }
    problems.push_back(std::move(p));
  }
  return problems;
}

std::vector<VerifiedGeneration> read_graded(const std::filesystem::path& path) {
  std::vector<VerifiedGeneration> records;
  size_t line_no = 0;
  for (const json& doc : read_lines(path)) {
    ++line_no;
    try {
      records.push_back(generation_from_json(doc));
    } catch (const json::exception& e) {
      throw SchemaError(path.string(), line_no, e.what());
    }
  }
  return records;
}

std::vector<TrainingExample> read_training_examples(const std::filesystem::path& path) {
  std::vector<TrainingExample> records;
  size_t line_no = 0;
  for (const json& doc : read_lines(path)) {
    ++line_no;
    try {
      records.push_back(training_example_from_json(doc));
    } catch (const json::exception& e) {
      throw SchemaError(path.string(), line_no, e.what());
    }
  }
  return records;
}

void write_graded(const std::filesystem::path& path, std::vector<VerifiedGeneration> records) {
  std::sort(records.begin(), records.end(),
            [](const VerifiedGeneration& a, const VerifiedGeneration& b) {
              if (a.generation.problem_id != b.generation.problem_id) {
                return a.generation.problem_id < b.generation.problem_id;
              }
              if (a.generation.effort != b.generation.effort) {
                return a.generation.effort < b.generation.effort;
              }
              return a.generation.sample_index < b.generation.sample_index;
            });
  write_jsonl_atomic(path, records, generation_to_json);
}

void write_training_examples(const std::filesystem::path& path,
                             std::span<const TrainingExample> records) {
  std::vector<TrainingExample> sorted(records.begin(), records.end());
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const TrainingExample& a, const TrainingExample& b) {
                     return a.provenance.problem_id < b.provenance.problem_id;
                   });
  write_jsonl_atomic(path, sorted, training_example_to_json);
}

void write_preference_pairs(const std::filesystem::path& path,
                            std::span<const PreferencePair> records) {
  std::vector<PreferencePair> sorted(records.begin(), records.end());
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const PreferencePair& a, const PreferencePair& b) {
                     return a.problem_id < b.problem_id;
                   });
  write_jsonl_atomic(path, sorted, preference_pair_to_json);
}

void write_round_judgments(const std::filesystem::path& path,
                           std::span<const RoundJudgment> records) {
  std::vector<RoundJudgment> sorted(records.begin(), records.end());
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const RoundJudgment& a, const RoundJudgment& b) {
                     return a.problem_id < b.problem_id;
                   });
  write_jsonl_atomic(path, sorted, round_judgment_to_json);
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open output file: " + tmp.string());
    out << contents;
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace tops
