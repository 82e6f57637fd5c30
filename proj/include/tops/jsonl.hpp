#pragma once

#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "tops/analysis.hpp"
#include "tops/types.hpp"

namespace tops {

// Input-file violation; carries the offending file and line for exit code 2.
class SchemaError : public std::runtime_error {
 public:
  SchemaError(const std::string& file, size_t line, const std::string& what)
      : std::runtime_error(file + ":" + std::to_string(line) + ": " + what) {}
  explicit SchemaError(const std::string& what) : std::runtime_error(what) {}
};

nlohmann::json generation_to_json(const VerifiedGeneration& record);
VerifiedGeneration generation_from_json(const nlohmann::json& doc);
nlohmann::json training_example_to_json(const TrainingExample& record);
TrainingExample training_example_from_json(const nlohmann::json& doc);
nlohmann::json preference_pair_to_json(const PreferencePair& record);
nlohmann::json round_judgment_to_json(const RoundJudgment& record);

std::vector<Problem> read_problems(const std::filesystem::path& path);
std::vector<VerifiedGeneration> read_graded(const std::filesystem::path& path);
std::vector<TrainingExample> read_training_examples(const std::filesystem::path& path);

// Writers sort canonically (problem_id, then sample_index where present),
// emit one UTF-8 JSON object per line, newline-terminated, and replace the
// target atomically.
void write_graded(const std::filesystem::path& path, std::vector<VerifiedGeneration> records);
void write_training_examples(const std::filesystem::path& path,
                             std::span<const TrainingExample> records);
void write_preference_pairs(const std::filesystem::path& path,
                            std::span<const PreferencePair> records);
void write_round_judgments(const std::filesystem::path& path,
                           std::span<const RoundJudgment> records);

// Whole-file atomic write used for CSV reports and manifests.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

}  // namespace tops
