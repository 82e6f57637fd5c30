#include "tops/pipeline.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include "tops/analysis.hpp"
#include "tops/answer.hpp"
#include "tops/bpe.hpp"
#include "tops/client.hpp"
#include "tops/jsonl.hpp"
#include "tops/manifest.hpp"
#include "tops/seed.hpp"
#include "tops/select.hpp"
#include "tops/token_stats.hpp"

#include <nlohmann/json.hpp>

namespace tops {

namespace {

using json = nlohmann::json;

class StageTimer {
 public:
  StageTimer() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

BpeTokenizer load_reference_tokenizer(const PipelineConfig& config) {
  if (config.reference_tokenizer.empty()) {
    throw SchemaError("config lacks reference_tokenizer");
  }
  return BpeTokenizer::load(config.reference_tokenizer);
}

std::map<std::string, Problem> problems_by_id(const std::vector<Problem>& problems) {
  std::map<std::string, Problem> map;
  for (const Problem& p : problems) map.emplace(p.id, p);
  return map;
}

std::string csv_number(double value) {
  std::ostringstream out;
  out.precision(6);
  out << std::fixed << value;
  std::string s = out.str();
  while (!s.empty() && s.back() == '0') s.pop_back();
  if (!s.empty() && s.back() == '.') s.pop_back();
  return s;
}

uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Judge-rescue pass for rule-graded-incorrect records; flips to correct on a
// strict YES, never the other way.
void maybe_rescue(const PipelineConfig& config, const std::map<std::string, Problem>& problems,
                  std::vector<VerifiedGeneration>& graded) {
  if (!config.judge_rescue || config.judge.base_url.empty()) return;
  ChatClient judge(config.judge, config.cache_dir / "judge");
  for (VerifiedGeneration& record : graded) {
    if (record.is_correct || record.generation.finish_reason == FinishReason::error) continue;
    auto it = problems.find(record.generation.problem_id);
    if (it == problems.end()) continue;
    std::string prompt =
        render_format_rescue_prompt(it->second, record.generation.text, it->second.gold_answer);
    auto reply = judge.judge_call(prompt, config.judge_temperature);
    if (!reply) continue;
    auto verdict = parse_yes_no_verdict(*reply);
    if (!verdict) {
      std::cerr << "judge verdict unparseable for " << record.generation.problem_id
                << "; grading unchanged\n";
      continue;
    }
    apply_format_rescue(record, verdict);
  }
}

}  // namespace

StageReport cmd_generate(const PipelineConfig& config, const GenerateOptions& options) {
  StageTimer timer;
  RunManifest manifest;
  manifest.stage = "generate";
  add_input_file(manifest, options.problems_file);

  std::vector<Problem> problems = read_problems(options.problems_file);
  BpeTokenizer tokenizer = load_reference_tokenizer(config);

  SamplingParams params = config.sampling;
  if (options.n_samples) params.n_samples = *options.n_samples;
  if (options.base_seed) params.base_seed = *options.base_seed;

  ChatClient client(config.generation, config.cache_dir / "generation");
  BatchReport batch;
  std::vector<Generation> generations =
      client.sample_batch(problems, options.effort, params, config.prompts, options.retry_errors,
                          &batch);
  if (batch.fetched > 0 && batch.errors >= batch.total && batch.from_cache == 0) {
    throw EndpointExhausted("every request to " + config.generation.base_url + " failed");
  }

  auto by_id = problems_by_id(problems);
  std::vector<VerifiedGeneration> graded;
  graded.reserve(generations.size());
  for (const Generation& g : generations) {
    graded.push_back(grade(g, by_id.at(g.problem_id).gold_answer, tokenizer));
  }
  maybe_rescue(config, by_id, graded);

  std::filesystem::create_directories(config.out_dir);
  std::string effort_tag =
      options.effort ? std::string(effort_name(*options.effort)) : std::string("none");
  std::filesystem::path out_path =
      options.output.value_or(config.out_dir / ("generations_" + effort_tag + ".jsonl"));
  write_graded(out_path, graded);

  manifest.record_counts["problems"] = static_cast<long long>(problems.size());
  manifest.record_counts["generations"] = static_cast<long long>(graded.size());
  manifest.record_counts["from_cache"] = static_cast<long long>(batch.from_cache);
  manifest.record_counts["fetched"] = static_cast<long long>(batch.fetched);
  manifest.error_count = static_cast<long long>(batch.errors);
  add_output_file(manifest, out_path);
  manifest.duration_s = timer.seconds();
  write_manifest(config.out_dir, manifest);

  return {out_path, {out_path}, graded.size(), batch.errors};
}

StageReport cmd_curate_seed(const PipelineConfig& config, const CurateSeedOptions& options) {
  StageTimer timer;
  RunManifest manifest;
  manifest.stage = "curate-seed";
  add_input_file(manifest, options.problems_file);
  add_input_file(manifest, options.low_file);
  add_input_file(manifest, options.medium_file);
  add_input_file(manifest, options.high_file);

  auto problems = problems_by_id(read_problems(options.problems_file));

  std::array<std::filesystem::path, 3> files = {options.low_file, options.medium_file,
                                                options.high_file};
  std::array<std::map<std::string, VerifiedGeneration>, 3> per_effort;
  for (int rank = 0; rank < 3; ++rank) {
    for (VerifiedGeneration& record : read_graded(files[rank])) {
      std::string id = record.generation.problem_id;
      if (!per_effort[rank].emplace(id, std::move(record)).second) {
        throw SchemaError(files[rank].string() + ": more than one response for problem " + id);
      }
    }
  }

  // the three files must cover the same problems
  for (int rank = 1; rank < 3; ++rank) {
    std::ostringstream diff;
    for (const auto& [id, _] : per_effort[0]) {
      if (per_effort[rank].count(id) == 0) diff << ' ' << id;
    }
    for (const auto& [id, _] : per_effort[rank]) {
      if (per_effort[0].count(id) == 0) diff << " +" << id;
    }
    if (!diff.str().empty()) {
      throw SchemaError(files[rank].string() + " does not cover the same problems as " +
                        files[0].string() + ":" + diff.str());
    }
  }

  std::vector<EffortTriple> triples;
  triples.reserve(per_effort[0].size());
  for (const auto& [id, low] : per_effort[0]) {
    auto problem_it = problems.find(id);
    if (problem_it == problems.end()) {
      throw SchemaError("graded file references unknown problem: " + id);
    }
    EffortTriple triple;
    triple.problem = problem_it->second;
    triple.responses = {low, per_effort[1].at(id), per_effort[2].at(id)};
    triples.push_back(std::move(triple));
  }

  std::vector<EffortTriple> all_correct = filter_all_correct(std::move(triples));
  std::vector<OrderedTriple> kept;
  for (const EffortTriple& t : all_correct) {
    if (auto ordered = reorder_and_gap_filter(t, config.gap_tokens)) {
      kept.push_back(std::move(*ordered));
    }
  }

  std::vector<TrainingExample> dataset = build_seed_dataset(kept, config.prompts);
  SeedStats stats = seed_stats(kept);

  std::filesystem::create_directories(config.out_dir);
  std::filesystem::path dataset_path =
      options.dataset_output.value_or(config.out_dir / "seed_dataset.jsonl");
  std::filesystem::path stats_path =
      options.stats_output.value_or(config.out_dir / "seed_stats.csv");
  write_training_examples(dataset_path, dataset);

  std::ostringstream csv;
  csv << "problems,low,medium,high\n";
  csv << stats.problems << ',' << csv_number(stats.mean_tokens[0]) << ','
      << csv_number(stats.mean_tokens[1]) << ',' << csv_number(stats.mean_tokens[2]) << '\n';
  write_file_atomic(stats_path, csv.str());

  manifest.record_counts["triples_in"] = static_cast<long long>(per_effort[0].size());
  manifest.record_counts["triples_all_correct"] = static_cast<long long>(all_correct.size());
  manifest.record_counts["triples_kept"] = static_cast<long long>(kept.size());
  manifest.record_counts["seed_records"] = static_cast<long long>(dataset.size());
  add_output_file(manifest, dataset_path);
  add_output_file(manifest, stats_path);
  manifest.duration_s = timer.seconds();
  write_manifest(config.out_dir, manifest);

  return {dataset_path, {dataset_path, stats_path}, dataset.size(), 0};
}

StageReport cmd_select(const PipelineConfig& config, const SelectOptions& options) {
  StageTimer timer;
  RunManifest manifest;
  manifest.stage = "select";
  add_input_file(manifest, options.problems_file);
  for (const auto& f : options.generations_files) add_input_file(manifest, f);

  auto problems = problems_by_id(read_problems(options.problems_file));

  std::map<std::string, std::vector<VerifiedGeneration>> candidates;
  for (const auto& file : options.generations_files) {
    for (VerifiedGeneration& record : read_graded(file)) {
      candidates[record.generation.problem_id].push_back(std::move(record));
    }
  }

  std::map<std::string, VerifiedGeneration> selections;
  for (auto& [id, group] : candidates) {
    std::optional<VerifiedGeneration> pick =
        options.mode == SelectMode::shortest
            ? select_shortest_correct(group)
            : select_random_correct(group, options.rng_seed);
    if (pick) selections.emplace(id, std::move(*pick));
  }

  std::vector<TrainingExample> seed_low;
  if (options.seed_dataset_file) {
    add_input_file(manifest, *options.seed_dataset_file);
    for (TrainingExample& ex : read_training_examples(*options.seed_dataset_file)) {
      if (ex.provenance.effort == "low") seed_low.push_back(std::move(ex));
    }
  }

  BuildTopOptions build_options;
  build_options.neutral_system_prompt = config.neutral_system_prompt;
  build_options.log = [](const std::string& message) { std::cerr << message << '\n'; };
  std::vector<TrainingExample> dataset =
      build_top_dataset(selections, problems, seed_low, build_options);

  std::filesystem::create_directories(config.out_dir);
  std::filesystem::path out_path = options.output.value_or(
      config.out_dir /
      (options.mode == SelectMode::shortest ? "top_dataset.jsonl" : "random_dataset.jsonl"));
  write_training_examples(out_path, dataset);

  manifest.record_counts["problems_with_candidates"] = static_cast<long long>(candidates.size());
  manifest.record_counts["selections"] = static_cast<long long>(selections.size());
  manifest.record_counts["seed_low_merged"] = static_cast<long long>(seed_low.size());
  manifest.record_counts["records"] = static_cast<long long>(dataset.size());
  add_output_file(manifest, out_path);
  manifest.duration_s = timer.seconds();
  write_manifest(config.out_dir, manifest);

  return {out_path, {out_path}, dataset.size(), 0};
}

StageReport cmd_pairs(const PipelineConfig& config, const PairsOptions& options) {
  StageTimer timer;
  RunManifest manifest;
  manifest.stage = "pairs";
  add_input_file(manifest, options.problems_file);
  add_input_file(manifest, options.samples_file);

  auto problems = problems_by_id(read_problems(options.problems_file));

  std::map<std::string, std::vector<VerifiedGeneration>> grouped;
  for (VerifiedGeneration& record : read_graded(options.samples_file)) {
    grouped[record.generation.problem_id].push_back(std::move(record));
  }

  std::vector<ProblemSamples> samples;
  samples.reserve(grouped.size());
  for (auto& [id, group] : grouped) {
    auto it = problems.find(id);
    if (it == problems.end()) throw SchemaError("samples reference unknown problem: " + id);
    samples.push_back({it->second, std::move(group)});
  }

  BuildTopOptions build_options;
  build_options.neutral_system_prompt = config.neutral_system_prompt;
  std::vector<TrainingExample> sft = build_iter_sft(samples, build_options);
  std::vector<PreferencePair> pairs = build_preference_pairs(samples);

  std::filesystem::create_directories(config.out_dir);
  std::filesystem::path sft_path = options.sft_output.value_or(config.out_dir / "iter_sft.jsonl");
  std::filesystem::path dpo_path = options.dpo_output.value_or(config.out_dir / "dpo_pairs.jsonl");
  write_training_examples(sft_path, sft);
  write_preference_pairs(dpo_path, pairs);

  manifest.record_counts["problems"] = static_cast<long long>(samples.size());
  manifest.record_counts["sft_records"] = static_cast<long long>(sft.size());
  manifest.record_counts["dpo_pairs"] = static_cast<long long>(pairs.size());
  add_output_file(manifest, sft_path);
  add_output_file(manifest, dpo_path);
  manifest.duration_s = timer.seconds();
  write_manifest(config.out_dir, manifest);

  return {sft_path, {sft_path, dpo_path}, sft.size() + pairs.size(), 0};
}

StageReport cmd_analyze(const PipelineConfig& config, const AnalyzeOptions& options) {
  StageTimer timer;
  RunManifest manifest;
  manifest.stage = "analyze";
  std::filesystem::create_directories(config.out_dir);

  StageReport report;

  if (!options.accuracy_runs.empty()) {
    for (const auto& f : options.accuracy_runs) add_input_file(manifest, f);
    std::vector<std::vector<VerifiedGeneration>> runs;
    runs.reserve(options.accuracy_runs.size());
    for (const auto& f : options.accuracy_runs) runs.push_back(read_graded(f));
    AccuracyReportRow row =
        accuracy_report(options.benchmark.value_or("benchmark"), runs);
    std::ostringstream csv;
    csv << "benchmark,mean_accuracy,std_accuracy,mean_tokens\n";
    csv << row.benchmark << ',' << csv_number(row.mean_accuracy) << ','
        << csv_number(row.std_accuracy) << ',' << csv_number(row.mean_tokens) << '\n';
    std::filesystem::path path = options.output.value_or(config.out_dir / "accuracy.csv");
    write_file_atomic(path, csv.str());
    add_output_file(manifest, path);
    report.primary_output = path;
    report.outputs.push_back(path);
    report.records = runs.size();
  } else if (options.distinct_file) {
    add_input_file(manifest, *options.distinct_file);
    std::map<std::string, std::vector<VerifiedGeneration>> grouped;
    for (VerifiedGeneration& record : read_graded(*options.distinct_file)) {
      grouped[record.generation.problem_id].push_back(std::move(record));
    }
    if (grouped.empty()) throw SchemaError("distinct-answer input holds no records");
    std::ostringstream csv;
    csv << "problem_id,distinct_answers\n";
    double sum = 0.0;
    for (const auto& [id, samples] : grouped) {
      int n = distinct_answers(samples);
      sum += n;
      csv << id << ',' << n << '\n';
    }
    csv << "mean," << csv_number(sum / static_cast<double>(grouped.size())) << '\n';
    std::filesystem::path path = options.output.value_or(config.out_dir / "distinct_answers.csv");
    write_file_atomic(path, csv.str());
    add_output_file(manifest, path);
    report.primary_output = path;
    report.outputs.push_back(path);
    report.records = grouped.size();
  } else if (options.rounds_file) {
    if (!options.problems_file) throw SchemaError("--rounds requires --problems");
    add_input_file(manifest, *options.rounds_file);
    add_input_file(manifest, *options.problems_file);
    auto problems = problems_by_id(read_problems(*options.problems_file));
    std::vector<VerifiedGeneration> records = read_graded(*options.rounds_file);

    if (options.rounds_subsample && *options.rounds_subsample < records.size()) {
      // deterministic Fisher-Yates prefix under the explicit subsample seed
      std::vector<VerifiedGeneration> pool = std::move(records);
      uint64_t state = options.subsample_seed;
      for (size_t i = 0; i < *options.rounds_subsample; ++i) {
        state = splitmix64(state);
        size_t j = i + size_t(state % (pool.size() - i));
        std::swap(pool[i], pool[j]);
      }
      pool.resize(*options.rounds_subsample);
      records = std::move(pool);
    }

    ChatClient judge(config.judge, config.cache_dir / "judge");

    // render per-record prompts up front, then judge with bounded parallelism
    std::vector<std::string> prompts_by_record(records.size());
    for (size_t i = 0; i < records.size(); ++i) {
      auto it = problems.find(records[i].generation.problem_id);
      if (it == problems.end()) {
        throw SchemaError("rounds input references unknown problem: " +
                          records[i].generation.problem_id);
      }
      prompts_by_record[i] = render_round_judge_prompt(it->second, records[i].generation.text,
                                                       it->second.gold_answer);
    }

    std::vector<std::optional<std::string>> replies(records.size());
    {
      std::atomic<size_t> next{0};
      auto worker = [&]() {
        for (;;) {
          size_t i = next.fetch_add(1);
          if (i >= records.size()) return;
          replies[i] = judge.judge_call(prompts_by_record[i], config.judge_temperature);
        }
      };
      size_t n_workers =
          std::min<size_t>(size_t(std::max(config.judge.max_in_flight, 1)),
                           std::max<size_t>(records.size(), 1));
      std::vector<std::thread> threads;
      for (size_t t = 0; t < n_workers; ++t) threads.emplace_back(worker);
      for (std::thread& t : threads) t.join();
    }

    std::vector<RoundJudgment> judgments;
    size_t invalid = 0, failures = 0;
    for (size_t i = 0; i < records.size(); ++i) {
      if (!replies[i]) {
        ++failures;
        continue;
      }
      RoundParseResult parsed =
          parse_round_judgment(records[i].generation.problem_id, *replies[i]);
      if (parsed.status != RoundParseResult::Status::ok) {
        ++invalid;
        continue;
      }
      judgments.push_back(std::move(parsed.judgment));
    }

    std::filesystem::path judgments_path = config.out_dir / "round_judgments.jsonl";
    write_round_judgments(judgments_path, judgments);
    add_output_file(manifest, judgments_path);

    std::ostringstream csv;
    csv << "mean_rounds,mean_wrong_rounds,mean_wrong_ratio,ratio_exclusions,invalid,failures\n";
    if (!judgments.empty()) {
      RoundStats stats = round_stats(judgments, options.micro_ratio);
      csv << csv_number(stats.mean_rounds) << ',' << csv_number(stats.mean_wrong_rounds) << ','
          << csv_number(stats.mean_wrong_ratio) << ',' << stats.ratio_exclusions << ',' << invalid
          << ',' << failures << '\n';
    } else {
      csv << "0,0,0,0," << invalid << ',' << failures << '\n';
    }
    std::filesystem::path path = options.output.value_or(config.out_dir / "round_stats.csv");
    write_file_atomic(path, csv.str());
    add_output_file(manifest, path);
    report.primary_output = path;
    report.outputs = {judgments_path, path};
    report.records = judgments.size();
    report.errors = invalid + failures;
  } else if (options.lengths_file) {
    add_input_file(manifest, *options.lengths_file);
    std::vector<VerifiedGeneration> records = read_graded(*options.lengths_file);
    auto rows = length_stats(records, [](const VerifiedGeneration& r) {
      return r.generation.effort ? std::string(effort_name(*r.generation.effort))
                                 : std::string("none");
    });
    std::ostringstream csv;
    csv << "group,mean_tokens,std_tokens,count\n";
    for (const LengthStatsRow& row : rows) {
      csv << row.group << ',' << csv_number(row.mean_tokens) << ',' << csv_number(row.std_tokens)
          << ',' << row.count << '\n';
    }
    std::filesystem::path path = options.output.value_or(config.out_dir / "length_stats.csv");
    write_file_atomic(path, csv.str());
    add_output_file(manifest, path);
    report.primary_output = path;
    report.outputs.push_back(path);
    report.records = records.size();
  } else {
    throw SchemaError("analyze: choose one of --run, --distinct, --rounds, --lengths");
  }

  manifest.duration_s = timer.seconds();
  write_manifest(config.out_dir, manifest);
  return report;
}

StageReport cmd_estimate_tokens(const PipelineConfig& config, const EstimateOptions& options) {
  StageTimer timer;
  RunManifest manifest;
  manifest.stage = "estimate-tokens";
  add_input_file(manifest, options.usage_file);

  std::optional<BpeTokenizer> tokenizer;  // loaded only when a row carries summary text

  std::ifstream in(options.usage_file);
  if (!in) throw SchemaError("cannot open usage file: " + options.usage_file.string());

  std::ostringstream csv;
  csv << "id,estimate_tokens,status\n";
  double sum = 0.0;
  size_t ok = 0, degenerate = 0;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json doc = json::parse(line, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) {
      throw SchemaError(options.usage_file.string(), line_no, "invalid JSON object");
    }
    std::string id = doc.value("id", std::to_string(line_no));
    TokenEstimateInputs inputs;
    if (doc.contains("summary_tokens_reference")) {
      inputs.summary_tokens_reference = doc.at("summary_tokens_reference").get<long long>();
    } else if (doc.contains("summary")) {
      if (!tokenizer) tokenizer = load_reference_tokenizer(config);
      inputs.summary_tokens_reference =
          tokenizer->count_tokens(doc.at("summary").get<std::string>());
    } else {
      throw SchemaError(options.usage_file.string(), line_no,
                        "row needs summary_tokens_reference or summary");
    }
    if (!doc.contains("reasoning_tokens_provider") || !doc.contains("completion_tokens_provider")) {
      throw SchemaError(options.usage_file.string(), line_no, "row lacks provider token counts");
    }
    inputs.reasoning_tokens_provider = doc.at("reasoning_tokens_provider").get<long long>();
    inputs.completion_tokens_provider = doc.at("completion_tokens_provider").get<long long>();

    try {
      double estimate = estimate_hidden_cot_tokens(inputs);
      sum += estimate;
      ++ok;
      csv << id << ',' << csv_number(estimate) << ",ok\n";
    } catch (const DegenerateUsage& e) {
      ++degenerate;
      csv << id << ",,degenerate:" << e.field() << '\n';
    }
  }
  csv << "mean," << (ok > 0 ? csv_number(sum / static_cast<double>(ok)) : "") << ",over "
      << ok << " records, " << degenerate << " excluded\n";

  std::filesystem::create_directories(config.out_dir);
  std::filesystem::path path = options.output.value_or(config.out_dir / "token_estimates.csv");
  write_file_atomic(path, csv.str());

  manifest.record_counts["rows"] = static_cast<long long>(ok + degenerate);
  manifest.record_counts["excluded"] = static_cast<long long>(degenerate);
  add_output_file(manifest, path);
  manifest.duration_s = timer.seconds();
  write_manifest(config.out_dir, manifest);

  return {path, {path}, ok + degenerate, degenerate};
}

}  // namespace tops
