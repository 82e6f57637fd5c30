#include "tops/client.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <random>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "tops/sha256.hpp"

namespace tops {

namespace {

using json = nlohmann::json;

struct ParsedUrl {
  std::string scheme_host_port;  // e.g. http://localhost:8080
  std::string path_prefix;       // e.g. /v1
};

ParsedUrl parse_base_url(const std::string& base_url) {
  auto scheme_end = base_url.find("://");
  if (scheme_end == std::string::npos) {
    throw std::invalid_argument("base_url must be absolute: " + base_url);
  }
  size_t path_start = base_url.find('/', scheme_end + 3);
  ParsedUrl out;
  if (path_start == std::string::npos) {
    out.scheme_host_port = base_url;
  } else {
    out.scheme_host_port = base_url.substr(0, path_start);
    out.path_prefix = base_url.substr(path_start);
    while (!out.path_prefix.empty() && out.path_prefix.back() == '/') out.path_prefix.pop_back();
  }
  return out;
}

std::string cache_file_name(const std::string& key) { return key + ".json"; }

// finish_reason strings seen in the wild map onto the three-valued enum
FinishReason parse_finish_reason(const std::string& raw) {
  if (raw == "stop" || raw == "eos" || raw == "stop_sequence") return FinishReason::stop;
  if (raw == "length" || raw == "max_tokens") return FinishReason::length;
  return FinishReason::error;
}

json generation_cache_doc(const Generation& g) {
  json doc;
  doc["text"] = g.text;
  doc["finish_reason"] = std::string(finish_reason_name(g.finish_reason));
  if (g.provider_reasoning_tokens) doc["provider_reasoning_tokens"] = *g.provider_reasoning_tokens;
  if (g.provider_completion_tokens) {
    doc["provider_completion_tokens"] = *g.provider_completion_tokens;
  }
  return doc;
}

void generation_from_cache_doc(const json& doc, Generation& g) {
  g.text = doc.value("text", "");
  g.finish_reason = parse_finish_reason(doc.value("finish_reason", "error"));
  if (doc.contains("provider_reasoning_tokens")) {
    g.provider_reasoning_tokens = doc.at("provider_reasoning_tokens").get<long long>();
  }
  if (doc.contains("provider_completion_tokens")) {
    g.provider_completion_tokens = doc.at("provider_completion_tokens").get<long long>();
  }
}

int jittered(int base_ms) {
  thread_local std::mt19937 rng{std::random_device{}()};
  std::uniform_int_distribution<int> dist(0, std::max(1, base_ms / 4));
  return base_ms + dist(rng);
}

}  // namespace

ResponseCache::ResponseCache(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::filesystem::create_directories(dir_);
}

std::optional<json> ResponseCache::get(const std::string& key) const {
  std::filesystem::path file = dir_ / cache_file_name(key);
  std::ifstream in(file);
  if (!in) return std::nullopt;
  json doc = json::parse(in, nullptr, false);
  if (doc.is_discarded()) return std::nullopt;  // torn write from a killed run
  return doc;
}

void ResponseCache::put(const std::string& key, const json& doc) const {
  std::filesystem::path file = dir_ / cache_file_name(key);
  std::filesystem::path tmp = file;
  tmp += ".tmp." + std::to_string(
                       std::hash<std::thread::id>{}(std::this_thread::get_id()) & 0xffff);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << doc.dump();
  }
  std::filesystem::rename(tmp, file);
}

std::string request_cache_key(const std::string& model_name, const std::string& request_id,
                              const std::optional<Effort>& effort, int sample_index,
                              long long seed, double temperature, int max_tokens) {
  json key;
  key["model"] = model_name;
  key["request_id"] = request_id;
  key["effort"] = effort ? std::string(effort_name(*effort)) : "";
  key["sample_index"] = sample_index;
  key["seed"] = seed;
  key["temperature"] = temperature;
  key["max_tokens"] = max_tokens;
  return sha256_hex(key.dump());
}

ChatClient::ChatClient(EndpointConfig endpoint, std::filesystem::path cache_dir)
    : endpoint_(std::move(endpoint)), cache_(std::move(cache_dir)) {
  if (endpoint_.max_in_flight < 1) throw std::invalid_argument("max_in_flight must be >= 1");
  parse_base_url(endpoint_.base_url);  // validate eagerly
}

Generation ChatClient::fetch(const std::optional<std::string>& system_prompt,
                             const std::string& user_prompt, const SamplingParams& params,
                             int sample_index) {
  Generation out;
  out.sample_index = sample_index;
  out.seed = params.base_seed + sample_index;
  out.temperature = params.temperature;
  out.max_tokens = params.max_tokens;
  out.finish_reason = FinishReason::error;

  json body;
  body["model"] = endpoint_.model_name;
  json messages = json::array();
  if (system_prompt) messages.push_back({{"role", "system"}, {"content", *system_prompt}});
  messages.push_back({{"role", "user"}, {"content", user_prompt}});
  body["messages"] = std::move(messages);
  body["temperature"] = params.temperature;
  body["max_tokens"] = params.max_tokens;
  body["seed"] = out.seed;
  body["n"] = 1;
  std::string payload = body.dump();

  ParsedUrl url = parse_base_url(endpoint_.base_url);
  httplib::Client http(url.scheme_host_port);
  http.set_connection_timeout(std::chrono::milliseconds(int64_t(endpoint_.timeout_s * 1000)));
  http.set_read_timeout(std::chrono::milliseconds(int64_t(endpoint_.timeout_s * 1000)));
  std::string api_key = endpoint_.api_key.value_or("");
  if (!api_key.empty()) http.set_default_headers({{"Authorization", "Bearer " + api_key}});

  int backoff_ms = endpoint_.backoff_initial_ms;
  for (int attempt = 0; attempt <= endpoint_.retry_limit; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(std::chrono::milliseconds(jittered(backoff_ms)));
      backoff_ms = std::min(backoff_ms * 2, endpoint_.backoff_cap_ms);
    }
    auto res = http.Post(url.path_prefix + "/chat/completions", payload, "application/json");
    if (!res) continue;  // transport failure, retry
    if (res->status == 429) continue;
    if (res->status >= 400 && res->status < 500) return out;  // no retry
    if (res->status >= 500) continue;

    json doc = json::parse(res->body, nullptr, false);
    if (doc.is_discarded() || !doc.contains("choices") || doc.at("choices").empty()) {
      return out;
    }
    const json& choice = doc.at("choices").at(0);
    out.text = choice.value("message", json::object()).value("content", "");
    out.finish_reason = parse_finish_reason(choice.value("finish_reason", "stop"));
    if (doc.contains("usage")) {
      const json& usage = doc.at("usage");
      if (usage.contains("completion_tokens")) {
        out.provider_completion_tokens = usage.at("completion_tokens").get<long long>();
      }
      if (usage.contains("reasoning_tokens")) {
        out.provider_reasoning_tokens = usage.at("reasoning_tokens").get<long long>();
      } else if (usage.contains("completion_tokens_details") &&
                 usage.at("completion_tokens_details").contains("reasoning_tokens")) {
        out.provider_reasoning_tokens =
            usage.at("completion_tokens_details").at("reasoning_tokens").get<long long>();
      }
    }
    return out;
  }
  return out;  // exhausted: finish_reason=error
}

Generation ChatClient::complete(const std::optional<std::string>& system_prompt,
                                const std::string& user_prompt, const SamplingParams& params,
                                int sample_index, const std::string& request_id,
                                const std::optional<Effort>& effort) {
  std::string key = request_cache_key(endpoint_.model_name, request_id, effort, sample_index,
                                      params.base_seed + sample_index, params.temperature,
                                      params.max_tokens);
  Generation out;
  out.problem_id = request_id;
  out.effort = effort;
  out.sample_index = sample_index;
  out.seed = params.base_seed + sample_index;
  out.temperature = params.temperature;
  out.max_tokens = params.max_tokens;

  if (auto cached = cache_.get(key)) {
    generation_from_cache_doc(*cached, out);
    if (out.finish_reason != FinishReason::error) return out;
  }

  Generation fetched = fetch(system_prompt, user_prompt, params, sample_index);
  out.text = fetched.text;
  out.finish_reason = fetched.finish_reason;
  out.provider_reasoning_tokens = fetched.provider_reasoning_tokens;
  out.provider_completion_tokens = fetched.provider_completion_tokens;
  cache_.put(key, generation_cache_doc(out));
  return out;
}

std::vector<Generation> ChatClient::sample_batch(const std::vector<Problem>& problems,
                                                 const std::optional<Effort>& effort,
                                                 const SamplingParams& params,
                                                 const EffortRegistry& prompts, bool retry_errors,
                                                 BatchReport* report) {
  struct Job {
    const Problem* problem;
    int sample_index;
  };
  std::vector<Job> jobs;
  jobs.reserve(problems.size() * size_t(params.n_samples));
  for (const Problem& p : problems) {
    for (int i = 0; i < params.n_samples; ++i) jobs.push_back({&p, i});
  }

  std::optional<std::string> system_prompt;
  if (effort) system_prompt = prompts.system_prompt_for(*effort);

  std::vector<Generation> results(jobs.size());
  std::atomic<size_t> next{0};
  std::atomic<size_t> from_cache{0}, fetched_n{0}, errors{0};

  auto worker = [&]() {
    for (;;) {
      size_t i = next.fetch_add(1);
      if (i >= jobs.size()) return;
      const Job& job = jobs[i];
      std::string key = request_cache_key(endpoint_.model_name, job.problem->id, effort,
                                          job.sample_index, params.base_seed + job.sample_index,
                                          params.temperature, params.max_tokens);
      Generation g;
      g.problem_id = job.problem->id;
      g.effort = effort;
      g.sample_index = job.sample_index;
      g.seed = params.base_seed + job.sample_index;
      g.temperature = params.temperature;
      g.max_tokens = params.max_tokens;

      bool need_fetch = true;
      if (auto cached = cache_.get(key)) {
        generation_from_cache_doc(*cached, g);
        if (g.finish_reason != FinishReason::error || !retry_errors) {
          need_fetch = false;
          from_cache.fetch_add(1);
        }
      }
      if (need_fetch) {
        Generation f = fetch(system_prompt, job.problem->statement, params, job.sample_index);
        g.text = f.text;
        g.finish_reason = f.finish_reason;
        g.provider_reasoning_tokens = f.provider_reasoning_tokens;
        g.provider_completion_tokens = f.provider_completion_tokens;
        cache_.put(key, generation_cache_doc(g));
        fetched_n.fetch_add(1);
      }
      if (g.finish_reason == FinishReason::error) errors.fetch_add(1);
      results[i] = std::move(g);
    }
  };

  size_t n_workers = std::min<size_t>(size_t(endpoint_.max_in_flight), std::max<size_t>(jobs.size(), 1));
  std::vector<std::thread> threads;
  threads.reserve(n_workers);
  for (size_t t = 0; t < n_workers; ++t) threads.emplace_back(worker);
  for (std::thread& t : threads) t.join();

  std::sort(results.begin(), results.end(), [](const Generation& a, const Generation& b) {
    if (a.problem_id != b.problem_id) return a.problem_id < b.problem_id;
    return a.sample_index < b.sample_index;
  });

  if (report != nullptr) {
    *report = {jobs.size(), from_cache.load(), fetched_n.load(), errors.load()};
  }
  return results;
}

std::optional<std::string> ChatClient::judge_call(const std::string& user_prompt,
                                                  double temperature, int max_tokens) {
  SamplingParams params;
  params.temperature = temperature;
  params.max_tokens = max_tokens;
  params.n_samples = 1;
  params.base_seed = 0;
  std::string request_id = "judge:" + sha256_hex(user_prompt);
  Generation g = complete(std::nullopt, user_prompt, params, 0, request_id);
  if (g.finish_reason == FinishReason::error) return std::nullopt;
  return g.text;
}

}  // namespace tops
