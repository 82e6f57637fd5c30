#pragma once

#include <atomic>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "tops/effort.hpp"
#include "tops/types.hpp"

namespace tops {

struct EndpointConfig {
  std::string base_url;  // absolute URL, may carry a path prefix such as /v1
  std::string model_name;
  std::optional<std::string> api_key;
  int max_in_flight = 4;
  int retry_limit = 3;
  double timeout_s = 120.0;
  // rate-limit backoff starts here, doubles with jitter, caps at backoff_cap_ms
  int backoff_initial_ms = 1000;
  int backoff_cap_ms = 60000;
};

struct SamplingParams {
  double temperature = 1.0;
  int max_tokens = 16384;
  int n_samples = 1;
  long long base_seed = 0;
};

// Thrown when the endpoint is unreachable for every request of a stage.
class EndpointExhausted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Content-addressed response cache: one JSON document per request key under
// the cache directory. Writes go through a temp file + rename, so concurrent
// writers of the same key land identical bytes.
class ResponseCache {
 public:
  explicit ResponseCache(std::filesystem::path dir);
  std::optional<nlohmann::json> get(const std::string& key) const;
  void put(const std::string& key, const nlohmann::json& doc) const;
  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
};

// Request identity: equal keys never trigger a second network call.
std::string request_cache_key(const std::string& model_name, const std::string& request_id,
                              const std::optional<Effort>& effort, int sample_index,
                              long long seed, double temperature, int max_tokens);

struct BatchReport {
  size_t total = 0;
  size_t from_cache = 0;
  size_t fetched = 0;
  size_t errors = 0;
};

// Chat-completion client over HTTP POST {base_url}/chat/completions with
// bounded parallelism, retries with exponential backoff, and the disk cache.
// Instances are shareable across threads.
class ChatClient {
 public:
  ChatClient(EndpointConfig endpoint, std::filesystem::path cache_dir);

  // One completion; messages are [system (if present), user]; request seed =
  // params.base_seed + sample_index. Transport failure past retry_limit or a
  // non-rate-limit 4xx yields finish_reason=error.
  Generation complete(const std::optional<std::string>& system_prompt,
                      const std::string& user_prompt, const SamplingParams& params,
                      int sample_index, const std::string& request_id,
                      const std::optional<Effort>& effort = std::nullopt);

  // |problems| x n_samples generations, at most max_in_flight in flight,
  // persisted order canonical (problem_id, then sample_index). Error records
  // are emitted, never dropped. When retry_errors is set, cached error
  // records are refetched.
  std::vector<Generation> sample_batch(const std::vector<Problem>& problems,
                                       const std::optional<Effort>& effort,
                                       const SamplingParams& params, const EffortRegistry& prompts,
                                       bool retry_errors, BatchReport* report = nullptr);

  // Single-turn judge completion, temperature fixed by the caller's params,
  // cached by prompt digest. Absent on transport failure.
  std::optional<std::string> judge_call(const std::string& user_prompt, double temperature,
                                        int max_tokens = 4096);

  const EndpointConfig& endpoint() const { return endpoint_; }

 private:
  Generation fetch(const std::optional<std::string>& system_prompt, const std::string& user_prompt,
                   const SamplingParams& params, int sample_index);

  EndpointConfig endpoint_;
  ResponseCache cache_;
};

}  // namespace tops
