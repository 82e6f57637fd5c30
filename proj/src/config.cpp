#include "tops/config.hpp"

#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace tops {

namespace {

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open prompt file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void apply_endpoint_key(EndpointConfig& ep, const std::string& field, const std::string& value) {
  if (field == "base_url") {
    ep.base_url = value;
  } else if (field == "model") {
    ep.model_name = value;
  } else if (field == "api_key") {
    ep.api_key = value;
  } else if (field == "max_in_flight") {
    ep.max_in_flight = std::stoi(value);
  } else if (field == "retry_limit") {
    ep.retry_limit = std::stoi(value);
  } else if (field == "timeout_s") {
    ep.timeout_s = std::stod(value);
  } else if (field == "backoff_initial_ms") {
    ep.backoff_initial_ms = std::stoi(value);
  } else if (field == "backoff_cap_ms") {
    ep.backoff_cap_ms = std::stoi(value);
  } else {
    throw std::runtime_error("unknown endpoint config key: " + field);
  }
}

}  // namespace

PipelineConfig load_config(const std::filesystem::path& path) {
  PipelineConfig config;
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path.string());

  std::string line;
  size_t line_no = 0;
  std::filesystem::path base_dir = path.parent_path();
  while (std::getline(in, line)) {
    ++line_no;
    std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    size_t eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                               ": expected key = value");
    }
    std::string key = trim(stripped.substr(0, eq));
    std::string value = trim(stripped.substr(eq + 1));

    try {
      if (key.rfind("generation.", 0) == 0) {
        apply_endpoint_key(config.generation, key.substr(11), value);
      } else if (key.rfind("judge.", 0) == 0) {
        std::string field = key.substr(6);
        if (field == "temperature") {
          config.judge_temperature = std::stod(value);
        } else {
          apply_endpoint_key(config.judge, field, value);
        }
      } else if (key == "reference_tokenizer") {
        config.reference_tokenizer = base_dir / value;
      } else if (key == "gap_tokens") {
        config.gap_tokens = std::stoll(value);
        if (config.gap_tokens < 0) throw std::runtime_error("gap_tokens must be >= 0");
      } else if (key == "sampling.temperature") {
        config.sampling.temperature = std::stod(value);
      } else if (key == "sampling.max_tokens") {
        config.sampling.max_tokens = std::stoi(value);
      } else if (key == "sampling.n_samples") {
        config.sampling.n_samples = std::stoi(value);
      } else if (key == "sampling.base_seed") {
        config.sampling.base_seed = std::stoll(value);
      } else if (key == "paths.cache_dir") {
        config.cache_dir = base_dir / value;
      } else if (key == "paths.out_dir") {
        config.out_dir = base_dir / value;
      } else if (key == "seeds") {
        config.seeds.clear();
        std::istringstream ss(value);
        std::string item;
        while (std::getline(ss, item, ',')) {
          item = trim(item);
          if (!item.empty()) config.seeds.push_back(std::stoll(item));
        }
        if (config.seeds.empty()) throw std::runtime_error("seeds list must be non-empty");
      } else if (key == "neutral_system_prompt") {
        config.neutral_system_prompt = value;
      } else if (key == "judge_rescue") {
        config.judge_rescue = (value == "true" || value == "1");
      } else if (key == "prompts.low") {
        config.prompts.override_prompt(Effort::low, read_text_file(base_dir / value));
      } else if (key == "prompts.medium") {
        config.prompts.override_prompt(Effort::medium, read_text_file(base_dir / value));
      } else if (key == "prompts.high") {
        config.prompts.override_prompt(Effort::high, read_text_file(base_dir / value));
      } else {
        throw std::runtime_error("unknown config key: " + key);
      }
    } catch (const std::invalid_argument&) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                               ": bad value for " + key);
    }
  }

  apply_env_overrides(config);
  return config;
}

void apply_env_overrides(PipelineConfig& config) {
  if (const char* key = std::getenv("TOPS_API_KEY"); key != nullptr && *key != '\0') {
    if (!config.generation.api_key) config.generation.api_key = key;
    if (!config.judge.api_key) config.judge.api_key = key;
  }
  if (const char* dir = std::getenv("TOPS_CACHE_DIR"); dir != nullptr && *dir != '\0') {
    config.cache_dir = dir;
  }
}

}  // namespace tops
