#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace tops {

// Discrete reasoning-effort level. Each level is bound to a system prompt
// that conditions how long the sampled model thinks.
enum class Effort { low = 0, medium = 1, high = 2 };

inline constexpr std::array<Effort, 3> kAllEfforts = {Effort::low, Effort::medium, Effort::high};

// Strictly monotone rank: low=0, medium=1, high=2.
int effort_rank(Effort e);

std::string_view effort_name(Effort e);
std::optional<Effort> effort_from_name(std::string_view name);

// Built-in system prompt for a level. Deterministic; identical across calls.
const std::string& system_prompt_for(Effort e);

// Prompt registry used by the pipeline. Starts with the built-in prompts;
// individual levels can be overridden from the config file so the same
// machinery runs on domains with other prompt sets.
class EffortRegistry {
 public:
  EffortRegistry();

  const std::string& system_prompt_for(Effort e) const { return prompts_[effort_rank(e)]; }
  void override_prompt(Effort e, std::string prompt);

 private:
  std::array<std::string, 3> prompts_;
};

}  // namespace tops
