#include "tops/types.hpp"

#include <stdexcept>

#include "tops/sha256.hpp"

namespace tops {

std::string derive_problem_id(const std::string& source, const std::string& statement) {
  return sha256_hex(source + statement);
}

std::string_view finish_reason_name(FinishReason r) {
  switch (r) {
    case FinishReason::stop: return "stop";
    case FinishReason::length: return "length";
    case FinishReason::error: return "error";
  }
  throw std::logic_error("invalid finish reason");
}

std::optional<FinishReason> finish_reason_from_name(std::string_view name) {
  if (name == "stop") return FinishReason::stop;
  if (name == "length") return FinishReason::length;
  if (name == "error") return FinishReason::error;
  return std::nullopt;
}

std::string_view reject_reason_name(RejectReason r) {
  switch (r) {
    case RejectReason::longest_wrong: return "longest_wrong";
    case RejectReason::shorter_wrong: return "shorter_wrong";
  }
  throw std::logic_error("invalid reject reason");
}

}  // namespace tops
