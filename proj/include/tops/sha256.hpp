#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace tops {

// FIPS 180-4 SHA-256, used for content digests (problem ids, cache keys,
// manifest entries). Returns the lowercase hex digest.
std::string sha256_hex(std::string_view data);

// Digest of a file's contents; throws std::runtime_error if unreadable.
std::string sha256_file_hex(const std::string& path);

}  // namespace tops
