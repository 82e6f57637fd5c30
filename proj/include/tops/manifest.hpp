#pragma once

#include <filesystem>
#include <map>
#include <string>

namespace tops {

// Stage provenance record: digests of everything read and written, so an
// unchanged rerun can be verified byte-for-byte.
struct RunManifest {
  std::string stage;
  std::map<std::string, std::string> input_digests;
  std::map<std::string, std::string> output_digests;
  std::map<std::string, long long> record_counts;
  long long error_count = 0;
  double duration_s = 0.0;
};

void add_input_file(RunManifest& manifest, const std::filesystem::path& path);
void add_output_file(RunManifest& manifest, const std::filesystem::path& path);

// Writes <out_dir>/<stage>.manifest.json.
void write_manifest(const std::filesystem::path& out_dir, const RunManifest& manifest);

}  // namespace tops
