#include "tops/manifest.hpp"

#include <nlohmann/json.hpp>

#include "tops/jsonl.hpp"
#include "tops/sha256.hpp"

namespace tops {

void add_input_file(RunManifest& manifest, const std::filesystem::path& path) {
  manifest.input_digests[path.filename().string()] = sha256_file_hex(path.string());
}

void add_output_file(RunManifest& manifest, const std::filesystem::path& path) {
  manifest.output_digests[path.filename().string()] = sha256_file_hex(path.string());
}

void write_manifest(const std::filesystem::path& out_dir, const RunManifest& manifest) {
  nlohmann::json doc;
  doc["stage"] = manifest.stage;
  doc["input_digests"] = manifest.input_digests;
  doc["output_digests"] = manifest.output_digests;
  doc["record_counts"] = manifest.record_counts;
  doc["error_count"] = manifest.error_count;
  doc["duration_s"] = manifest.duration_s;
  write_file_atomic(out_dir / (manifest.stage + ".manifest.json"), doc.dump(2) + "\n");
}

}  // namespace tops
