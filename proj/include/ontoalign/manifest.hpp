#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "ontoalign/config.hpp"

namespace ontoalign {

const char* tool_version() noexcept;

std::string sha256_hex(std::string_view data);
std::string file_sha256(const std::filesystem::path& path);

struct RunManifest {
  std::string tool_version;
  std::string config_hash;
  std::map<std::string, std::uint64_t> seeds;
  /// Input path -> SHA-256 of its content.
  std::map<std::string, std::string> input_digests;
  /// Stage name -> wall-clock milliseconds, in execution order.
  std::vector<std::pair<std::string, double>> stage_timings;
  std::string status = "ok";
  std::string failed_stage;
  std::string failure;
};

/// Hashes config and inputs; fails with an io error if any input is missing.
RunManifest make_manifest(const ExperimentConfig& config);

std::string to_json_text(const RunManifest& manifest);
/// Writes manifest.json into dir.
void emit_manifest(const RunManifest& manifest, const std::filesystem::path& dir);

}  // namespace ontoalign
