#include "ontoalign/manifest.hpp"

#include <array>
#include <cstdio>
#include <memory>

#include <json.hpp>
#include <openssl/evp.h>

#include "ontoalign/error.hpp"

namespace ontoalign {

const char* tool_version() noexcept { return "0.3.0"; }

std::string sha256_hex(std::string_view data) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), data.data(), data.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest.data(), &len) != 1) {
    throw Error(ErrorCode::io, "SHA-256 computation failed");
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xF]);
  }
  return out;
}

std::string file_sha256(const std::filesystem::path& path) {
  if (!std::filesystem::is_regular_file(path)) throw Error(ErrorCode::io, "input file not found: " + path.string());
  return sha256_hex(read_file(path));
}

RunManifest make_manifest(const ExperimentConfig& config) {
  RunManifest m;
  m.tool_version = tool_version();
  m.config_hash = config_hash(config);
  m.seeds["split"] = config.split.seed;
  m.seeds["corpus"] = config.corpus.seed;
  for (const auto& path : config.input_files()) m.input_digests[path.string()] = file_sha256(path);
  return m;
}

std::string to_json_text(const RunManifest& manifest) {
  nlohmann::ordered_json doc;
  doc["tool_version"] = manifest.tool_version;
  doc["config_hash"] = manifest.config_hash;
  doc["seeds"] = manifest.seeds;
  doc["input_digests"] = manifest.input_digests;
  auto& timings = doc["stage_timings_ms"] = nlohmann::ordered_json::object();
  for (const auto& [stage, ms] : manifest.stage_timings) timings[stage] = ms;
  doc["status"] = manifest.status;
  if (!manifest.failed_stage.empty()) {
    doc["failed_stage"] = manifest.failed_stage;
    doc["failure"] = manifest.failure;
  }
  return doc.dump(2) + "\n";
}

void emit_manifest(const RunManifest& manifest, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::io, "cannot create run directory " + dir.string() + ": " + ec.message());
  write_file(dir / "manifest.json", to_json_text(manifest));
}

}  // namespace ontoalign
