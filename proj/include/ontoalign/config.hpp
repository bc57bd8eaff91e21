#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ontoalign/evaluation.hpp"
#include "ontoalign/scoring.hpp"

namespace ontoalign {

struct CorpusSettings {
  bool build = false;
  bool io = true;
  bool ids = false;
  bool co = false;
  bool cp = false;
  int negatives_per_synonym = 4;
  int soft_negatives = 2;
  int hard_negatives = 2;
  double val_fraction = 0.2;
  std::uint64_t seed = 42;
  /// Shell command run after the corpus is written; {train}, {val} and {dir}
  /// are substituted. Empty disables the fine-tuning trigger.
  std::string finetune_command;

  friend bool operator==(const CorpusSettings&, const CorpusSettings&) = default;
};

struct RefinementSettings {
  bool extend = true;
  bool repair = true;
  double kappa = 0.9;
  std::size_t max_iterations = 1'000'000;
  bool sibling_disjointness = true;
  bool restore_pass = true;

  friend bool operator==(const RefinementSettings&, const RefinementSettings&) = default;
};

struct ExperimentConfig {
  std::filesystem::path source;
  std::filesystem::path target;
  std::filesystem::path vocab;
  std::vector<std::filesystem::path> auxiliary;
  std::vector<std::string> label_properties{std::string(kRdfsLabel)};
  std::filesystem::path refs_equivalent;
  std::filesystem::path refs_ignored;
  CorpusSettings corpus;
  ScorerConfig scorer;
  std::size_t k = 200;
  RefinementSettings refinement;
  std::vector<double> lambda_grid = default_lambda_grid();
  SplitSpec split;
  std::filesystem::path output;
  std::size_t workers = 0;

  /// Cross-field constraints; throws config errors naming the field path.
  void validate() const;
  /// Input files the run reads, in a fixed order.
  std::vector<std::filesystem::path> input_files() const;
};

bool operator==(const ScorerConfig& a, const ScorerConfig& b);
bool operator==(const SplitSpec& a, const SplitSpec& b);
bool operator==(const ExperimentConfig& a, const ExperimentConfig& b);

/// Relative paths resolve against base_dir. Unknown keys are errors.
ExperimentConfig parse_config_text(std::string_view json_text, const std::filesystem::path& base_dir = {});
ExperimentConfig parse_config_toml_text(std::string_view toml_text, const std::filesystem::path& base_dir = {});
/// `.toml` files are read as TOML, anything else as JSON.
ExperimentConfig parse_config(const std::filesystem::path& path);

/// Canonical JSON (sorted keys, all fields explicit).
std::string to_json_text(const ExperimentConfig& config);

/// SHA-256 of the canonical JSON; stable under key reordering of the source file.
std::string config_hash(const ExperimentConfig& config);

}  // namespace ontoalign
