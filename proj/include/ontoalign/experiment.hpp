#pragma once

#include <filesystem>
#include <string>

#include "ontoalign/config.hpp"

namespace ontoalign {

struct ExperimentOutcome {
  std::filesystem::path output_dir;
  /// Contents of summary.json.
  std::string summary_json;
};

/// split → optional corpus/fine-tune → predict → validate (τ, λ) → extend →
/// validate λ → repair → test evaluation. Every intermediate artifact lands in
/// config.output; on failure the error names the stage and artifacts written
/// so far are kept, together with a manifest recording the failure.
ExperimentOutcome run_experiment(const ExperimentConfig& config);

}  // namespace ontoalign
