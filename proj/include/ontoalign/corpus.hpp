#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "ontoalign/mapping.hpp"
#include "ontoalign/ontology.hpp"

namespace ontoalign {

enum class SampleOrigin {
  intra_syn,
  identity_syn,
  soft_nonsyn,
  hard_nonsyn,
  cross_syn,
  cross_nonsyn,
  comp_syn,
  comp_soft_nonsyn,
  comp_hard_nonsyn,
};

const char* to_string(SampleOrigin origin) noexcept;
SampleOrigin parse_sample_origin(std::string_view text);

struct CorpusSample {
  std::string left;
  std::string right;
  bool is_synonym = false;
  SampleOrigin origin = SampleOrigin::intra_syn;

  friend bool operator==(const CorpusSample&, const CorpusSample&) = default;
};

struct CorpusConfig {
  bool use_ids = false;
  bool use_co = false;
  bool use_cp = false;
  /// Per synonym; soft + hard must equal this for intra/complementary corpora.
  int negatives_per_synonym = 4;
  int soft_negatives = 2;
  int hard_negatives = 2;
  std::uint64_t seed = 42;

  void validate() const;
};

struct Corpus {
  std::vector<CorpusSample> samples;
  CorpusConfig config;
  std::uint64_t seed = 0;
  /// Distinct synonyms that negatives were drawn for.
  std::size_t synonyms_sampled = 0;
  /// Negative draws requested before rejection, dedup and collision removal.
  std::size_t negatives_requested = 0;
  /// Draws abandoned after exhausting the retry budget.
  std::size_t negatives_dropped = 0;

  std::size_t synonym_count() const;
  std::size_t non_synonym_count() const;
};

/// Retries per negative draw before the draw is dropped.
inline constexpr int kNegativeRetries = 10;

Corpus build_intra_corpus(const Ontology& ontology, const CorpusConfig& config);
Corpus build_cross_corpus(const Ontology& source, const Ontology& target, const MappingSet& train,
                          const CorpusConfig& config);
Corpus build_comp_corpus(const Ontology& source, const Ontology& target, const Ontology& auxiliary,
                         const CorpusConfig& config);

struct CorpusSplit {
  Corpus train;
  Corpus val;
};

/// Union with global dedup and collision removal, then a seeded split by
/// unordered label pair so both orders of a pair land on the same side.
CorpusSplit merge_and_split(std::span<const Corpus> corpora, double val_fraction, std::uint64_t seed);

std::string to_jsonl(const Corpus& corpus);
std::vector<CorpusSample> parse_jsonl(std::string_view text);

/// Writes train.jsonl, val.jsonl and corpus_manifest.json into `dir`.
void write_corpus_files(const CorpusSplit& split, const CorpusConfig& config, double val_fraction,
                        const std::filesystem::path& dir);

}  // namespace ontoalign
