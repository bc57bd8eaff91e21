#pragma once

#include <cstddef>
#include <string>
#include <string_view>

#include "ontoalign/mapping.hpp"
#include "ontoalign/ontology.hpp"
#include "ontoalign/scoring.hpp"
#include "ontoalign/subword_index.hpp"

namespace ontoalign {

/// The mapping-set type τ.
enum class Direction { src2tgt, tgt2src, combined };

const char* to_string(Direction d) noexcept;
Direction parse_direction(std::string_view text);

struct PredictionConfig {
  std::size_t k = 200;
  Direction tau = Direction::combined;
  double lambda = 0.0;

  void validate() const;
};

struct PredictionStats {
  std::size_t classes_processed = 0;
  std::size_t classes_with_candidates = 0;
  std::size_t candidates_scored = 0;
  /// Class pairs that needed the scorer (no shared label).
  std::size_t scorer_calls = 0;
  std::size_t short_circuit_hits = 0;
  /// Candidate pairs whose scoring failed and were excluded.
  std::size_t score_unavailable = 0;
  /// Classes with candidates whose every scoring attempt failed.
  std::size_t classes_skipped = 0;

  PredictionStats& operator+=(const PredictionStats& other);
};

struct PredictionRun {
  /// Oriented (class of `src`, class of `tgt`) as passed to predict_direction,
  /// sorted by source IRI.
  MappingSet mappings;
  Direction direction = Direction::src2tgt;
  PredictionStats stats;
  std::size_t k = 0;
};

struct PredictOptions {
  std::size_t k = 200;
  std::size_t batch_size = 32;
  std::size_t workers = 1;
};

/// Top-k candidate selection, S_map scoring and per-class argmax (ties:
/// higher selection score, then ascending IRI).
PredictionRun predict_direction(const Ontology& src, const Ontology& tgt, const SubwordIndex& tgt_index,
                                const PairScorer& scorer, const PredictOptions& options,
                                Direction direction = Direction::src2tgt);

/// Union on (source, target); duplicates keep the higher score.
MappingSet combine(const MappingSet& src2tgt, const MappingSet& tgt2src);

/// Keeps mappings with score >= lambda, order and provenance preserved.
MappingSet threshold(const MappingSet& mappings, double lambda);

/// All three τ sets from one pass; tgt2src is reoriented to (O, O').
struct DirectionalMappings {
  PredictionRun src2tgt;
  PredictionRun tgt2src;
  MappingSet combined;

  const MappingSet& get(Direction d) const;
};

DirectionalMappings predict_all(const Ontology& src, const Ontology& tgt, const SubwordIndex& src_index,
                                const SubwordIndex& tgt_index, const PairScorer& scorer,
                                const PredictOptions& options);

}  // namespace ontoalign
