#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "ontoalign/mapping.hpp"
#include "ontoalign/prediction.hpp"

namespace ontoalign {

enum class SplitMode { unsupervised, semi_supervised };

const char* to_string(SplitMode mode) noexcept;
SplitMode parse_split_mode(std::string_view text);

struct SplitSpec {
  SplitMode mode = SplitMode::unsupervised;
  double train = 0.0;
  double val = 0.1;
  double test = 0.9;
  std::uint64_t seed = 42;

  /// 0/10/90 unsupervised, 20/10/70 semi-supervised.
  static SplitSpec defaults(SplitMode mode, std::uint64_t seed = 42);
  void validate() const;
};

struct ReferenceSplit {
  MappingSet train{MappingKind::train};
  MappingSet val{MappingKind::val};
  MappingSet test{MappingKind::test};
};

/// Seeded shuffle, then train/val/test by rounded fractions; the parts are
/// disjoint and their union is the input.
ReferenceSplit split_references(const MappingSet& refs, const SplitSpec& spec);

struct EvalReport {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t true_positives = 0;
  /// |out \ ignored| and |refs \ ignored|.
  std::size_t output_considered = 0;
  std::size_t reference_considered = 0;
  std::size_t ignored_size = 0;
  bool precision_undefined = false;
  bool recall_undefined = false;
  Direction tau = Direction::combined;
  double lambda = 0.0;
};

/// Set arithmetic on (source, target) pairs; scores are ignored. Ignored
/// pairs count neither as correct nor as incorrect.
EvalReport evaluate(const PairSet& out, const PairSet& refs, const PairSet& ignored);
EvalReport evaluate(const MappingSet& out, const MappingSet& refs, const MappingSet& ignored);

/// Union of several sets' pairs.
PairSet pair_union(std::initializer_list<const MappingSet*> sets);

std::vector<double> default_lambda_grid();

struct GridCell {
  Direction tau;
  double lambda;
  EvalReport report;
};

struct ValidationResult {
  Direction tau = Direction::combined;
  double lambda = 0.0;
  EvalReport best;
  std::vector<GridCell> grid;
};

/// Evaluates every (τ, λ) cell and returns the best F1 (ties: larger λ, then
/// src2tgt before tgt2src before combined).
ValidationResult validate_hyperparams(const std::map<Direction, const MappingSet*>& runs, const MappingSet& val,
                                      const PairSet& ignored, std::span<const double> lambda_grid);

/// CSV with header direction,lambda,precision,recall,f1.
std::string grid_csv(const std::vector<GridCell>& grid);

}  // namespace ontoalign
