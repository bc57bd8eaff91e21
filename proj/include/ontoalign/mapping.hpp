#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ontoalign/ontology.hpp"

namespace ontoalign {

enum class Provenance { predicted, extended, given };

const char* to_string(Provenance p) noexcept;

struct ScoredMapping {
  ClassId source = 0;
  ClassId target = 0;
  double score = 1.0;
  Provenance provenance = Provenance::given;

  std::pair<ClassId, ClassId> key() const noexcept { return {source, target}; }
  friend bool operator==(const ScoredMapping&, const ScoredMapping&) = default;
};

enum class MappingKind { reference_eq, reference_ignored, train, val, test, output };

using PairSet = std::set<std::pair<ClassId, ClassId>>;

/// Ordered list of mappings with unique (source, target) pairs.
class MappingSet {
 public:
  MappingSet() = default;
  explicit MappingSet(MappingKind kind) : kind_(kind) {}

  MappingKind kind() const noexcept { return kind_; }
  void set_kind(MappingKind kind) noexcept { kind_ = kind; }

  /// Returns false (and leaves the set unchanged) when the pair already exists.
  bool add(const ScoredMapping& m);
  bool contains(ClassId source, ClassId target) const { return index_.count({source, target}) > 0; }
  const ScoredMapping* find(ClassId source, ClassId target) const;
  /// Inserts or raises the existing score to m.score (keeping m's provenance then).
  void add_keep_max(const ScoredMapping& m);

  const std::vector<ScoredMapping>& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  auto begin() const noexcept { return entries_.begin(); }
  auto end() const noexcept { return entries_.end(); }

  PairSet pairs() const;

  /// Same mappings with source and target swapped.
  MappingSet transposed() const;

  /// Sorts entries by (source IRI, target IRI).
  void canonicalize(const Ontology& source, const Ontology& target);

 private:
  static void sort_entries(std::vector<ScoredMapping>& entries, const Ontology& source, const Ontology& target);

  std::vector<ScoredMapping> entries_;
  std::map<std::pair<ClassId, ClassId>, std::size_t> index_;
  MappingKind kind_ = MappingKind::output;
};

struct MappingLoadResult {
  MappingSet mappings;
  std::size_t rows = 0;
  std::size_t skipped_unresolved = 0;
  std::size_t duplicates = 0;
};

/// Reads `source_iri<TAB>target_iri[<TAB>score]` rows; `#` lines are comments.
MappingLoadResult parse_mappings(std::string_view text, const Ontology& source, const Ontology& target,
                                 MappingKind kind = MappingKind::reference_eq);
MappingLoadResult load_mappings(const std::filesystem::path& path, const Ontology& source, const Ontology& target,
                                MappingKind kind = MappingKind::reference_eq);

std::string to_tsv(const MappingSet& mappings, const Ontology& source, const Ontology& target);
void save_mappings(const MappingSet& mappings, const Ontology& source, const Ontology& target,
                   const std::filesystem::path& path);

}  // namespace ontoalign
