#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "ontoalign/mapping.hpp"
#include "ontoalign/ontology.hpp"
#include "ontoalign/scoring.hpp"

namespace ontoalign {

struct ExtensionConfig {
  double kappa = 0.9;
  /// Cap on frontier mappings expanded across all generations.
  std::size_t max_iterations = 1'000'000;
  std::size_t batch_size = 32;
  std::size_t workers = 1;

  void validate() const;
};

struct ExtensionResult {
  /// New mappings only (provenance extended), disjoint from the input.
  MappingSet extended;
  std::size_t generations = 0;
  std::size_t pairs_scored = 0;
  std::size_t score_failures = 0;
  bool hit_iteration_cap = false;
};

/// Iterative extension over direct parents and direct children of matched
/// pairs until a generation yields nothing new.
ExtensionResult extend(const MappingSet& seeds, const Ontology& source, const Ontology& target,
                       const PairScorer& scorer, const ExtensionConfig& config);

using Atom = std::uint32_t;

struct HornClause {
  Atom from;
  Atom to;
};

struct MappingClause {
  std::size_t mapping;
  Atom from;
  Atom to;
};

struct RepairOptions {
  /// Treat siblings as disjoint (pairs related by subsumption are exempt).
  bool sibling_disjointness = true;
  /// Use disjointness declared in the input ontologies.
  bool explicit_disjointness = true;
  /// After the greedy loop, re-admit removed mappings (highest score first)
  /// that no longer cause a mapping-induced conflict.
  bool restore_pass = true;
};

/// Propositional view of two ontologies plus candidate mappings. Source
/// classes are atoms [0, n1); target classes are atoms [n1, n1 + n2).
struct RepairProblem {
  std::size_t source_atoms = 0;
  std::size_t target_atoms = 0;
  std::vector<HornClause> horn_clauses;
  /// a ∧ b → ⊥, each pair stored once with a < b.
  std::vector<std::pair<Atom, Atom>> disjointness;
  std::vector<MappingClause> mapping_clauses;
  std::vector<ScoredMapping> mappings;
  /// (source IRI, target IRI) per mapping, for deterministic tie-breaks.
  std::vector<std::pair<std::string, std::string>> mapping_iris;
  bool restore_pass = true;

  std::size_t atom_count() const noexcept { return source_atoms + target_atoms; }
  Atom source_atom(ClassId c) const noexcept { return c; }
  Atom target_atom(ClassId c) const noexcept { return static_cast<Atom>(source_atoms + c); }
};

RepairProblem build_repair_problem(const Ontology& source, const Ontology& target, const MappingSet& mappings,
                                   const RepairOptions& options = {});

struct Removal {
  ScoredMapping mapping;
  /// Mapping-implicated unsatisfiable classes at the time of removal.
  std::size_t unsat_at_removal = 0;
};

struct RepairResult {
  MappingSet kept;
  MappingSet removed;
  std::vector<Atom> unsat_remaining;
  std::size_t unsat_before = 0;
  std::vector<Removal> removals;
  std::size_t restored = 0;
};

/// Greedy lowest-score-first removal of mappings that take part in a
/// derivation of ⊥ (ties: the pair sorting last by IRI goes first).
RepairResult repair(const RepairProblem& problem);

/// Atoms x for which forward chaining from {x} derives ⊥ using the ontology
/// clauses plus the clauses of mappings with active[i] set.
std::vector<Atom> unsatisfiable_atoms(const RepairProblem& problem, const std::vector<bool>& active);

/// JSON report: counts plus every removal with its score, IRIs resolved.
std::string repair_report_json(const RepairResult& result, const Ontology& source, const Ontology& target,
                               std::size_t input_size);

}  // namespace ontoalign
