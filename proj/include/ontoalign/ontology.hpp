#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace ontoalign {

using ClassId = std::uint32_t;

inline constexpr std::string_view kRdfsLabel = "http://www.w3.org/2000/01/rdf-schema#label";

struct OntologyClass {
  ClassId id = 0;
  std::string iri;
  /// Preprocessed, deduplicated labels in first-seen order.
  std::vector<std::string> labels;
  /// Sorted, duplicate-free.
  std::vector<ClassId> parents;
  std::vector<ClassId> children;
  /// Explicitly asserted disjoint classes (sorted); empty unless the input
  /// carried disjointness axioms.
  std::vector<ClassId> disjoint;
  /// False for classes only referenced (e.g. as a parent) but never declared.
  bool declared = true;

  bool labeled() const noexcept { return !labels.empty(); }
};

/// One class as read from an input file, before id assignment.
struct ClassRecord {
  std::string iri;
  std::vector<std::string> labels;
  std::vector<std::string> parents;
  std::vector<std::string> disjoint;
};

/// Immutable after construction: classes, labels and a validated subclass DAG.
class Ontology {
 public:
  Ontology() = default;

  /// Preprocesses and deduplicates labels, creates placeholder classes for
  /// undeclared references, links parents/children and rejects cycles.
  static Ontology from_records(std::string name, std::span<const ClassRecord> records);

  const std::string& name() const noexcept { return name_; }
  std::size_t size() const noexcept { return classes_.size(); }
  const OntologyClass& at(ClassId id) const;
  std::span<const OntologyClass> classes() const noexcept { return classes_; }
  std::optional<ClassId> find(std::string_view iri) const;

  /// Classes sharing at least one direct parent with c, excluding c. Sorted.
  std::vector<ClassId> siblings(ClassId c) const;

  std::size_t labeled_count() const noexcept { return labeled_count_; }
  /// Referenced but undeclared classes; these carry no labels.
  std::size_t undeclared_count() const noexcept;
  bool has_explicit_disjointness() const noexcept { return has_disjointness_; }

 private:
  std::string name_;
  std::vector<OntologyClass> classes_;
  std::unordered_map<std::string, ClassId> iri_index_;
  std::size_t labeled_count_ = 0;
  bool has_disjointness_ = false;
};

enum class OntologyFormat { json, rdfxml };

struct LoadOptions {
  /// Annotation properties read as labels by the RDF/XML reader.
  std::vector<std::string> label_properties{std::string(kRdfsLabel)};
};

/// Detects the format from the extension, falling back to content sniffing.
OntologyFormat detect_format(const std::filesystem::path& path, std::string_view content);

Ontology load_ontology(const std::filesystem::path& path, const LoadOptions& options = {});
Ontology parse_ontology_json(std::string_view text, std::string fallback_name = {});
Ontology parse_rdfxml(std::string_view text, const LoadOptions& options, std::string fallback_name = {});

/// Writes the normalized JSON form (labels already preprocessed).
std::string to_json_text(const Ontology& ontology);
void save_ontology_json(const Ontology& ontology, const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

}  // namespace ontoalign
