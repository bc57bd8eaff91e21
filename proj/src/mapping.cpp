#include "ontoalign/mapping.hpp"

#include <algorithm>
#include <charconv>

#include <spdlog/spdlog.h>

#include "ontoalign/error.hpp"
#include "ontoalign/text.hpp"

namespace ontoalign {

const char* to_string(Provenance p) noexcept {
  switch (p) {
    case Provenance::predicted: return "predicted";
    case Provenance::extended: return "extended";
    case Provenance::given: return "given";
  }
  return "unknown";
}

bool MappingSet::add(const ScoredMapping& m) {
  if (!index_.try_emplace(m.key(), entries_.size()).second) return false;
  entries_.push_back(m);
  return true;
}

const ScoredMapping* MappingSet::find(ClassId source, ClassId target) const {
  auto it = index_.find({source, target});
  return it == index_.end() ? nullptr : &entries_[it->second];
}

void MappingSet::add_keep_max(const ScoredMapping& m) {
  if (add(m)) return;
  auto& existing = entries_[index_.at(m.key())];
  if (m.score > existing.score) existing = m;
}

PairSet MappingSet::pairs() const {
  PairSet out;
  for (const auto& [key, _] : index_) out.insert(out.end(), key);
  return out;
}

MappingSet MappingSet::transposed() const {
  MappingSet out(kind_);
  for (const auto& m : entries_) out.add({m.target, m.source, m.score, m.provenance});
  return out;
}

void MappingSet::canonicalize(const Ontology& source, const Ontology& target) {
  MappingSet::sort_entries(entries_, source, target);
  for (std::size_t i = 0; i < entries_.size(); ++i) index_[entries_[i].key()] = i;
}

void MappingSet::sort_entries(std::vector<ScoredMapping>& entries, const Ontology& source, const Ontology& target) {
  std::stable_sort(entries.begin(), entries.end(), [&](const ScoredMapping& a, const ScoredMapping& b) {
    const auto& sa = source.at(a.source).iri;
    const auto& sb = source.at(b.source).iri;
    if (sa != sb) return sa < sb;
    return target.at(a.target).iri < target.at(b.target).iri;
  });
}

MappingLoadResult parse_mappings(std::string_view text, const Ontology& source, const Ontology& target,
                                 MappingKind kind) {
  MappingLoadResult result;
  result.mappings.set_kind(kind);
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto eol = text.find('\n', pos);
    std::string_view line = text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
    pos = eol == std::string_view::npos ? text.size() : eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '#') continue;

    std::vector<std::string_view> cols;
    std::size_t start = 0;
    while (true) {
      auto tab = line.find('\t', start);
      cols.push_back(line.substr(start, tab == std::string_view::npos ? std::string_view::npos : tab - start));
      if (tab == std::string_view::npos) break;
      start = tab + 1;
    }
    if (cols.size() < 2 || cols.size() > 3) {
      throw Error(ErrorCode::parse, "mapping TSV line " + std::to_string(line_no) + ": expected 2 or 3 columns, got " +
                                        std::to_string(cols.size()));
    }
    ++result.rows;
    double score = 1.0;
    if (cols.size() == 3) {
      auto field = cols[2];
      auto [end, ec] = std::from_chars(field.data(), field.data() + field.size(), score);
      if (ec != std::errc{} || end != field.data() + field.size() || !(score >= 0.0 && score <= 1.0)) {
        throw Error(ErrorCode::parse, "mapping TSV line " + std::to_string(line_no) + ": score '" +
                                          std::string(field) + "' is not a number in [0,1]");
      }
    }
    auto src = source.find(cols[0]);
    auto tgt = target.find(cols[1]);
    if (!src || !tgt) {
      ++result.skipped_unresolved;
      continue;
    }
    if (!result.mappings.add({*src, *tgt, score, Provenance::given})) ++result.duplicates;
  }
  if (result.rows == 0) spdlog::warn("mapping file contains no rows");
  if (result.skipped_unresolved > 0) {
    spdlog::warn("skipped {} mapping rows with unresolvable IRIs", result.skipped_unresolved);
  }
  return result;
}

MappingLoadResult load_mappings(const std::filesystem::path& path, const Ontology& source, const Ontology& target,
                                MappingKind kind) {
  return parse_mappings(read_file(path), source, target, kind);
}

std::string to_tsv(const MappingSet& mappings, const Ontology& source, const Ontology& target) {
  std::string out;
  for (const auto& m : mappings) {
    out += source.at(m.source).iri;
    out += '\t';
    out += target.at(m.target).iri;
    out += '\t';
    out += format_double(m.score);
    out += '\n';
  }
  return out;
}

void save_mappings(const MappingSet& mappings, const Ontology& source, const Ontology& target,
                   const std::filesystem::path& path) {
  write_file(path, to_tsv(mappings, source, target));
}

}  // namespace ontoalign
