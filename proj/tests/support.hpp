#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <map>
#include <mutex>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "ontoalign/error.hpp"
#include "ontoalign/mapping.hpp"
#include "ontoalign/ontology.hpp"
#include "ontoalign/random.hpp"
#include "ontoalign/refinement.hpp"
#include "ontoalign/scoring.hpp"
#include "ontoalign/subword_index.hpp"

namespace testing {

using namespace ontoalign;

inline Ontology make_ontology(const std::string& name, std::vector<ClassRecord> records) {
  return Ontology::from_records(name, records);
}

/// Shorthand: {iri, {labels}, {parents}}.
inline ClassRecord rec(std::string iri, std::vector<std::string> labels, std::vector<std::string> parents = {},
                       std::vector<std::string> disjoint = {}) {
  return {std::move(iri), std::move(labels), std::move(parents), std::move(disjoint)};
}

inline ClassId id_of(const Ontology& o, std::string_view iri) {
  auto id = o.find(iri);
  if (!id) throw std::runtime_error("no class " + std::string(iri));
  return *id;
}

class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("ontoalign-test-" + std::to_string(rd()) + "-" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline const std::vector<std::string>& word_pool() {
  static const std::vector<std::string> words{
      "heart", "lung",  "liver", "valve", "left",   "right",  "upper", "lower", "bone",  "nerve",
      "canal", "duct",  "gland", "joint", "muscle", "tissue", "layer", "wall",  "cell",  "fiber",
      "root",  "trunk", "node",  "lobe",  "vein",   "artery", "sinus", "plate", "ridge", "fossa"};
  return words;
}

/// Random label of 1-3 pool words.
inline std::string random_label(Rng& rng) {
  const auto& pool = word_pool();
  std::string out;
  const std::size_t n = 1 + rng.index(3);
  for (std::size_t i = 0; i < n; ++i) {
    if (i) out += ' ';
    out += pool[rng.index(pool.size())];
  }
  return out;
}

struct RandomOntologyOptions {
  std::size_t classes = 20;
  std::size_t max_labels = 3;
  /// Chance (in percent) that a class is left without labels.
  std::size_t unlabeled_percent = 10;
  std::size_t max_parents = 2;
};

/// Random DAG: parents are drawn among lower-numbered classes, so no cycles.
inline std::vector<ClassRecord> random_records(Rng& rng, const std::string& prefix, const RandomOntologyOptions& opt) {
  std::vector<ClassRecord> out;
  for (std::size_t i = 0; i < opt.classes; ++i) {
    ClassRecord r;
    r.iri = prefix + std::to_string(i);
    if (rng.index(100) >= opt.unlabeled_percent) {
      const std::size_t n = 1 + rng.index(opt.max_labels);
      for (std::size_t j = 0; j < n; ++j) r.labels.push_back(random_label(rng));
    }
    if (i > 0) {
      const std::size_t n = rng.index(opt.max_parents + 1);
      for (std::size_t j = 0; j < n; ++j) r.parents.push_back(prefix + std::to_string(rng.index(i)));
    }
    out.push_back(std::move(r));
  }
  return out;
}

inline Ontology random_ontology(Rng& rng, const std::string& prefix, const RandomOntologyOptions& opt = {}) {
  return Ontology::from_records(prefix, random_records(rng, prefix, opt));
}

inline std::shared_ptr<const WordPieceVocab> letters_vocab(std::vector<std::string> extra = {}) {
  std::vector<std::string> tokens{"[PAD]", "[UNK]"};
  for (char ch = 'a'; ch <= 'z'; ++ch) {
    tokens.emplace_back(1, ch);
    tokens.push_back(std::string("##") + ch);
  }
  for (auto& e : extra) tokens.push_back(std::move(e));
  return std::make_shared<const WordPieceVocab>(std::move(tokens));
}

// A vocabulary over the test word pool: a few whole words, a few prefixes and
// continuation pieces, plus every single letter so nothing maps to [UNK].
inline std::shared_ptr<const WordPieceVocab> pool_vocab() {
  return letters_vocab({"heart", "lung", "valve", "left", "right", "mus", "##cle", "ar", "##tery", "##ery", "no",
                        "##de", "lo", "##be", "tis", "##sue"});
}

inline std::string strip_continuation(const std::string& piece) {
  return piece.rfind("##", 0) == 0 ? piece.substr(2) : piece;
}

// Reference selection: recompute df and T(c) from scratch for every class.
inline std::vector<Candidate> brute_force_select(const Ontology& o, const WordPieceVocab& vocab,
                                          const std::vector<std::string>& query, std::size_t k) {
  std::vector<std::set<std::string>> toks(o.size());
  std::map<std::string, std::size_t> df;
  for (const auto& c : o.classes()) {
    for (const auto& l : c.labels) {
      for (const auto& t : vocab.tokenize(l)) {
        if (t != vocab.unk_token()) toks[c.id].insert(t);
      }
    }
    for (const auto& t : toks[c.id]) ++df[t];
  }
  std::set<std::string> q(query.begin(), query.end());
  std::vector<Candidate> all;
  for (const auto& c : o.classes()) {
    double s = 0.0;
    for (const auto& t : q) {  // std::set iterates in string order
      if (toks[c.id].count(t)) s += std::log10(static_cast<double>(o.size()) / static_cast<double>(df[t]));
    }
    if (s > 0.0) all.push_back({c.id, s});
  }
  std::sort(all.begin(), all.end(), [&](const Candidate& a, const Candidate& b) {
    if (a.score != b.score) return a.score > b.score;
    return o.at(a.id).iri < o.at(b.id).iri;
  });
  if (all.size() > k) all.resize(k);
  return all;
}

/// Reference prediction for one direction with k = |C'|: every class with a
/// positive selection score is a candidate, scored pair by pair.
inline MappingSet brute_force_predict(const Ontology& src, const Ontology& tgt, const WordPieceVocab& vocab,
                                      const PairScorer& scorer) {
  MappingSet out;
  for (const auto& c : src.classes()) {
    if (!c.labeled()) continue;
    std::set<std::string> q;
    for (const auto& l : c.labels) {
      for (const auto& t : vocab.tokenize(l)) {
        if (t != vocab.unk_token()) q.insert(t);
      }
    }
    auto candidates = brute_force_select(tgt, vocab, {q.begin(), q.end()}, tgt.size());
    bool have = false;
    ScoredMapping best;
    for (const auto& cand : candidates) {
      const auto& d = tgt.at(cand.id);
      bool shared = false;
      for (const auto& l : c.labels) shared = shared || std::find(d.labels.begin(), d.labels.end(), l) != d.labels.end();
      double s = 0.0;
      if (shared) {
        s = 1.0;
      } else {
        double agg = 0.0;
        for (const auto& a : c.labels) {
          for (const auto& b : d.labels) {
            LabelPair p{a, b};
            const double v = scorer.score_batch(std::span<const LabelPair>(&p, 1)).at(0);
            agg = scorer.aggregation() == Aggregation::max ? std::max(agg, v) : agg + v;
          }
        }
        s = scorer.aggregation() == Aggregation::max ? agg
                                                     : agg / static_cast<double>(c.labels.size() * d.labels.size());
      }
      if (!have || s > best.score) {
        best = {c.id, cand.id, s, Provenance::predicted};
        have = true;
      }
    }
    if (have) out.add(best);
  }
  out.canonicalize(src, tgt);
  return out;
}

// Independent reasoner: closure by repeated clause sweeps until fixpoint.
inline std::set<Atom> brute_unsat(const RepairProblem& p, const std::vector<bool>& active) {
  std::vector<std::pair<Atom, Atom>> edges;
  for (const auto& c : p.horn_clauses) edges.push_back({c.from, c.to});
  for (const auto& c : p.mapping_clauses) {
    if (active[c.mapping]) edges.push_back({c.from, c.to});
  }
  std::set<Atom> out;
  for (Atom x = 0; x < p.atom_count(); ++x) {
    std::vector<bool> in(p.atom_count(), false);
    in[x] = true;
    for (bool changed = true; changed;) {
      changed = false;
      for (auto [a, b] : edges) {
        if (in[a] && !in[b]) in[b] = changed = true;
      }
    }
    for (auto [a, b] : p.disjointness) {
      if (in[a] && in[b]) out.insert(x);
    }
  }
  return out;
}

/// Scores from a fixed table (missing pairs score `fallback`); counts calls.
class TableScorer final : public PairScorer {
 public:
  explicit TableScorer(std::map<LabelPair, double> table, double fallback = 0.0, Aggregation agg = Aggregation::mean)
      : table_(std::move(table)), fallback_(fallback), agg_(agg) {}

  std::string name() const override { return "table"; }
  Aggregation aggregation() const override { return agg_; }
  std::vector<double> score_batch(std::span<const LabelPair> pairs) const override {
    ++batches;
    pairs_seen += pairs.size();
    std::vector<double> out;
    for (const auto& p : pairs) {
      auto it = table_.find(p);
      out.push_back(it == table_.end() ? fallback_ : it->second);
    }
    return out;
  }

  mutable std::atomic<std::size_t> batches{0};
  mutable std::atomic<std::size_t> pairs_seen{0};

 private:
  std::map<LabelPair, double> table_;
  double fallback_;
  Aggregation agg_;
};

/// Always throws the given error.
class FailingScorer final : public PairScorer {
 public:
  explicit FailingScorer(ErrorCode code = ErrorCode::scorer_transport) : code_(code) {}
  std::string name() const override { return "failing"; }
  std::vector<double> score_batch(std::span<const LabelPair>) const override {
    throw Error(code_, "scorer unavailable");
  }

 private:
  ErrorCode code_;
};

/// Returns one score too few.
class ShortScorer final : public PairScorer {
 public:
  std::string name() const override { return "short"; }
  std::vector<double> score_batch(std::span<const LabelPair> pairs) const override {
    return std::vector<double>(pairs.empty() ? 0 : pairs.size() - 1, 0.5);
  }
};

}  // namespace testing
