#include "ontoalign/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <unordered_set>

#include <json.hpp>
#include <spdlog/spdlog.h>

#include "ontoalign/error.hpp"
#include "ontoalign/random.hpp"

namespace ontoalign {
namespace {

using LabelPair = std::pair<std::string, std::string>;

struct PairHash {
  std::size_t operator()(const LabelPair& p) const noexcept {
    std::size_t h = std::hash<std::string>{}(p.first);
    return h ^ (std::hash<std::string>{}(p.second) + 0x9E3779B97F4A7C15ULL + (h << 6) + (h >> 2));
  }
};

using PairTable = std::unordered_set<LabelPair, PairHash>;

// Salts keep sub-seed streams of different corpus kinds independent.
constexpr std::uint64_t kIntraSalt = 0x1;
constexpr std::uint64_t kCrossSalt = 0x2;

struct Origins {
  SampleOrigin synonym;
  SampleOrigin soft;
  SampleOrigin hard;
};

struct SynonymGroup {
  ClassId owner = 0;
  std::vector<LabelPair> pairs;
};

const std::string& pick_label(Rng& rng, const OntologyClass& cls) { return cls.labels[rng.index(cls.labels.size())]; }

// Intra-ontology construction over the classes selected by `include`.
Corpus build_label_corpus(const Ontology& o, const std::vector<bool>& include, const CorpusConfig& cfg,
                          const Origins& origins, bool require_negatives) {
  cfg.validate();
  Corpus corpus;
  corpus.config = cfg;
  corpus.seed = cfg.seed;

  std::vector<ClassId> labeled;
  std::vector<bool> usable(o.size(), false);
  for (const auto& cls : o.classes()) {
    if (include[cls.id] && cls.labeled()) {
      labeled.push_back(cls.id);
      usable[cls.id] = true;
    }
  }

  PairTable synonyms;
  std::vector<SynonymGroup> groups;
  for (ClassId c : labeled) {
    SynonymGroup group{c, {}};
    const auto& labels = o.at(c).labels;
    for (const auto& a : labels) {
      for (const auto& b : labels) {
        if (a == b && !cfg.use_ids) continue;
        LabelPair pair{a, b};
        if (synonyms.insert(pair).second) group.pairs.push_back(std::move(pair));
      }
    }
    if (!group.pairs.empty()) groups.push_back(std::move(group));
  }
  for (const auto& g : groups) {
    for (const auto& [l, r] : g.pairs) {
      corpus.samples.push_back({l, r, true, l == r ? SampleOrigin::identity_syn : origins.synonym});
    }
  }
  if (groups.empty()) return corpus;
  if (labeled.size() < 2) {
    if (require_negatives) {
      throw Error(ErrorCode::insufficient_data,
                  "ontology '" + o.name() + "' has fewer than 2 labeled classes; cannot sample non-synonyms");
    }
    spdlog::warn("fewer than 2 labeled classes available; corpus has no non-synonyms");
    return corpus;
  }

  auto acceptable = [&](const std::string& l, const std::string& r) { return l != r && !synonyms.count({l, r}); };

  auto soft_draw = [&](Rng& rng, std::vector<CorpusSample>& out) {
    for (int attempt = 0; attempt < kNegativeRetries; ++attempt) {
      ClassId a = labeled[rng.index(labeled.size())];
      ClassId b = labeled[rng.index(labeled.size())];
      if (a == b) continue;
      const auto& l = pick_label(rng, o.at(a));
      const auto& r = pick_label(rng, o.at(b));
      if (!acceptable(l, r)) continue;
      out.push_back({l, r, false, origins.soft});
      return;
    }
    ++corpus.negatives_dropped;
  };

  std::vector<CorpusSample> negatives;
  for (const auto& group : groups) {
    Rng rng(sub_seed(cfg.seed, kIntraSalt, group.owner));
    std::vector<ClassId> sibs;
    for (ClassId s : o.siblings(group.owner)) {
      if (usable[s]) sibs.push_back(s);
    }
    for (const auto& syn : group.pairs) {
      ++corpus.synonyms_sampled;
      corpus.negatives_requested += static_cast<std::size_t>(cfg.soft_negatives + cfg.hard_negatives);
      for (int i = 0; i < cfg.soft_negatives; ++i) soft_draw(rng, negatives);
      for (int i = 0; i < cfg.hard_negatives; ++i) {
        if (sibs.empty()) {
          soft_draw(rng, negatives);
          continue;
        }
        bool accepted = false;
        for (int attempt = 0; attempt < kNegativeRetries && !accepted; ++attempt) {
          const auto& r = pick_label(rng, o.at(sibs[rng.index(sibs.size())]));
          if (!acceptable(syn.first, r)) continue;
          negatives.push_back({syn.first, r, false, origins.hard});
          accepted = true;
        }
        if (!accepted) ++corpus.negatives_dropped;
      }
    }
  }

  PairTable seen;
  for (auto& n : negatives) {
    if (seen.insert({n.left, n.right}).second) corpus.samples.push_back(std::move(n));
  }
  return corpus;
}

}  // namespace

const char* to_string(SampleOrigin origin) noexcept {
  switch (origin) {
    case SampleOrigin::intra_syn: return "intra-syn";
    case SampleOrigin::identity_syn: return "identity-syn";
    case SampleOrigin::soft_nonsyn: return "soft-nonsyn";
    case SampleOrigin::hard_nonsyn: return "hard-nonsyn";
    case SampleOrigin::cross_syn: return "cross-syn";
    case SampleOrigin::cross_nonsyn: return "cross-nonsyn";
    case SampleOrigin::comp_syn: return "comp-syn";
    case SampleOrigin::comp_soft_nonsyn: return "comp-soft-nonsyn";
    case SampleOrigin::comp_hard_nonsyn: return "comp-hard-nonsyn";
  }
  return "unknown";
}

SampleOrigin parse_sample_origin(std::string_view text) {
  for (int i = 0; i <= static_cast<int>(SampleOrigin::comp_hard_nonsyn); ++i) {
    auto origin = static_cast<SampleOrigin>(i);
    if (text == to_string(origin)) return origin;
  }
  throw Error(ErrorCode::parse, "unknown sample origin '" + std::string(text) + "'");
}

void CorpusConfig::validate() const {
  if (negatives_per_synonym < 0 || soft_negatives < 0 || hard_negatives < 0) {
    throw Error(ErrorCode::config, "corpus negative counts must be non-negative");
  }
  if (soft_negatives + hard_negatives != negatives_per_synonym) {
    throw Error(ErrorCode::config, "corpus: soft + hard negatives must equal negatives_per_synonym");
  }
}

std::size_t Corpus::synonym_count() const {
  return static_cast<std::size_t>(std::count_if(samples.begin(), samples.end(), [](const auto& s) { return s.is_synonym; }));
}

std::size_t Corpus::non_synonym_count() const { return samples.size() - synonym_count(); }

Corpus build_intra_corpus(const Ontology& ontology, const CorpusConfig& config) {
  std::vector<bool> all(ontology.size(), true);
  return build_label_corpus(ontology, all, config,
                            {SampleOrigin::intra_syn, SampleOrigin::soft_nonsyn, SampleOrigin::hard_nonsyn}, true);
}

Corpus build_comp_corpus(const Ontology& source, const Ontology& target, const Ontology& auxiliary,
                         const CorpusConfig& config) {
  std::unordered_set<std::string> input_labels;
  for (const auto* o : {&source, &target}) {
    for (const auto& cls : o->classes()) input_labels.insert(cls.labels.begin(), cls.labels.end());
  }
  std::vector<bool> include(auxiliary.size(), false);
  std::size_t included = 0;
  for (const auto& cls : auxiliary.classes()) {
    include[cls.id] = std::any_of(cls.labels.begin(), cls.labels.end(),
                                  [&](const std::string& l) { return input_labels.count(l) > 0; });
    included += include[cls.id];
  }
  if (included == 0) {
    spdlog::warn("auxiliary ontology '{}' shares no labels with the inputs; complementary corpus is empty",
                 auxiliary.name());
    Corpus empty;
    empty.config = config;
    empty.seed = config.seed;
    return empty;
  }
  return build_label_corpus(auxiliary, include, config,
                            {SampleOrigin::comp_syn, SampleOrigin::comp_soft_nonsyn, SampleOrigin::comp_hard_nonsyn},
                            false);
}

Corpus build_cross_corpus(const Ontology& source, const Ontology& target, const MappingSet& train,
                          const CorpusConfig& config) {
  Corpus corpus;
  corpus.config = config;
  corpus.seed = config.seed;
  if (train.empty()) {
    spdlog::warn("no training mappings; cross-ontology corpus is empty");
    return corpus;
  }
  std::vector<ClassId> src_labeled, tgt_labeled;
  for (const auto& c : source.classes()) {
    if (c.labeled()) src_labeled.push_back(c.id);
  }
  for (const auto& c : target.classes()) {
    if (c.labeled()) tgt_labeled.push_back(c.id);
  }

  struct Group {
    const ScoredMapping* mapping;
    std::vector<std::pair<LabelPair, bool>> pairs;  // (pair, is_reversed)
  };
  PairTable synonyms;
  std::vector<Group> groups;
  for (const auto& m : train) {
    Group group{&m, {}};
    if (m.source >= source.size() || m.target >= target.size()) {
      throw Error(ErrorCode::invalid_argument, "training mapping references an unknown class id");
    }
    for (const auto& a : source.at(m.source).labels) {
      for (const auto& b : target.at(m.target).labels) {
        if (synonyms.insert({a, b}).second) group.pairs.push_back({{a, b}, false});
        if (synonyms.insert({b, a}).second) group.pairs.push_back({{b, a}, true});
      }
    }
    if (!group.pairs.empty()) groups.push_back(std::move(group));
  }
  for (const auto& g : groups) {
    for (const auto& [pair, reversed] : g.pairs) corpus.samples.push_back({pair.first, pair.second, true, SampleOrigin::cross_syn});
  }
  if (groups.empty()) return corpus;
  if (src_labeled.empty() || tgt_labeled.empty()) {
    throw Error(ErrorCode::insufficient_data, "cross-ontology negatives need labeled classes on both sides");
  }

  const PairSet known = train.pairs();
  std::vector<CorpusSample> negatives;
  for (const auto& group : groups) {
    Rng rng(sub_seed(config.seed ^ kCrossSalt, group.mapping->source, group.mapping->target));
    for (const auto& [syn, reversed] : group.pairs) {
      ++corpus.synonyms_sampled;
      corpus.negatives_requested += static_cast<std::size_t>(config.negatives_per_synonym);
      for (int i = 0; i < config.negatives_per_synonym; ++i) {
        bool accepted = false;
        for (int attempt = 0; attempt < kNegativeRetries && !accepted; ++attempt) {
          ClassId x = src_labeled[rng.index(src_labeled.size())];
          ClassId y = tgt_labeled[rng.index(tgt_labeled.size())];
          if (known.count({x, y})) continue;
          std::string l = pick_label(rng, source.at(x));
          std::string r = pick_label(rng, target.at(y));
          if (reversed) std::swap(l, r);
          if (l == r || synonyms.count({l, r})) continue;
          negatives.push_back({std::move(l), std::move(r), false, SampleOrigin::cross_nonsyn});
          accepted = true;
        }
        if (!accepted) ++corpus.negatives_dropped;
      }
    }
  }
  PairTable seen;
  for (auto& n : negatives) {
    if (seen.insert({n.left, n.right}).second) corpus.samples.push_back(std::move(n));
  }
  return corpus;
}

CorpusSplit merge_and_split(std::span<const Corpus> corpora, double val_fraction, std::uint64_t seed) {
  if (corpora.empty()) throw Error(ErrorCode::invalid_argument, "merge_and_split needs at least one corpus");
  if (!(val_fraction > 0.0 && val_fraction < 1.0)) {
    throw Error(ErrorCode::invalid_argument, "val_fraction must lie strictly between 0 and 1");
  }
  PairTable synonyms;
  for (const auto& c : corpora) {
    for (const auto& s : c.samples) {
      if (s.is_synonym) synonyms.insert({s.left, s.right});
    }
  }
  PairTable seen;
  std::vector<const CorpusSample*> merged;
  for (const auto& c : corpora) {
    for (const auto& s : c.samples) {
      if (!s.is_synonym && synonyms.count({s.left, s.right})) continue;
      if (seen.insert({s.left, s.right}).second) merged.push_back(&s);
    }
  }

  // Unordered keys in first-appearance order, then shuffled.
  std::map<LabelPair, std::size_t> key_index;
  std::vector<std::size_t> sample_key(merged.size());
  for (std::size_t i = 0; i < merged.size(); ++i) {
    const auto* s = merged[i];
    LabelPair key = s->left < s->right ? LabelPair{s->left, s->right} : LabelPair{s->right, s->left};
    auto [it, _] = key_index.try_emplace(std::move(key), key_index.size());
    sample_key[i] = it->second;
  }
  std::vector<std::size_t> order(key_index.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(order));
  const auto n_val = static_cast<std::size_t>(std::llround(val_fraction * static_cast<double>(order.size())));
  std::vector<bool> in_val(order.size(), false);
  for (std::size_t i = 0; i < n_val; ++i) in_val[order[i]] = true;

  CorpusSplit split;
  for (auto* part : {&split.train, &split.val}) {
    part->config = corpora.front().config;
    part->seed = seed;
  }
  for (std::size_t i = 0; i < merged.size(); ++i) {
    (in_val[sample_key[i]] ? split.val : split.train).samples.push_back(*merged[i]);
  }
  return split;
}

std::string to_jsonl(const Corpus& corpus) {
  std::string out;
  for (const auto& s : corpus.samples) {
    nlohmann::ordered_json row;
    row["l"] = s.left;
    row["r"] = s.right;
    row["y"] = s.is_synonym ? 1 : 0;
    row["origin"] = to_string(s.origin);
    out += row.dump();
    out += '\n';
  }
  return out;
}

std::vector<CorpusSample> parse_jsonl(std::string_view text) {
  std::vector<CorpusSample> out;
  std::size_t pos = 0, line_no = 0;
  while (pos < text.size()) {
    auto eol = text.find('\n', pos);
    auto line = text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
    pos = eol == std::string_view::npos ? text.size() : eol + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    try {
      auto row = nlohmann::json::parse(line);
      int y = row.at("y").get<int>();
      if (y != 0 && y != 1) throw Error(ErrorCode::parse, "y must be 0 or 1");
      out.push_back({row.at("l").get<std::string>(), row.at("r").get<std::string>(), y == 1,
                     parse_sample_origin(row.at("origin").get<std::string>())});
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::parse, "corpus line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

void write_corpus_files(const CorpusSplit& split, const CorpusConfig& config, double val_fraction,
                        const std::filesystem::path& dir) {
  write_file(dir / "train.jsonl", to_jsonl(split.train));
  write_file(dir / "val.jsonl", to_jsonl(split.val));
  nlohmann::ordered_json manifest;
  manifest["config"] = {{"ids", config.use_ids},
                        {"co", config.use_co},
                        {"cp", config.use_cp},
                        {"negatives_per_synonym", config.negatives_per_synonym},
                        {"soft_negatives", config.soft_negatives},
                        {"hard_negatives", config.hard_negatives}};
  manifest["seed"] = config.seed;
  manifest["val_fraction"] = val_fraction;
  auto counts = [](const Corpus& c) {
    return nlohmann::ordered_json{{"samples", c.samples.size()},
                                  {"synonyms", c.synonym_count()},
                                  {"non_synonyms", c.non_synonym_count()}};
  };
  manifest["train"] = counts(split.train);
  manifest["val"] = counts(split.val);
  manifest["files"] = {"train.jsonl", "val.jsonl"};
  write_file(dir / "corpus_manifest.json", manifest.dump(2) + "\n");
}

}  // namespace ontoalign
