#include "ontoalign/subword_index.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include <json.hpp>

#include "ontoalign/error.hpp"
#include "ontoalign/parallel.hpp"
#include "ontoalign/text.hpp"

namespace ontoalign {

WordPieceVocab::WordPieceVocab(std::vector<std::string> tokens, std::string unk_token, std::size_t max_word_chars)
    : tokens_(std::move(tokens)), unk_(std::move(unk_token)), max_word_chars_(max_word_chars) {
  if (tokens_.empty()) throw Error(ErrorCode::invalid_argument, "WordPiece vocabulary is empty");
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (!ids_.try_emplace(tokens_[i], i).second) {
      throw Error(ErrorCode::parse, "duplicate vocabulary token '" + tokens_[i] + "' at line " + std::to_string(i + 1));
    }
  }
}

WordPieceVocab WordPieceVocab::parse(std::string_view text) {
  std::vector<std::string> tokens;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto eol = text.find('\n', pos);
    auto line = text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
    pos = eol == std::string_view::npos ? text.size() : eol + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    tokens.emplace_back(line);
  }
  // Blank trailing lines carry no tokens.
  while (!tokens.empty() && tokens.back().empty()) tokens.pop_back();
  return WordPieceVocab(std::move(tokens));
}

WordPieceVocab WordPieceVocab::load(const std::filesystem::path& path) { return parse(read_file(path)); }

std::vector<std::string> WordPieceVocab::tokenize(std::string_view text) const {
  std::vector<std::string> out;
  std::string candidate;
  for (auto word : split_whitespace(text)) {
    auto bounds = utf8_boundaries(word);
    const std::size_t chars = bounds.size() - 1;
    if (chars > max_word_chars_) {
      out.push_back(unk_);
      continue;
    }
    std::vector<std::string> pieces;
    std::size_t start = 0;
    bool bad = false;
    while (start < chars) {
      std::size_t end = chars;
      bool found = false;
      while (end > start) {
        candidate.assign(start > 0 ? "##" : "");
        candidate.append(word.substr(bounds[start], bounds[end] - bounds[start]));
        if (ids_.count(candidate)) {
          found = true;
          break;
        }
        --end;
      }
      if (!found) {
        bad = true;
        break;
      }
      pieces.push_back(candidate);
      start = end;
    }
    if (bad) {
      out.push_back(unk_);
    } else {
      for (auto& p : pieces) out.push_back(std::move(p));
    }
  }
  return out;
}

std::vector<std::string> SubwordIndex::tokens_of(std::span<const std::string> labels) const {
  std::set<std::string> unique;
  for (const auto& label : labels) {
    for (auto& t : vocab_->tokenize(label)) {
      if (t != vocab_->unk_token()) unique.insert(std::move(t));
    }
  }
  return {unique.begin(), unique.end()};
}

SubwordIndex SubwordIndex::build(const Ontology& ontology, std::shared_ptr<const WordPieceVocab> vocab,
                                 std::size_t workers) {
  if (!vocab) throw Error(ErrorCode::invalid_argument, "index build requires a vocabulary");
  SubwordIndex idx;
  idx.ontology_ = &ontology;
  idx.vocab_ = std::move(vocab);
  idx.class_count_ = ontology.size();

  std::vector<std::vector<std::string>> per_class(ontology.size());
  parallel_for(ontology.size(), workers, [&](std::size_t i) {
    const auto& cls = ontology.classes()[i];
    if (cls.labeled()) per_class[i] = idx.tokens_of(cls.labels);
  });

  std::set<std::string> all;
  for (const auto& toks : per_class) all.insert(toks.begin(), toks.end());
  idx.tokens_.assign(all.begin(), all.end());
  for (TokenId t = 0; t < idx.tokens_.size(); ++t) idx.token_ids_.emplace(idx.tokens_[t], t);
  idx.postings_.assign(idx.tokens_.size(), {});
  idx.class_tokens_.assign(ontology.size(), {});
  for (ClassId c = 0; c < per_class.size(); ++c) {
    for (const auto& tok : per_class[c]) {
      TokenId t = idx.token_ids_.at(tok);
      idx.postings_[t].push_back(c);
      idx.class_tokens_[c].push_back(t);
    }
  }
  idx.finalize();
  return idx;
}

SubwordIndex SubwordIndex::from_postings(const Ontology& ontology,
                                         const std::vector<std::pair<std::string, std::vector<ClassId>>>& postings,
                                         std::size_t class_count) {
  SubwordIndex idx;
  idx.ontology_ = &ontology;
  idx.class_count_ = class_count;
  std::map<std::string, std::set<ClassId>> sorted;
  for (const auto& [tok, ids] : postings) {
    for (ClassId c : ids) {
      ontology.at(c);
      sorted[tok].insert(c);
    }
  }
  idx.class_tokens_.assign(ontology.size(), {});
  for (const auto& [tok, ids] : sorted) {
    TokenId t = static_cast<TokenId>(idx.tokens_.size());
    idx.tokens_.push_back(tok);
    idx.token_ids_.emplace(tok, t);
    idx.postings_.emplace_back(ids.begin(), ids.end());
    for (ClassId c : ids) idx.class_tokens_[c].push_back(t);
  }
  idx.finalize();
  return idx;
}

void SubwordIndex::finalize() {
  for (auto& p : postings_) std::sort(p.begin(), p.end());
  for (auto& t : class_tokens_) std::sort(t.begin(), t.end());
  idf_.resize(postings_.size());
  for (std::size_t t = 0; t < postings_.size(); ++t) {
    idf_[t] = std::log10(static_cast<double>(class_count_) / static_cast<double>(postings_[t].size()));
  }
}

std::optional<TokenId> SubwordIndex::find_token(std::string_view token) const {
  auto it = token_ids_.find(std::string(token));
  if (it == token_ids_.end()) return std::nullopt;
  return it->second;
}

std::span<const TokenId> SubwordIndex::class_tokens(ClassId c) const {
  if (c >= class_tokens_.size()) return {};
  return class_tokens_[c];
}

std::vector<Candidate> SubwordIndex::select_candidates(std::span<const std::string> query_tokens, std::size_t k) const {
  if (k == 0) throw Error(ErrorCode::invalid_argument, "candidate cutoff k must be at least 1");
  std::vector<TokenId> ids;
  ids.reserve(query_tokens.size());
  for (const auto& tok : query_tokens) {
    if (auto id = find_token(tok)) ids.push_back(*id);
  }
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());

  // Accumulation visits tokens in ascending id (= string) order for every
  // candidate, which fixes the floating-point summation order.
  std::unordered_map<ClassId, double> scores;
  for (TokenId t : ids) {
    for (ClassId c : postings_[t]) scores[c] += idf_[t];
  }
  std::vector<Candidate> out;
  out.reserve(scores.size());
  for (const auto& [c, s] : scores) {
    if (s > 0.0) out.push_back({c, s});
  }
  auto better = [this](const Candidate& a, const Candidate& b) {
    if (a.score != b.score) return a.score > b.score;
    return ontology_->at(a.id).iri < ontology_->at(b.id).iri;
  };
  if (out.size() > k) {
    std::partial_sort(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(k), out.end(), better);
    out.resize(k);
  } else {
    std::sort(out.begin(), out.end(), better);
  }
  return out;
}

std::string SubwordIndex::to_json_text() const {
  nlohmann::ordered_json doc;
  doc["class_count"] = class_count_;
  auto& postings = doc["postings"] = nlohmann::ordered_json::object();
  for (TokenId t = 0; t < tokens_.size(); ++t) {
    std::vector<std::string> iris;
    iris.reserve(postings_[t].size());
    for (ClassId c : postings_[t]) iris.push_back(ontology_->at(c).iri);
    std::sort(iris.begin(), iris.end());
    postings[tokens_[t]] = iris;
  }
  return doc.dump(1) + "\n";
}

}  // namespace ontoalign
