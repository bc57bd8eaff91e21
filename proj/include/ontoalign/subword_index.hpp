#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ontoalign/ontology.hpp"

namespace ontoalign {

/// Greedy longest-match-first WordPiece inference over a fixed vocabulary.
class WordPieceVocab {
 public:
  explicit WordPieceVocab(std::vector<std::string> tokens, std::string unk_token = "[UNK]",
                          std::size_t max_word_chars = 100);

  /// One token per line; line number is the token id.
  static WordPieceVocab load(const std::filesystem::path& path);
  static WordPieceVocab parse(std::string_view text);

  bool contains(std::string_view token) const { return ids_.count(std::string(token)) > 0; }
  std::size_t size() const noexcept { return tokens_.size(); }
  const std::string& unk_token() const noexcept { return unk_; }

  std::vector<std::string> tokenize(std::string_view text) const;

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::size_t> ids_;
  std::string unk_;
  std::size_t max_word_chars_;
};

inline std::vector<std::string> wordpiece_tokenize(const WordPieceVocab& vocab, std::string_view text) {
  return vocab.tokenize(text);
}

using TokenId = std::uint32_t;

struct Candidate {
  ClassId id = 0;
  double score = 0.0;

  friend bool operator==(const Candidate&, const Candidate&) = default;
};

/// Sub-word inverted index over one ontology. Token ids follow lexicographic
/// token order, so iterating ids ascending visits tokens in string order.
class SubwordIndex {
 public:
  static SubwordIndex build(const Ontology& ontology, std::shared_ptr<const WordPieceVocab> vocab,
                            std::size_t workers = 1);

  /// Low-level constructor used for hand-built fixtures: postings keyed by
  /// token string, class_count is |C'|.
  static SubwordIndex from_postings(const Ontology& ontology,
                                    const std::vector<std::pair<std::string, std::vector<ClassId>>>& postings,
                                    std::size_t class_count);

  std::size_t class_count() const noexcept { return class_count_; }
  std::size_t token_count() const noexcept { return tokens_.size(); }
  const std::string& token(TokenId id) const { return tokens_.at(id); }
  std::optional<TokenId> find_token(std::string_view token) const;
  std::span<const ClassId> postings(TokenId id) const { return postings_.at(id); }
  /// T(c): sorted token ids of class c in this index (empty when unindexed).
  std::span<const TokenId> class_tokens(ClassId c) const;
  double idf(TokenId id) const { return idf_.at(id); }
  const Ontology& ontology() const noexcept { return *ontology_; }
  const WordPieceVocab* vocab() const noexcept { return vocab_.get(); }

  /// Sub-word tokens of a label set (set semantics, UNK removed).
  std::vector<std::string> tokens_of(std::span<const std::string> labels) const;

  /// Top-k indexed classes by summed idf of shared tokens; ties by ascending
  /// IRI. Classes with zero total score are not returned.
  std::vector<Candidate> select_candidates(std::span<const std::string> query_tokens, std::size_t k) const;

  std::string to_json_text() const;

 private:
  void finalize();

  const Ontology* ontology_ = nullptr;
  std::shared_ptr<const WordPieceVocab> vocab_;
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> token_ids_;
  std::vector<std::vector<ClassId>> postings_;
  std::vector<std::vector<TokenId>> class_tokens_;
  std::vector<double> idf_;
  std::size_t class_count_ = 0;
};

}  // namespace ontoalign
