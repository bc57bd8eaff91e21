#pragma once

#include <chrono>
#include <memory>
#include <optional>
#include <semaphore>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ontoalign/ontology.hpp"

namespace ontoalign {

using LabelPair = std::pair<std::string, std::string>;

/// How per-pair scores of Ω(c) × Ω(c') are folded into a class-pair score.
enum class Aggregation { mean, max };

/// Scores label pairs in [0,1]. Implementations must tolerate concurrent
/// score_batch calls.
class PairScorer {
 public:
  virtual ~PairScorer() = default;
  virtual std::string name() const = 0;
  virtual Aggregation aggregation() const { return Aggregation::mean; }
  virtual std::vector<double> score_batch(std::span<const LabelPair> pairs) const = 0;
};

/// 1.0 for identical labels, else 0.0.
class StringMatchScorer final : public PairScorer {
 public:
  std::string name() const override { return "string-match"; }
  Aggregation aggregation() const override { return Aggregation::max; }
  std::vector<double> score_batch(std::span<const LabelPair> pairs) const override;
};

/// 1 - levenshtein / max length, over code points.
class EditSimilarityScorer final : public PairScorer {
 public:
  std::string name() const override { return "edit-similarity"; }
  Aggregation aggregation() const override { return Aggregation::max; }
  std::vector<double> score_batch(std::span<const LabelPair> pairs) const override;
};

/// Deterministic stand-in for the classifier: Jaccard over whitespace tokens.
class MockScorer final : public PairScorer {
 public:
  std::string name() const override { return "mock"; }
  std::vector<double> score_batch(std::span<const LabelPair> pairs) const override;
};

struct RemoteScorerOptions {
  std::string endpoint;  // e.g. http://127.0.0.1:8321
  std::chrono::milliseconds timeout{30000};
  int max_attempts = 3;
  std::chrono::milliseconds initial_backoff{200};
  int max_in_flight = 4;
};

/// Client for the synonym classifier service (POST /score, GET /health).
class RemoteClassifierScorer final : public PairScorer {
 public:
  explicit RemoteClassifierScorer(RemoteScorerOptions options);
  ~RemoteClassifierScorer() override;

  std::string name() const override { return "remote-classifier"; }
  std::vector<double> score_batch(std::span<const LabelPair> pairs) const override;

  struct Health {
    std::string status;
    std::string model;
  };
  Health health() const;

  struct Endpoint;

 private:
  RemoteScorerOptions options_;
  std::unique_ptr<Endpoint> endpoint_;
  mutable std::counting_semaphore<1024> in_flight_;
};

enum class ScorerKind { string_match, edit_similarity, remote_classifier, mock };

const char* to_string(ScorerKind kind) noexcept;
ScorerKind parse_scorer_kind(std::string_view text);

struct ScorerConfig {
  ScorerKind kind = ScorerKind::mock;
  std::optional<std::string> endpoint;
  std::size_t batch_size = 32;
  int timeout_ms = 30000;
  int max_in_flight = 4;

  void validate() const;
};

std::unique_ptr<PairScorer> make_scorer(const ScorerConfig& config);

double string_match_score(std::span<const std::string> a, std::span<const std::string> b);
/// Max normalized edit similarity over a × b; throws undefined_score on an empty set.
double edit_similarity_score(std::span<const std::string> a, std::span<const std::string> b);
std::size_t levenshtein(std::u32string_view a, std::u32string_view b);
double normalized_edit_similarity(std::string_view a, std::string_view b);

/// Aggregated scorer output over a × b (ordered, one direction), scored in
/// batches of batch_size. Throws scorer_protocol on a wrong count or an
/// out-of-range score.
double classifier_score(const PairScorer& scorer, std::span<const std::string> a, std::span<const std::string> b,
                        std::size_t batch_size = 32);

struct MapScore {
  double score = 0.0;
  bool short_circuit = false;
};

/// S_map: 1.0 without consulting the scorer when the label sets intersect,
/// else classifier_score.
MapScore map_score(const PairScorer& scorer, const OntologyClass& c, const OntologyClass& c2,
                   std::size_t batch_size = 32);

}  // namespace ontoalign
