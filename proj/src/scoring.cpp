#include "ontoalign/scoring.hpp"

#include <algorithm>
#include <set>

#include "ontoalign/error.hpp"
#include "ontoalign/text.hpp"

namespace ontoalign {

std::vector<double> StringMatchScorer::score_batch(std::span<const LabelPair> pairs) const {
  std::vector<double> out;
  out.reserve(pairs.size());
  for (const auto& [l, r] : pairs) out.push_back(l == r ? 1.0 : 0.0);
  return out;
}

std::vector<double> EditSimilarityScorer::score_batch(std::span<const LabelPair> pairs) const {
  std::vector<double> out;
  out.reserve(pairs.size());
  for (const auto& [l, r] : pairs) out.push_back(normalized_edit_similarity(l, r));
  return out;
}

std::vector<double> MockScorer::score_batch(std::span<const LabelPair> pairs) const {
  std::vector<double> out;
  out.reserve(pairs.size());
  for (const auto& [l, r] : pairs) {
    auto lw = split_whitespace(l);
    auto rw = split_whitespace(r);
    std::set<std::string_view> a(lw.begin(), lw.end()), b(rw.begin(), rw.end());
    if (a.empty() && b.empty()) {
      out.push_back(1.0);
      continue;
    }
    std::size_t inter = 0;
    for (auto w : a) inter += b.count(w);
    out.push_back(static_cast<double>(inter) / static_cast<double>(a.size() + b.size() - inter));
  }
  return out;
}

const char* to_string(ScorerKind kind) noexcept {
  switch (kind) {
    case ScorerKind::string_match: return "string";
    case ScorerKind::edit_similarity: return "edit";
    case ScorerKind::remote_classifier: return "remote";
    case ScorerKind::mock: return "mock";
  }
  return "unknown";
}

ScorerKind parse_scorer_kind(std::string_view text) {
  if (text == "string" || text == "string-match") return ScorerKind::string_match;
  if (text == "edit" || text == "edit-similarity") return ScorerKind::edit_similarity;
  if (text == "remote" || text == "remote-classifier") return ScorerKind::remote_classifier;
  if (text == "mock") return ScorerKind::mock;
  throw Error(ErrorCode::config, "unknown scorer kind '" + std::string(text) + "'");
}

void ScorerConfig::validate() const {
  const bool remote = kind == ScorerKind::remote_classifier;
  const bool has_endpoint = endpoint.has_value() && !endpoint->empty();
  if (remote && !has_endpoint) throw Error(ErrorCode::config, "scorer.endpoint is required for the remote scorer");
  if (!remote && has_endpoint) throw Error(ErrorCode::config, "scorer.endpoint is only valid for the remote scorer");
  if (batch_size == 0) throw Error(ErrorCode::config, "scorer.batch_size must be at least 1");
  if (timeout_ms <= 0) throw Error(ErrorCode::config, "scorer.timeout_ms must be positive");
  if (max_in_flight <= 0) throw Error(ErrorCode::config, "scorer.max_in_flight must be positive");
}

std::unique_ptr<PairScorer> make_scorer(const ScorerConfig& config) {
  config.validate();
  switch (config.kind) {
    case ScorerKind::string_match: return std::make_unique<StringMatchScorer>();
    case ScorerKind::edit_similarity: return std::make_unique<EditSimilarityScorer>();
    case ScorerKind::mock: return std::make_unique<MockScorer>();
    case ScorerKind::remote_classifier: {
      RemoteScorerOptions options;
      options.endpoint = *config.endpoint;
      options.timeout = std::chrono::milliseconds(config.timeout_ms);
      options.max_in_flight = config.max_in_flight;
      return std::make_unique<RemoteClassifierScorer>(std::move(options));
    }
  }
  throw Error(ErrorCode::config, "unsupported scorer kind");
}

double string_match_score(std::span<const std::string> a, std::span<const std::string> b) {
  for (const auto& x : a) {
    if (std::find(b.begin(), b.end(), x) != b.end()) return 1.0;
  }
  return 0.0;
}

std::size_t levenshtein(std::u32string_view a, std::u32string_view b) {
  if (a.size() < b.size()) std::swap(a, b);
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diagonal = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      std::size_t above = row[j];
      row[j] = a[i - 1] == b[j - 1] ? diagonal : 1 + std::min({diagonal, above, row[j - 1]});
      diagonal = above;
    }
  }
  return row[b.size()];
}

double normalized_edit_similarity(std::string_view a, std::string_view b) {
  auto ua = utf8_decode(a);
  auto ub = utf8_decode(b);
  const std::size_t longest = std::max(ua.size(), ub.size());
  if (longest == 0) return 1.0;
  return 1.0 - static_cast<double>(levenshtein(ua, ub)) / static_cast<double>(longest);
}

double edit_similarity_score(std::span<const std::string> a, std::span<const std::string> b) {
  if (a.empty() || b.empty()) throw Error(ErrorCode::undefined_score, "edit similarity of an empty label set");
  double best = 0.0;
  for (const auto& x : a) {
    for (const auto& y : b) {
      best = std::max(best, normalized_edit_similarity(x, y));
      if (best == 1.0) return best;
    }
  }
  return best;
}

double classifier_score(const PairScorer& scorer, std::span<const std::string> a, std::span<const std::string> b,
                        std::size_t batch_size) {
  if (a.empty() || b.empty()) throw Error(ErrorCode::undefined_score, "classifier score of an empty label set");
  if (batch_size == 0) batch_size = 1;
  std::vector<LabelPair> pairs;
  pairs.reserve(a.size() * b.size());
  for (const auto& x : a) {
    for (const auto& y : b) pairs.emplace_back(x, y);
  }
  const bool use_max = scorer.aggregation() == Aggregation::max;
  double acc = 0.0;
  for (std::size_t start = 0; start < pairs.size(); start += batch_size) {
    const std::size_t n = std::min(batch_size, pairs.size() - start);
    auto scores = scorer.score_batch(std::span<const LabelPair>(pairs).subspan(start, n));
    if (scores.size() != n) {
      throw Error(ErrorCode::scorer_protocol, "scorer '" + scorer.name() + "' returned " +
                                                  std::to_string(scores.size()) + " scores for " + std::to_string(n) +
                                                  " pairs");
    }
    for (double s : scores) {
      if (!(s >= 0.0 && s <= 1.0)) {
        throw Error(ErrorCode::scorer_protocol, "scorer '" + scorer.name() + "' returned out-of-range score " +
                                                    format_double(s));
      }
      acc = use_max ? std::max(acc, s) : acc + s;
    }
  }
  return use_max ? acc : acc / static_cast<double>(pairs.size());
}

MapScore map_score(const PairScorer& scorer, const OntologyClass& c, const OntologyClass& c2, std::size_t batch_size) {
  if (string_match_score(c.labels, c2.labels) == 1.0) return {1.0, true};
  return {classifier_score(scorer, c.labels, c2.labels, batch_size), false};
}

}  // namespace ontoalign
