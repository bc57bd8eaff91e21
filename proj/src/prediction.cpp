#include "ontoalign/prediction.hpp"

#include <optional>

#include <spdlog/spdlog.h>

#include "ontoalign/error.hpp"
#include "ontoalign/parallel.hpp"

namespace ontoalign {

const char* to_string(Direction d) noexcept {
  switch (d) {
    case Direction::src2tgt: return "src2tgt";
    case Direction::tgt2src: return "tgt2src";
    case Direction::combined: return "combined";
  }
  return "unknown";
}

Direction parse_direction(std::string_view text) {
  if (text == "src2tgt") return Direction::src2tgt;
  if (text == "tgt2src") return Direction::tgt2src;
  if (text == "combined") return Direction::combined;
  throw Error(ErrorCode::config, "unknown direction '" + std::string(text) + "'");
}

void PredictionConfig::validate() const {
  if (k < 1) throw Error(ErrorCode::config, "k must be at least 1");
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw Error(ErrorCode::config, "lambda must lie in [0,1]");
}

PredictionStats& PredictionStats::operator+=(const PredictionStats& o) {
  classes_processed += o.classes_processed;
  classes_with_candidates += o.classes_with_candidates;
  candidates_scored += o.candidates_scored;
  scorer_calls += o.scorer_calls;
  short_circuit_hits += o.short_circuit_hits;
  score_unavailable += o.score_unavailable;
  classes_skipped += o.classes_skipped;
  return *this;
}

namespace {

bool scoring_failure(const Error& e) {
  return e.code() == ErrorCode::scorer_transport || e.code() == ErrorCode::scorer_protocol ||
         e.code() == ErrorCode::undefined_score;
}

}  // namespace

PredictionRun predict_direction(const Ontology& src, const Ontology& tgt, const SubwordIndex& tgt_index,
                                const PairScorer& scorer, const PredictOptions& options, Direction direction) {
  if (options.k < 1) throw Error(ErrorCode::invalid_argument, "k must be at least 1");
  if (&tgt_index.ontology() != &tgt) throw Error(ErrorCode::invalid_argument, "index was not built over the target");

  std::vector<ClassId> sources;
  for (const auto& c : src.classes()) {
    if (c.labeled()) sources.push_back(c.id);
  }
  std::vector<std::optional<ScoredMapping>> best(sources.size());
  std::vector<PredictionStats> stats(sources.size());

  parallel_for(sources.size(), options.workers, [&](std::size_t i) {
    const auto& cls = src.at(sources[i]);
    auto& st = stats[i];
    st.classes_processed = 1;
    auto candidates = tgt_index.select_candidates(tgt_index.tokens_of(cls.labels), options.k);
    if (candidates.empty()) return;
    st.classes_with_candidates = 1;
    std::optional<ScoredMapping> top;
    for (const auto& cand : candidates) {
      MapScore s;
      try {
        s = map_score(scorer, cls, tgt.at(cand.id), options.batch_size);
      } catch (const Error& e) {
        if (!scoring_failure(e)) throw;
        ++st.score_unavailable;
        spdlog::debug("score unavailable for {} / {}: {}", cls.iri, tgt.at(cand.id).iri, e.what());
        continue;
      }
      ++st.candidates_scored;
      ++(s.short_circuit ? st.short_circuit_hits : st.scorer_calls);
      // Candidates arrive ordered by selection score then IRI, so a strict
      // comparison implements the tie-break.
      if (!top || s.score > top->score) top = ScoredMapping{cls.id, cand.id, s.score, Provenance::predicted};
    }
    if (!top) {
      st.classes_skipped = 1;
      return;
    }
    best[i] = top;
  });

  PredictionRun run;
  run.direction = direction;
  run.k = options.k;
  run.mappings.set_kind(MappingKind::output);
  for (std::size_t i = 0; i < sources.size(); ++i) {
    run.stats += stats[i];
    if (best[i]) run.mappings.add(*best[i]);
  }
  run.mappings.canonicalize(src, tgt);
  if (run.stats.classes_skipped > 0) {
    spdlog::warn("{}: {} classes skipped because scoring failed for every candidate", to_string(direction),
                 run.stats.classes_skipped);
  }
  return run;
}

MappingSet combine(const MappingSet& src2tgt, const MappingSet& tgt2src) {
  MappingSet out(MappingKind::output);
  for (const auto& m : src2tgt) out.add_keep_max(m);
  for (const auto& m : tgt2src) out.add_keep_max(m);
  return out;
}

MappingSet threshold(const MappingSet& mappings, double lambda) {
  MappingSet out(mappings.kind());
  for (const auto& m : mappings) {
    if (m.score >= lambda) out.add(m);
  }
  return out;
}

const MappingSet& DirectionalMappings::get(Direction d) const {
  switch (d) {
    case Direction::src2tgt: return src2tgt.mappings;
    case Direction::tgt2src: return tgt2src.mappings;
    case Direction::combined: return combined;
  }
  return combined;
}

DirectionalMappings predict_all(const Ontology& src, const Ontology& tgt, const SubwordIndex& src_index,
                                const SubwordIndex& tgt_index, const PairScorer& scorer,
                                const PredictOptions& options) {
  DirectionalMappings out;
  out.src2tgt = predict_direction(src, tgt, tgt_index, scorer, options, Direction::src2tgt);
  out.tgt2src = predict_direction(tgt, src, src_index, scorer, options, Direction::tgt2src);
  out.tgt2src.mappings = out.tgt2src.mappings.transposed();
  out.tgt2src.mappings.canonicalize(src, tgt);
  out.combined = combine(out.src2tgt.mappings, out.tgt2src.mappings);
  out.combined.canonicalize(src, tgt);
  return out;
}

}  // namespace ontoalign
