#include <set>

#include <spdlog/spdlog.h>

#include "ontoalign/error.hpp"
#include "ontoalign/parallel.hpp"
#include "ontoalign/refinement.hpp"

namespace ontoalign {

void ExtensionConfig::validate() const {
  if (!(kappa >= 0.0 && kappa <= 1.0)) throw Error(ErrorCode::config, "kappa must lie in [0,1]");
  if (max_iterations == 0) throw Error(ErrorCode::config, "max_iterations must be positive");
}

ExtensionResult extend(const MappingSet& seeds, const Ontology& source, const Ontology& target,
                       const PairScorer& scorer, const ExtensionConfig& config) {
  config.validate();
  ExtensionResult result;
  result.extended.set_kind(MappingKind::output);

  // Pairs scored below kappa; a deterministic scorer would reject them again.
  std::set<std::pair<ClassId, ClassId>> rejected;
  std::vector<ScoredMapping> frontier(seeds.begin(), seeds.end());
  std::size_t expanded = 0;

  while (!frontier.empty()) {
    ++result.generations;
    std::vector<std::pair<ClassId, ClassId>> pending;
    std::set<std::pair<ClassId, ClassId>> queued;
    auto consider = [&](ClassId x, ClassId y) {
      std::pair<ClassId, ClassId> key{x, y};
      if (seeds.contains(x, y) || result.extended.contains(x, y) || rejected.count(key) || queued.count(key)) return;
      if (!source.at(x).labeled() || !target.at(y).labeled()) return;
      queued.insert(key);
      pending.push_back(key);
    };
    for (const auto& m : frontier) {
      if (expanded == config.max_iterations) {
        result.hit_iteration_cap = true;
        break;
      }
      ++expanded;
      const auto& c = source.at(m.source);
      const auto& c2 = target.at(m.target);
      for (ClassId x : c.parents) {
        for (ClassId y : c2.parents) consider(x, y);
      }
      for (ClassId x : c.children) {
        for (ClassId y : c2.children) consider(x, y);
      }
    }

    std::vector<double> scores(pending.size(), -1.0);
    std::vector<char> failed(pending.size(), 0);
    parallel_for(pending.size(), config.workers, [&](std::size_t i) {
      try {
        scores[i] = map_score(scorer, source.at(pending[i].first), target.at(pending[i].second), config.batch_size).score;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::scorer_transport && e.code() != ErrorCode::scorer_protocol &&
            e.code() != ErrorCode::undefined_score)
          throw;
        failed[i] = 1;
      }
    });

    std::vector<ScoredMapping> fresh;
    for (std::size_t i = 0; i < pending.size(); ++i) {
      if (failed[i]) {
        ++result.score_failures;
        continue;
      }
      ++result.pairs_scored;
      if (scores[i] >= config.kappa) {
        ScoredMapping m{pending[i].first, pending[i].second, scores[i], Provenance::extended};
        result.extended.add(m);
        fresh.push_back(m);
      } else {
        rejected.insert(pending[i]);
      }
    }
    if (result.hit_iteration_cap) {
      spdlog::warn("mapping extension stopped at the iteration cap ({})", config.max_iterations);
      break;
    }
    frontier = std::move(fresh);
  }
  result.extended.canonicalize(source, target);
  return result;
}

}  // namespace ontoalign
