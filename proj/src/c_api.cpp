#include "ontoalign/ontoalign.h"

#include <cstdlib>
#include <cstring>
#include <map>
#include <memory>
#include <new>
#include <string>

#include <json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "ontoalign/config.hpp"
#include "ontoalign/corpus.hpp"
#include "ontoalign/error.hpp"
#include "ontoalign/evaluation.hpp"
#include "ontoalign/experiment.hpp"
#include "ontoalign/manifest.hpp"
#include "ontoalign/prediction.hpp"
#include "ontoalign/refinement.hpp"
#include "ontoalign/subword_index.hpp"
#include "ontoalign/text.hpp"

namespace oa = ontoalign;
using ordered_json = nlohmann::ordered_json;

struct oa_ontology {
  std::shared_ptr<const oa::Ontology> ontology;
};

struct oa_vocab {
  std::shared_ptr<const oa::WordPieceVocab> vocab;
};

struct oa_index {
  std::shared_ptr<const oa::Ontology> ontology;
  std::unique_ptr<oa::SubwordIndex> index;
};

struct oa_mappings {
  oa::MappingSet set;
  std::shared_ptr<const oa::Ontology> source;
  std::shared_ptr<const oa::Ontology> target;
};

struct oa_scorer {
  std::unique_ptr<oa::PairScorer> scorer;
  std::size_t batch_size = 32;
};

namespace {

thread_local std::string last_error;

// Logs belong on the diagnostic stream; results only ever go to files.
struct StderrLogger {
  StderrLogger() {
    auto logger = spdlog::stderr_color_mt("ontoalign");
    logger->set_pattern("[%l] %v");
    spdlog::set_default_logger(logger);
    spdlog::set_level(spdlog::level::warn);
  }
};

void ensure_logger() { static StderrLogger init; }

oa_status status_of(oa::ErrorCode code) {
  switch (code) {
    case oa::ErrorCode::invalid_argument: return OA_ERR_INVALID_ARGUMENT;
    case oa::ErrorCode::io: return OA_ERR_IO;
    case oa::ErrorCode::parse: return OA_ERR_PARSE;
    case oa::ErrorCode::cycle: return OA_ERR_CYCLE;
    case oa::ErrorCode::unknown_format: return OA_ERR_UNKNOWN_FORMAT;
    case oa::ErrorCode::insufficient_data: return OA_ERR_INSUFFICIENT_DATA;
    case oa::ErrorCode::config: return OA_ERR_CONFIG;
    case oa::ErrorCode::scorer_transport: return OA_ERR_SCORER_TRANSPORT;
    case oa::ErrorCode::scorer_protocol: return OA_ERR_SCORER_PROTOCOL;
    case oa::ErrorCode::undefined_score: return OA_ERR_UNDEFINED_SCORE;
  }
  return OA_ERR_INTERNAL;
}

template <typename Fn>
oa_status guarded(Fn&& fn) {
  ensure_logger();
  last_error.clear();
  try {
    fn();
    return OA_OK;
  } catch (const oa::Error& e) {
    last_error = e.what();
    return status_of(e.code());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
  } catch (const std::exception& e) {
    last_error = e.what();
  } catch (...) {
    last_error = "unknown error";
  }
  return OA_ERR_INTERNAL;
}

void require(bool ok, const char* what) {
  if (!ok) throw oa::Error(oa::ErrorCode::invalid_argument, std::string(what) + " must not be null");
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void put_string(char** out, const std::string& s) {
  if (out) *out = dup_string(s);
}

oa_mappings* wrap(oa::MappingSet set, std::shared_ptr<const oa::Ontology> source,
                  std::shared_ptr<const oa::Ontology> target) {
  return new oa_mappings{std::move(set), std::move(source), std::move(target)};
}

void same_ontologies(const oa_mappings* a, const oa_mappings* b) {
  if (a->source != b->source || a->target != b->target) {
    throw oa::Error(oa::ErrorCode::invalid_argument, "mapping sets refer to different ontology handles");
  }
}

ordered_json report_json(const oa::EvalReport& r) {
  ordered_json j;
  j["precision"] = r.precision;
  j["recall"] = r.recall;
  j["f1"] = r.f1;
  j["true_positives"] = r.true_positives;
  j["output_considered"] = r.output_considered;
  j["reference_considered"] = r.reference_considered;
  j["ignored"] = r.ignored_size;
  j["precision_undefined"] = r.precision_undefined;
  j["recall_undefined"] = r.recall_undefined;
  return j;
}

ordered_json stats_json(const oa::PredictionStats& s) {
  return ordered_json{{"classes_processed", s.classes_processed},
                      {"classes_with_candidates", s.classes_with_candidates},
                      {"candidates_scored", s.candidates_scored},
                      {"scorer_calls", s.scorer_calls},
                      {"short_circuit_hits", s.short_circuit_hits},
                      {"score_unavailable", s.score_unavailable},
                      {"classes_skipped", s.classes_skipped}};
}

oa::Direction to_direction(oa_direction d) {
  switch (d) {
    case OA_DIR_SRC2TGT: return oa::Direction::src2tgt;
    case OA_DIR_TGT2SRC: return oa::Direction::tgt2src;
    case OA_DIR_COMBINED: return oa::Direction::combined;
  }
  throw oa::Error(oa::ErrorCode::invalid_argument, "unknown direction " + std::to_string(static_cast<int>(d)));
}

}  // namespace

extern "C" {

const char* oa_version(void) { return oa::tool_version(); }

const char* oa_status_name(oa_status status) {
  switch (status) {
    case OA_OK: return "ok";
    case OA_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case OA_ERR_IO: return "io";
    case OA_ERR_PARSE: return "parse";
    case OA_ERR_CYCLE: return "cycle";
    case OA_ERR_UNKNOWN_FORMAT: return "unknown_format";
    case OA_ERR_INSUFFICIENT_DATA: return "insufficient_data";
    case OA_ERR_CONFIG: return "config";
    case OA_ERR_SCORER_TRANSPORT: return "scorer_transport";
    case OA_ERR_SCORER_PROTOCOL: return "scorer_protocol";
    case OA_ERR_UNDEFINED_SCORE: return "undefined_score";
    case OA_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

const char* oa_last_error(void) { return last_error.c_str(); }

void oa_string_free(char* s) { std::free(s); }

oa_status oa_set_log_level(const char* level) {
  return guarded([&] {
    require(level, "level");
    auto parsed = spdlog::level::from_str(level);
    if (parsed == spdlog::level::off && std::strcmp(level, "off") != 0) {
      throw oa::Error(oa::ErrorCode::invalid_argument, std::string("unknown log level '") + level + "'");
    }
    spdlog::set_level(parsed);
  });
}

oa_status oa_ontology_load(const char* path, const char* const* label_properties, size_t n_label_properties,
                           oa_ontology** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    oa::LoadOptions options;
    if (label_properties && n_label_properties > 0) {
      options.label_properties.assign(label_properties, label_properties + n_label_properties);
    }
    auto o = std::make_shared<const oa::Ontology>(oa::load_ontology(path, options));
    *out = new oa_ontology{std::move(o)};
  });
}

void oa_ontology_free(oa_ontology* ontology) { delete ontology; }

size_t oa_ontology_size(const oa_ontology* ontology) { return ontology ? ontology->ontology->size() : 0; }

oa_status oa_ontology_info(const oa_ontology* ontology, char** json_out) {
  return guarded([&] {
    require(ontology, "ontology");
    require(json_out, "json_out");
    const auto& o = *ontology->ontology;
    ordered_json j{{"name", o.name()},
                   {"classes", o.size()},
                   {"labeled", o.labeled_count()},
                   {"undeclared", o.undeclared_count()},
                   {"explicit_disjointness", o.has_explicit_disjointness()}};
    *json_out = dup_string(j.dump());
  });
}

oa_status oa_ontology_save_json(const oa_ontology* ontology, const char* path) {
  return guarded([&] {
    require(ontology, "ontology");
    require(path, "path");
    oa::save_ontology_json(*ontology->ontology, path);
  });
}

oa_status oa_vocab_load(const char* path, oa_vocab** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new oa_vocab{std::make_shared<const oa::WordPieceVocab>(oa::WordPieceVocab::load(path))};
  });
}

void oa_vocab_free(oa_vocab* vocab) { delete vocab; }

oa_status oa_index_build(const oa_ontology* ontology, const oa_vocab* vocab, size_t workers, oa_index** out) {
  return guarded([&] {
    require(ontology, "ontology");
    require(vocab, "vocab");
    require(out, "out");
    auto index = std::make_unique<oa::SubwordIndex>(oa::SubwordIndex::build(*ontology->ontology, vocab->vocab, workers));
    *out = new oa_index{ontology->ontology, std::move(index)};
  });
}

void oa_index_free(oa_index* index) { delete index; }

oa_status oa_index_save_json(const oa_index* index, const char* path) {
  return guarded([&] {
    require(index, "index");
    require(path, "path");
    oa::write_file(path, index->index->to_json_text());
  });
}

oa_status oa_index_select(const oa_index* index, const char* label, size_t k, char** json_out) {
  return guarded([&] {
    require(index, "index");
    require(label, "label");
    require(json_out, "json_out");
    std::vector<std::string> labels{oa::preprocess_label(label)};
    auto candidates = index->index->select_candidates(index->index->tokens_of(labels), k);
    ordered_json j = ordered_json::array();
    for (const auto& c : candidates) j.push_back({{"iri", index->ontology->at(c.id).iri}, {"score", c.score}});
    *json_out = dup_string(j.dump());
  });
}

oa_status oa_mappings_load(const char* path, const oa_ontology* source, const oa_ontology* target,
                           oa_mappings** out) {
  return guarded([&] {
    require(path, "path");
    require(source, "source");
    require(target, "target");
    require(out, "out");
    auto loaded = oa::load_mappings(path, *source->ontology, *target->ontology);
    if (loaded.skipped_unresolved > 0) {
      spdlog::warn("{}: skipped {} rows with unresolved IRIs", path, loaded.skipped_unresolved);
    }
    *out = wrap(std::move(loaded.mappings), source->ontology, target->ontology);
  });
}

void oa_mappings_free(oa_mappings* mappings) { delete mappings; }

size_t oa_mappings_size(const oa_mappings* mappings) { return mappings ? mappings->set.size() : 0; }

oa_status oa_mappings_save(const oa_mappings* mappings, const char* path) {
  return guarded([&] {
    require(mappings, "mappings");
    require(path, "path");
    oa::save_mappings(mappings->set, *mappings->source, *mappings->target, path);
  });
}

oa_status oa_mappings_threshold(const oa_mappings* mappings, double lambda, oa_mappings** out) {
  return guarded([&] {
    require(mappings, "mappings");
    require(out, "out");
    if (!(lambda >= 0.0 && lambda <= 1.0)) throw oa::Error(oa::ErrorCode::invalid_argument, "lambda must lie in [0,1]");
    *out = wrap(oa::threshold(mappings->set, lambda), mappings->source, mappings->target);
  });
}

oa_status oa_scorer_create(const char* kind, const char* endpoint, int timeout_ms, int max_in_flight,
                           oa_scorer** out) {
  return guarded([&] {
    require(kind, "kind");
    require(out, "out");
    oa::ScorerConfig cfg;
    cfg.kind = oa::parse_scorer_kind(kind);
    if (endpoint && *endpoint) cfg.endpoint = endpoint;
    if (timeout_ms > 0) cfg.timeout_ms = timeout_ms;
    if (max_in_flight > 0) cfg.max_in_flight = max_in_flight;
    cfg.validate();
    *out = new oa_scorer{oa::make_scorer(cfg), cfg.batch_size};
  });
}

void oa_scorer_free(oa_scorer* scorer) { delete scorer; }

void oa_corpus_options_default(oa_corpus_options* options) {
  if (!options) return;
  oa::CorpusConfig d;
  options->use_io = 1;
  options->use_ids = d.use_ids;
  options->use_co = d.use_co;
  options->use_cp = d.use_cp;
  options->negatives_per_synonym = d.negatives_per_synonym;
  options->soft_negatives = d.soft_negatives;
  options->hard_negatives = d.hard_negatives;
  options->val_fraction = 0.2;
  options->seed = d.seed;
}

oa_status oa_corpus_build(const oa_ontology* source, const oa_ontology* target, const oa_mappings* train,
                          const oa_ontology* const* auxiliary, size_t n_auxiliary, const oa_corpus_options* options,
                          const char* out_dir, char** report_out) {
  return guarded([&] {
    require(source, "source");
    require(target, "target");
    require(options, "options");
    require(out_dir, "out_dir");
    oa::CorpusConfig cfg;
    cfg.use_ids = options->use_ids != 0;
    cfg.use_co = options->use_co != 0;
    cfg.use_cp = options->use_cp != 0;
    cfg.negatives_per_synonym = options->negatives_per_synonym;
    cfg.soft_negatives = options->soft_negatives;
    cfg.hard_negatives = options->hard_negatives;
    cfg.seed = options->seed;
    cfg.validate();
    if (cfg.use_co && !train) throw oa::Error(oa::ErrorCode::invalid_argument, "cross-ontology corpus needs training mappings");
    if (cfg.use_cp && n_auxiliary == 0) {
      throw oa::Error(oa::ErrorCode::invalid_argument, "complementary corpus needs an auxiliary ontology");
    }
    const auto& src = *source->ontology;
    const auto& tgt = *target->ontology;
    std::vector<oa::Corpus> parts;
    ordered_json sources = ordered_json::object();
    if (options->use_io) {
      parts.push_back(oa::build_intra_corpus(src, cfg));
      parts.push_back(oa::build_intra_corpus(tgt, cfg));
      sources["io"] = parts[0].samples.size() + parts[1].samples.size();
    }
    if (cfg.use_co) {
      parts.push_back(oa::build_cross_corpus(src, tgt, train->set, cfg));
      sources["co"] = parts.back().samples.size();
    }
    if (cfg.use_cp) {
      std::size_t n = 0;
      for (std::size_t i = 0; i < n_auxiliary; ++i) {
        require(auxiliary && auxiliary[i], "auxiliary ontology");
        parts.push_back(oa::build_comp_corpus(src, tgt, *auxiliary[i]->ontology, cfg));
        n += parts.back().samples.size();
      }
      sources["cp"] = n;
    }
    if (parts.empty()) throw oa::Error(oa::ErrorCode::invalid_argument, "no corpus enabled");
    auto split = oa::merge_and_split(parts, options->val_fraction, cfg.seed);
    oa::write_corpus_files(split, cfg, options->val_fraction, out_dir);
    ordered_json report{{"train", split.train.samples.size()},
                        {"train_synonyms", split.train.synonym_count()},
                        {"val", split.val.samples.size()},
                        {"val_synonyms", split.val.synonym_count()},
                        {"per_source_before_merge", sources},
                        {"seed", cfg.seed}};
    put_string(report_out, report.dump(2) + "\n");
  });
}

void oa_predict_options_default(oa_predict_options* options) {
  if (!options) return;
  oa::PredictOptions d;
  options->k = d.k;
  options->batch_size = d.batch_size;
  options->workers = 0;
}

oa_status oa_predict(const oa_index* source_index, const oa_index* target_index, const oa_scorer* scorer,
                     const oa_predict_options* options, int both_directions, oa_mappings** src2tgt_out,
                     oa_mappings** tgt2src_out, oa_mappings** combined_out, char** stats_out) {
  return guarded([&] {
    require(source_index, "source_index");
    require(target_index, "target_index");
    require(scorer, "scorer");
    require(options, "options");
    require(src2tgt_out, "src2tgt_out");
    oa::PredictOptions po{options->k, options->batch_size ? options->batch_size : scorer->batch_size,
                          options->workers};
    const auto& src = source_index->ontology;
    const auto& tgt = target_index->ontology;
    ordered_json stats;
    if (both_directions) {
      require(tgt2src_out, "tgt2src_out");
      require(combined_out, "combined_out");
      auto all = oa::predict_all(*src, *tgt, *source_index->index, *target_index->index, *scorer->scorer, po);
      stats["src2tgt"] = stats_json(all.src2tgt.stats);
      stats["tgt2src"] = stats_json(all.tgt2src.stats);
      stats["sizes"] = {{"src2tgt", all.src2tgt.mappings.size()},
                        {"tgt2src", all.tgt2src.mappings.size()},
                        {"combined", all.combined.size()}};
      auto a = std::unique_ptr<oa_mappings>(wrap(std::move(all.src2tgt.mappings), src, tgt));
      auto b = std::unique_ptr<oa_mappings>(wrap(std::move(all.tgt2src.mappings), src, tgt));
      auto c = std::unique_ptr<oa_mappings>(wrap(std::move(all.combined), src, tgt));
      put_string(stats_out, stats.dump(2) + "\n");
      *src2tgt_out = a.release();
      *tgt2src_out = b.release();
      *combined_out = c.release();
    } else {
      auto run = oa::predict_direction(*src, *tgt, *target_index->index, *scorer->scorer, po);
      stats["src2tgt"] = stats_json(run.stats);
      stats["sizes"] = {{"src2tgt", run.mappings.size()}};
      auto a = std::unique_ptr<oa_mappings>(wrap(std::move(run.mappings), src, tgt));
      put_string(stats_out, stats.dump(2) + "\n");
      *src2tgt_out = a.release();
      if (tgt2src_out) *tgt2src_out = nullptr;
      if (combined_out) *combined_out = nullptr;
    }
  });
}

void oa_extend_options_default(oa_extend_options* options) {
  if (!options) return;
  oa::ExtensionConfig d;
  options->kappa = d.kappa;
  options->max_iterations = d.max_iterations;
  options->batch_size = d.batch_size;
  options->workers = 0;
}

oa_status oa_extend(const oa_mappings* seeds, const oa_scorer* scorer, const oa_extend_options* options,
                    oa_mappings** extended_out, char** report_out) {
  return guarded([&] {
    require(seeds, "seeds");
    require(scorer, "scorer");
    require(options, "options");
    require(extended_out, "extended_out");
    oa::ExtensionConfig cfg;
    cfg.kappa = options->kappa;
    cfg.max_iterations = options->max_iterations;
    cfg.batch_size = options->batch_size ? options->batch_size : scorer->batch_size;
    cfg.workers = options->workers;
    auto result = oa::extend(seeds->set, *seeds->source, *seeds->target, *scorer->scorer, cfg);
    ordered_json report{{"seeds", seeds->set.size()},
                        {"new_mappings", result.extended.size()},
                        {"generations", result.generations},
                        {"pairs_scored", result.pairs_scored},
                        {"score_failures", result.score_failures},
                        {"hit_iteration_cap", result.hit_iteration_cap},
                        {"kappa", cfg.kappa}};
    auto out = std::unique_ptr<oa_mappings>(wrap(std::move(result.extended), seeds->source, seeds->target));
    put_string(report_out, report.dump(2) + "\n");
    *extended_out = out.release();
  });
}

void oa_repair_options_default(oa_repair_options* options) {
  if (!options) return;
  oa::RepairOptions d;
  options->sibling_disjointness = d.sibling_disjointness;
  options->explicit_disjointness = d.explicit_disjointness;
  options->restore_pass = d.restore_pass;
}

oa_status oa_repair(const oa_mappings* mappings, const oa_repair_options* options, oa_mappings** kept_out,
                    oa_mappings** removed_out, char** report_out) {
  return guarded([&] {
    require(mappings, "mappings");
    require(options, "options");
    require(kept_out, "kept_out");
    require(removed_out, "removed_out");
    oa::RepairOptions ro;
    ro.sibling_disjointness = options->sibling_disjointness != 0;
    ro.explicit_disjointness = options->explicit_disjointness != 0;
    ro.restore_pass = options->restore_pass != 0;
    const auto& src = *mappings->source;
    const auto& tgt = *mappings->target;
    auto problem = oa::build_repair_problem(src, tgt, mappings->set, ro);
    auto result = oa::repair(problem);
    auto report = oa::repair_report_json(result, src, tgt, mappings->set.size());
    auto kept = std::unique_ptr<oa_mappings>(wrap(std::move(result.kept), mappings->source, mappings->target));
    auto removed = std::unique_ptr<oa_mappings>(wrap(std::move(result.removed), mappings->source, mappings->target));
    put_string(report_out, report);
    *kept_out = kept.release();
    *removed_out = removed.release();
  });
}

oa_status oa_evaluate(const oa_mappings* output, const oa_mappings* references, const oa_mappings* ignored,
                      char** report_out) {
  return guarded([&] {
    require(output, "output");
    require(references, "references");
    require(report_out, "report_out");
    same_ontologies(output, references);
    oa::PairSet ignored_pairs;
    if (ignored) {
      same_ontologies(output, ignored);
      ignored_pairs = ignored->set.pairs();
    }
    auto r = oa::evaluate(output->set.pairs(), references->set.pairs(), ignored_pairs);
    *report_out = dup_string(report_json(r).dump(2) + "\n");
  });
}

oa_status oa_sweep(const oa_mappings* const* runs, const oa_direction* directions, size_t n_runs,
                   const oa_mappings* validation, const oa_mappings* ignored, const double* grid, size_t n_grid,
                   char** csv_out, char** best_out) {
  return guarded([&] {
    require(runs && directions && n_runs > 0, "runs");
    require(validation, "validation");
    std::map<oa::Direction, const oa::MappingSet*> table;
    for (std::size_t i = 0; i < n_runs; ++i) {
      require(runs[i], "run");
      same_ontologies(runs[i], validation);
      if (!table.emplace(to_direction(directions[i]), &runs[i]->set).second) {
        throw oa::Error(oa::ErrorCode::invalid_argument, "duplicate direction in sweep");
      }
    }
    oa::PairSet ignored_pairs;
    if (ignored) {
      same_ontologies(validation, ignored);
      ignored_pairs = ignored->set.pairs();
    }
    std::vector<double> lambdas = grid && n_grid ? std::vector<double>(grid, grid + n_grid) : oa::default_lambda_grid();
    auto result = oa::validate_hyperparams(table, validation->set, ignored_pairs, lambdas);
    ordered_json best = report_json(result.best);
    best["direction"] = oa::to_string(result.tau);
    best["lambda"] = result.lambda;
    std::string csv = oa::grid_csv(result.grid);
    std::string best_text = best.dump(2) + "\n";
    put_string(csv_out, csv);
    put_string(best_out, best_text);
  });
}

oa_status oa_config_check(const char* path, char** canonical_out, char** hash_out) {
  return guarded([&] {
    require(path, "path");
    auto cfg = oa::parse_config(path);
    put_string(canonical_out, oa::to_json_text(cfg));
    put_string(hash_out, oa::config_hash(cfg));
  });
}

oa_status oa_run_experiment(const char* config_path, const char* output_dir, long workers, char** summary_out) {
  return guarded([&] {
    require(config_path, "config_path");
    auto cfg = oa::parse_config(config_path);
    if (output_dir && *output_dir) cfg.output = output_dir;
    if (workers >= 0) cfg.workers = static_cast<std::size_t>(workers);
    auto outcome = oa::run_experiment(cfg);
    put_string(summary_out, outcome.summary_json);
  });
}

}  // extern "C"
