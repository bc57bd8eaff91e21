#include "ontoalign/experiment.hpp"

#include <chrono>
#include <cstdlib>
#include <functional>
#include <memory>

#include <json.hpp>
#include <spdlog/spdlog.h>

#include "ontoalign/corpus.hpp"
#include "ontoalign/error.hpp"
#include "ontoalign/evaluation.hpp"
#include "ontoalign/manifest.hpp"
#include "ontoalign/prediction.hpp"
#include "ontoalign/refinement.hpp"
#include "ontoalign/subword_index.hpp"

namespace ontoalign {
namespace {

using ordered_json = nlohmann::ordered_json;

class StageRunner {
 public:
  StageRunner(RunManifest& manifest, std::filesystem::path dir) : manifest_(manifest), dir_(std::move(dir)) {}

  template <typename Fn>
  void run(const std::string& stage, Fn&& fn) {
    spdlog::info("stage {}", stage);
    auto start = std::chrono::steady_clock::now();
    try {
      fn();
    } catch (const std::exception& e) {
      record(stage, start);
      manifest_.status = "failed";
      manifest_.failed_stage = stage;
      manifest_.failure = e.what();
      emit_manifest(manifest_, dir_);
      auto code = ErrorCode::invalid_argument;
      if (const auto* err = dynamic_cast<const Error*>(&e)) code = err->code();
      throw Error(code, "stage '" + stage + "' failed: " + e.what());
    }
    record(stage, start);
  }

 private:
  void record(const std::string& stage, std::chrono::steady_clock::time_point start) {
    std::chrono::duration<double, std::milli> ms = std::chrono::steady_clock::now() - start;
    manifest_.stage_timings.emplace_back(stage, ms.count());
  }

  RunManifest& manifest_;
  std::filesystem::path dir_;
};

ordered_json report_json(const EvalReport& r) {
  ordered_json j;
  j["precision"] = r.precision;
  j["recall"] = r.recall;
  j["f1"] = r.f1;
  j["true_positives"] = r.true_positives;
  j["output_considered"] = r.output_considered;
  j["reference_considered"] = r.reference_considered;
  j["ignored_size"] = r.ignored_size;
  if (r.precision_undefined) j["precision_undefined"] = true;
  if (r.recall_undefined) j["recall_undefined"] = true;
  return j;
}

ordered_json stats_json(const PredictionStats& s) {
  return ordered_json{{"classes_processed", s.classes_processed},
                      {"classes_with_candidates", s.classes_with_candidates},
                      {"candidates_scored", s.candidates_scored},
                      {"scorer_calls", s.scorer_calls},
                      {"short_circuit_hits", s.short_circuit_hits},
                      {"score_unavailable", s.score_unavailable},
                      {"classes_skipped", s.classes_skipped}};
}

std::string corpus_label(const CorpusSettings& c) {
  std::string out;
  auto add = [&](bool on, const char* name) {
    if (!on) return;
    if (!out.empty()) out += '+';
    out += name;
  };
  add(c.io, "io");
  add(c.co, "co");
  add(c.cp, "cp");
  add(c.ids, "ids");
  return out.empty() ? "none" : out;
}

std::string substitute(std::string text, const std::string& key, const std::string& value) {
  for (auto pos = text.find(key); pos != std::string::npos; pos = text.find(key, pos + value.size())) {
    text.replace(pos, key.size(), value);
  }
  return text;
}

}  // namespace

ExperimentOutcome run_experiment(const ExperimentConfig& config) {
  config.validate();
  if (config.output.empty()) throw Error(ErrorCode::config, "config: output: required for run");
  if (config.vocab.empty()) throw Error(ErrorCode::config, "config: vocab: required for run");
  if (config.refs_equivalent.empty()) throw Error(ErrorCode::config, "config: references.equivalent: required for run");

  // Digests first: a missing input fails before any stage runs.
  RunManifest manifest = make_manifest(config);
  const auto& dir = config.output;
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::io, "cannot create output directory " + dir.string() + ": " + ec.message());
  StageRunner stages(manifest, dir);
  const std::size_t workers = config.workers;

  Ontology source, target;
  std::vector<Ontology> auxiliary;
  std::shared_ptr<const WordPieceVocab> vocab;
  MappingSet refs_eq, refs_ignored;
  LoadOptions load_options{config.label_properties};

  stages.run("load", [&] {
    source = load_ontology(config.source, load_options);
    target = load_ontology(config.target, load_options);
    for (const auto& a : config.auxiliary) auxiliary.push_back(load_ontology(a, load_options));
    vocab = std::make_shared<const WordPieceVocab>(WordPieceVocab::load(config.vocab));
    refs_eq = load_mappings(config.refs_equivalent, source, target, MappingKind::reference_eq).mappings;
    if (!config.refs_ignored.empty()) {
      refs_ignored = load_mappings(config.refs_ignored, source, target, MappingKind::reference_ignored).mappings;
    }
  });

  ReferenceSplit split;
  stages.run("split", [&] {
    split = split_references(refs_eq, config.split);
    save_mappings(split.train, source, target, dir / "refs_train.tsv");
    save_mappings(split.val, source, target, dir / "refs_val.tsv");
    save_mappings(split.test, source, target, dir / "refs_test.tsv");
  });

  ordered_json corpus_counts;
  if (config.corpus.build) {
    stages.run("corpus", [&] {
      CorpusConfig cc;
      cc.use_ids = config.corpus.ids;
      cc.use_co = config.corpus.co;
      cc.use_cp = config.corpus.cp;
      cc.negatives_per_synonym = config.corpus.negatives_per_synonym;
      cc.soft_negatives = config.corpus.soft_negatives;
      cc.hard_negatives = config.corpus.hard_negatives;
      cc.seed = config.corpus.seed;
      std::vector<Corpus> parts;
      if (config.corpus.io) {
        parts.push_back(build_intra_corpus(source, cc));
        parts.push_back(build_intra_corpus(target, cc));
      }
      if (config.corpus.co) parts.push_back(build_cross_corpus(source, target, split.train, cc));
      if (config.corpus.cp) {
        for (const auto& aux : auxiliary) parts.push_back(build_comp_corpus(source, target, aux, cc));
      }
      if (parts.empty()) throw Error(ErrorCode::config, "corpus build requested with no corpus enabled");
      auto corpus_split = merge_and_split(parts, config.corpus.val_fraction, cc.seed);
      write_corpus_files(corpus_split, cc, config.corpus.val_fraction, dir / "corpus");
      corpus_counts = {{"train", corpus_split.train.samples.size()}, {"val", corpus_split.val.samples.size()}};
    });
    if (!config.corpus.finetune_command.empty()) {
      stages.run("finetune", [&] {
        std::string cmd = config.corpus.finetune_command;
        cmd = substitute(cmd, "{train}", (dir / "corpus" / "train.jsonl").string());
        cmd = substitute(cmd, "{val}", (dir / "corpus" / "val.jsonl").string());
        cmd = substitute(cmd, "{dir}", dir.string());
        int rc = std::system(cmd.c_str());
        if (rc != 0) throw Error(ErrorCode::io, "fine-tune command exited with status " + std::to_string(rc));
      });
    }
  }

  std::unique_ptr<PairScorer> scorer;
  std::optional<SubwordIndex> src_index, tgt_index;
  stages.run("index", [&] {
    scorer = make_scorer(config.scorer);
    src_index = SubwordIndex::build(source, vocab, workers);
    tgt_index = SubwordIndex::build(target, vocab, workers);
  });

  DirectionalMappings predicted;
  stages.run("predict", [&] {
    PredictOptions options{config.k, config.scorer.batch_size, workers};
    predicted = predict_all(source, target, *src_index, *tgt_index, *scorer, options);
    save_mappings(predicted.src2tgt.mappings, source, target, dir / "predictions" / "src2tgt.tsv");
    save_mappings(predicted.tgt2src.mappings, source, target, dir / "predictions" / "tgt2src.tsv");
    save_mappings(predicted.combined, source, target, dir / "predictions" / "combined.tsv");
  });

  const PairSet val_ignored = [&] {
    auto s = pair_union({&refs_ignored, &split.train, &split.test});
    return s;
  }();
  const PairSet test_ignored = pair_union({&refs_ignored, &split.train, &split.val});
  const std::map<Direction, const MappingSet*> runs{{Direction::src2tgt, &predicted.src2tgt.mappings},
                                                    {Direction::tgt2src, &predicted.tgt2src.mappings},
                                                    {Direction::combined, &predicted.combined}};

  ValidationResult step1;
  stages.run("validate", [&] {
    step1 = validate_hyperparams(runs, split.val, val_ignored, config.lambda_grid);
    write_file(dir / "validation_step1.csv", grid_csv(step1.grid));
  });
  const MappingSet& chosen = predicted.get(step1.tau);
  const MappingSet base_output = threshold(chosen, step1.lambda);

  ordered_json rows = ordered_json::array();
  const PairSet test_refs = split.test.pairs();
  auto add_row = [&](const std::string& stage, double lambda, const MappingSet& out) {
    auto r = evaluate(out.pairs(), test_refs, test_ignored);
    ordered_json row;
    row["stage"] = stage;
    row["tau"] = to_string(step1.tau);
    row["lambda"] = lambda;
    row["mappings"] = out.size();
    row["precision"] = r.precision;
    row["recall"] = r.recall;
    row["f1"] = r.f1;
    rows.push_back(std::move(row));
  };

  MappingSet final_output = base_output;
  double final_lambda = step1.lambda;
  ordered_json validation;
  validation["step1"] = {{"tau", to_string(step1.tau)}, {"lambda", step1.lambda}, {"f1", step1.best.f1}};
  ordered_json extension_info, repair_info;

  stages.run("evaluate-base", [&] {
    save_mappings(base_output, source, target, dir / "output_base.tsv");
    add_row("predict", step1.lambda, base_output);
  });

  if (config.refinement.extend) {
    ExtensionResult ext;
    stages.run("extend", [&] {
      ExtensionConfig ec_cfg;
      ec_cfg.kappa = config.refinement.kappa;
      ec_cfg.max_iterations = config.refinement.max_iterations;
      ec_cfg.batch_size = config.scorer.batch_size;
      ec_cfg.workers = workers;
      ext = extend(base_output, source, target, *scorer, ec_cfg);
      save_mappings(ext.extended, source, target, dir / "extended.tsv");
      extension_info = {{"new_mappings", ext.extended.size()},
                        {"generations", ext.generations},
                        {"pairs_scored", ext.pairs_scored},
                        {"score_failures", ext.score_failures}};
    });
    stages.run("validate-extended", [&] {
      MappingSet pool = chosen;
      for (const auto& m : ext.extended) pool.add_keep_max(m);
      const std::map<Direction, const MappingSet*> pool_run{{step1.tau, &pool}};
      auto step2 = validate_hyperparams(pool_run, split.val, val_ignored, config.lambda_grid);
      write_file(dir / "validation_step2.csv", grid_csv(step2.grid));
      validation["step2"] = {{"tau", to_string(step1.tau)}, {"lambda", step2.lambda}, {"f1", step2.best.f1}};
      final_lambda = step2.lambda;
      final_output = threshold(pool, step2.lambda);
      final_output.canonicalize(source, target);
      save_mappings(final_output, source, target, dir / "output_extended.tsv");
      add_row("predict+ex", final_lambda, final_output);
    });
  }

  if (config.refinement.repair) {
    stages.run("repair", [&] {
      RepairOptions ro;
      ro.sibling_disjointness = config.refinement.sibling_disjointness;
      ro.restore_pass = config.refinement.restore_pass;
      auto problem = build_repair_problem(source, target, final_output, ro);
      auto result = repair(problem);
      save_mappings(result.kept, source, target, dir / "repair_kept.tsv");
      save_mappings(result.removed, source, target, dir / "repair_removed.tsv");
      write_file(dir / "repair_report.json", repair_report_json(result, source, target, final_output.size()));
      repair_info = {{"removed", result.removed.size()},
                     {"restored", result.restored},
                     {"unsat_before", result.unsat_before},
                     {"unsat_after", result.unsat_remaining.size()}};
      final_output = result.kept;
      add_row(config.refinement.extend ? "predict+ex+rp" : "predict+rp", final_lambda, final_output);
    });
  }

  std::string summary_text;
  stages.run("summarize", [&] {
    save_mappings(final_output, source, target, dir / "final.tsv");
    ordered_json summary;
    summary["schema_version"] = 1;
    summary["task"] = source.name() + "-" + target.name();
    summary["setting"] = {{"mode", to_string(config.split.mode)},
                          {"corpus", config.corpus.build ? corpus_label(config.corpus) : "none"},
                          {"scorer", to_string(config.scorer.kind)},
                          {"k", config.k},
                          {"kappa", config.refinement.kappa},
                          {"extend", config.refinement.extend},
                          {"repair", config.refinement.repair}};
    summary["split"] = {{"train", split.train.size()},
                        {"val", split.val.size()},
                        {"test", split.test.size()},
                        {"seed", config.split.seed}};
    summary["validation"] = validation;
    summary["prediction_stats"] = {{"src2tgt", stats_json(predicted.src2tgt.stats)},
                                   {"tgt2src", stats_json(predicted.tgt2src.stats)}};
    if (!extension_info.is_null()) summary["extension"] = extension_info;
    if (!repair_info.is_null()) summary["repair"] = repair_info;
    if (!corpus_counts.is_null()) summary["corpus"] = corpus_counts;
    summary["rows"] = rows;
    summary["final"] = report_json(evaluate(final_output.pairs(), test_refs, test_ignored));
    summary_text = summary.dump(2) + "\n";
    write_file(dir / "summary.json", summary_text);
  });

  emit_manifest(manifest, dir);
  return {dir, summary_text};
}

}  // namespace ontoalign
