// ontoalign: command-line front end over the C API.
//
// Results go to files under --out; stderr carries logs and errors. Exit
// status is 0 on success, 1 on a runtime error and 2 on a usage error.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ontoalign/ontoalign.h"

namespace fs = std::filesystem;
using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

struct Failure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Missing or contradictory arguments that CLI11 cannot express.
struct UsageError : Failure {
  using Failure::Failure;
};

void check(oa_status status, const std::string& what) {
  if (status == OA_OK) return;
  throw Failure(what + ": " + oa_last_error() + " [" + oa_status_name(status) + "]");
}

template <typename T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};
using Ontology = std::unique_ptr<oa_ontology, Deleter<oa_ontology, oa_ontology_free>>;
using Vocab = std::unique_ptr<oa_vocab, Deleter<oa_vocab, oa_vocab_free>>;
using Index = std::unique_ptr<oa_index, Deleter<oa_index, oa_index_free>>;
using Mappings = std::unique_ptr<oa_mappings, Deleter<oa_mappings, oa_mappings_free>>;
using Scorer = std::unique_ptr<oa_scorer, Deleter<oa_scorer, oa_scorer_free>>;

/// Takes ownership of a library-allocated string.
std::string take(char* s) {
  if (!s) return {};
  std::string out(s);
  oa_string_free(s);
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw Failure("cannot write " + path.string());
}

struct Global {
  std::string config;
  long workers = -1;
  std::string log_level = "warn";
  std::string out;
  /// Canonical form of --config, when given.
  json cfg;
};

std::size_t workers_of(const Global& g) {
  if (g.workers >= 0) return static_cast<std::size_t>(g.workers);
  if (g.cfg.contains("workers")) return g.cfg["workers"].get<std::size_t>();
  return 0;
}

/// Value from the command line if given, else from the config, else fallback.
template <typename T>
T pick(const CLI::Option* opt, const T& cli_value, const Global& g, const json::json_pointer& ptr) {
  if (opt->count() > 0) return cli_value;
  if (!g.cfg.is_null() && g.cfg.contains(ptr)) {
    const auto& v = g.cfg.at(ptr);
    if constexpr (std::is_same_v<T, std::string>) {
      if (v.is_string() && !v.get<std::string>().empty()) return v.get<std::string>();
    } else {
      return v.get<T>();
    }
  }
  return cli_value;
}

fs::path out_dir(const Global& g) {
  fs::path dir = g.out;
  if (dir.empty() && g.cfg.contains("output")) dir = g.cfg["output"].get<std::string>();
  if (dir.empty()) throw UsageError("--out is required");
  return dir;
}

std::vector<std::string> label_properties(const Global& g, const std::vector<std::string>& cli) {
  if (!cli.empty()) return cli;
  if (g.cfg.contains("label_properties")) return g.cfg["label_properties"].get<std::vector<std::string>>();
  return {};
}

Ontology load_ontology(const std::string& path, const std::vector<std::string>& props) {
  if (path.empty()) throw UsageError("ontology path is required");
  std::vector<const char*> raw;
  for (const auto& p : props) raw.push_back(p.c_str());
  oa_ontology* o = nullptr;
  check(oa_ontology_load(path.c_str(), raw.empty() ? nullptr : raw.data(), raw.size(), &o), "loading " + path);
  return Ontology(o);
}

Mappings load_mappings(const std::string& path, const Ontology& src, const Ontology& tgt) {
  oa_mappings* m = nullptr;
  check(oa_mappings_load(path.c_str(), src.get(), tgt.get(), &m), "loading " + path);
  return Mappings(m);
}

void save(const Mappings& m, const fs::path& path) {
  check(oa_mappings_save(m.get(), path.string().c_str()), "writing " + path.string());
}

// Options shared by commands that read the two ontologies.
struct PairArgs {
  std::string src, tgt;
  std::vector<std::string> label_props;
  CLI::Option* src_opt = nullptr;
  CLI::Option* tgt_opt = nullptr;

  void add(CLI::App* cmd) {
    src_opt = cmd->add_option("--src", src, "Source ontology (JSON or RDF/XML)");
    tgt_opt = cmd->add_option("--tgt", tgt, "Target ontology (JSON or RDF/XML)");
    cmd->add_option("--label-property", label_props, "Annotation property IRI read as a label (repeatable)");
  }

  std::pair<Ontology, Ontology> load(const Global& g) const {
    auto props = label_properties(g, label_props);
    auto s = pick(src_opt, src, g, "/source"_json_pointer);
    auto t = pick(tgt_opt, tgt, g, "/target"_json_pointer);
    return {load_ontology(s, props), load_ontology(t, props)};
  }
};

struct ScorerArgs {
  std::string kind = "mock";
  std::string endpoint;
  int timeout_ms = 30000;
  int max_in_flight = 4;
  std::size_t batch_size = 32;
  CLI::Option *kind_opt = nullptr, *endpoint_opt = nullptr, *timeout_opt = nullptr, *flight_opt = nullptr,
              *batch_opt = nullptr;

  void add(CLI::App* cmd) {
    kind_opt = cmd->add_option("--scorer", kind, "string, edit, remote or mock")
                   ->check(CLI::IsMember({"string", "edit", "remote", "mock"}));
    endpoint_opt = cmd->add_option("--endpoint", endpoint, "Classifier service URL (remote scorer)");
    timeout_opt = cmd->add_option("--timeout-ms", timeout_ms, "Per-request timeout");
    flight_opt = cmd->add_option("--max-in-flight", max_in_flight, "Concurrent scorer requests");
    batch_opt = cmd->add_option("--batch-size", batch_size, "Label pairs per scorer request");
  }

  std::size_t batch(const Global& g) const { return pick(batch_opt, batch_size, g, "/scorer/batch_size"_json_pointer); }

  Scorer make(const Global& g) const {
    auto k = pick(kind_opt, kind, g, "/scorer/kind"_json_pointer);
    auto e = pick(endpoint_opt, endpoint, g, "/scorer/endpoint"_json_pointer);
    auto t = pick(timeout_opt, timeout_ms, g, "/scorer/timeout_ms"_json_pointer);
    auto f = pick(flight_opt, max_in_flight, g, "/scorer/max_in_flight"_json_pointer);
    oa_scorer* s = nullptr;
    check(oa_scorer_create(k.c_str(), e.c_str(), t, f, &s), "creating scorer");
    return Scorer(s);
  }

  ordered_json snapshot(const Global& g) const {
    return {{"kind", pick(kind_opt, kind, g, "/scorer/kind"_json_pointer)},
            {"endpoint", pick(endpoint_opt, endpoint, g, "/scorer/endpoint"_json_pointer)},
            {"batch_size", batch(g)}};
  }
};

double elapsed_ms(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ontology alignment: candidate selection, mapping scoring, refinement and evaluation"};
  app.set_version_flag("--version", std::string(oa_version()));
  app.require_subcommand(1);
  app.fallthrough();

  Global g;
  app.add_option("--config", g.config, "Experiment config (JSON or TOML)");
  app.add_option("--workers", g.workers, "Worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);
  app.add_option("--log-level", g.log_level, "trace, debug, info, warn, error or off");
  app.add_option("--out", g.out, "Output file or directory");

  // convert
  auto* convert = app.add_subcommand("convert", "Normalize an ontology into the JSON form");
  std::string convert_in;
  std::vector<std::string> convert_props;
  convert->add_option("--in", convert_in, "Input ontology")->required();
  convert->add_option("--label-property", convert_props, "Annotation property IRI read as a label (repeatable)");

  // corpus
  auto* corpus = app.add_subcommand("corpus", "Build the synonym classifier training corpus");
  PairArgs corpus_pair;
  corpus_pair.add(corpus);
  std::string corpus_train;
  std::vector<std::string> corpus_aux;
  bool no_io = false, ids = false, co = false, cp = false;
  int negatives = 4, soft = 2, hard = 2;
  double val_fraction = 0.2;
  std::uint64_t corpus_seed = 42;
  corpus->add_option("--train", corpus_train, "Training mappings (cross-ontology corpus)");
  corpus->add_option("--aux", corpus_aux, "Auxiliary ontology (complementary corpus, repeatable)");
  auto* no_io_opt = corpus->add_flag("--no-io", no_io, "Skip the intra-ontology corpus");
  auto* ids_opt = corpus->add_flag("--ids", ids, "Add identity synonyms");
  auto* co_opt = corpus->add_flag("--co", co, "Add the cross-ontology corpus");
  auto* cp_opt = corpus->add_flag("--cp", cp, "Add the complementary corpus");
  auto* neg_opt = corpus->add_option("--negatives", negatives, "Negatives per synonym");
  auto* soft_opt = corpus->add_option("--soft", soft, "Soft negatives per synonym");
  auto* hard_opt = corpus->add_option("--hard", hard, "Hard negatives per synonym");
  auto* vf_opt = corpus->add_option("--val-fraction", val_fraction, "Validation share of the corpus");
  auto* cseed_opt = corpus->add_option("--seed", corpus_seed, "Sampling seed");

  // index
  auto* index = app.add_subcommand("index", "Build the sub-word inverted index of an ontology");
  std::string index_in, index_vocab;
  std::vector<std::string> index_props;
  index->add_option("--in", index_in, "Ontology to index")->required();
  auto* index_vocab_opt = index->add_option("--vocab", index_vocab, "WordPiece vocabulary");
  index->add_option("--label-property", index_props, "Annotation property IRI read as a label (repeatable)");

  // predict
  auto* predict = app.add_subcommand("predict", "Predict mappings by candidate selection and scoring");
  PairArgs predict_pair;
  predict_pair.add(predict);
  ScorerArgs predict_scorer;
  predict_scorer.add(predict);
  std::string predict_vocab, direction = "both";
  std::size_t k = 200;
  auto* predict_vocab_opt = predict->add_option("--vocab", predict_vocab, "WordPiece vocabulary");
  auto* k_opt = predict->add_option("--k", k, "Candidates per class")->check(CLI::PositiveNumber);
  predict->add_option("--direction", direction, "src2tgt, tgt2src or both")
      ->check(CLI::IsMember({"src2tgt", "tgt2src", "both"}));

  // extend
  auto* extend = app.add_subcommand("extend", "Extend mappings to neighbouring classes");
  PairArgs extend_pair;
  extend_pair.add(extend);
  ScorerArgs extend_scorer;
  extend_scorer.add(extend);
  std::string extend_maps;
  double kappa = 0.9;
  std::size_t max_iterations = 1'000'000;
  extend->add_option("--maps", extend_maps, "Seed mappings (TSV)")->required();
  auto* kappa_opt = extend->add_option("--kappa", kappa, "Extension score threshold")->check(CLI::Range(0.0, 1.0));
  auto* iter_opt = extend->add_option("--max-iterations", max_iterations, "Cap on expanded mappings");

  // repair
  auto* repair = app.add_subcommand("repair", "Remove mappings that make classes unsatisfiable");
  PairArgs repair_pair;
  repair_pair.add(repair);
  std::string repair_maps;
  bool no_siblings = false, no_explicit = false, no_restore = false;
  repair->add_option("--maps", repair_maps, "Mappings to repair (TSV)")->required();
  repair->add_flag("--no-sibling-disjointness", no_siblings, "Do not assume siblings are disjoint");
  repair->add_flag("--no-explicit-disjointness", no_explicit, "Ignore declared disjointness");
  repair->add_flag("--no-restore", no_restore, "Skip re-admitting removed mappings");

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "Precision, recall and F1 against references");
  PairArgs eval_pair;
  eval_pair.add(evaluate);
  std::string eval_maps, eval_refs, eval_ignored;
  evaluate->add_option("--maps", eval_maps, "System mappings (TSV)")->required();
  evaluate->add_option("--refs", eval_refs, "Reference mappings (TSV)")->required();
  evaluate->add_option("--ignored", eval_ignored, "Mappings excluded from scoring (TSV)");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "Grid search over mapping direction and threshold");
  PairArgs sweep_pair;
  sweep_pair.add(sweep);
  std::string sweep_predictions, sweep_val, sweep_ignored;
  std::vector<double> sweep_grid;
  sweep->add_option("--predictions", sweep_predictions, "Directory with src2tgt.tsv, tgt2src.tsv, combined.tsv")
      ->required();
  sweep->add_option("--val", sweep_val, "Validation references (TSV)")->required();
  sweep->add_option("--ignored", sweep_ignored, "Mappings excluded from scoring (TSV)");
  auto* grid_opt = sweep->add_option("--lambda", sweep_grid, "Threshold grid (repeatable)");

  // run
  auto* run = app.add_subcommand("run", "Run a full experiment from --config");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    check(oa_set_log_level(g.log_level.c_str()), "--log-level");
    if (!g.config.empty()) {
      char* canonical = nullptr;
      check(oa_config_check(g.config.c_str(), &canonical, nullptr), "config " + g.config);
      g.cfg = json::parse(take(canonical));
    }
    const auto start = std::chrono::steady_clock::now();

    if (*convert) {
      if (g.out.empty()) throw UsageError("--out is required");
      auto o = load_ontology(convert_in, label_properties(g, convert_props));
      check(oa_ontology_save_json(o.get(), g.out.c_str()), "writing " + g.out);
    } else if (*corpus) {
      auto [src, tgt] = corpus_pair.load(g);
      auto dir = out_dir(g);
      oa_corpus_options opts;
      oa_corpus_options_default(&opts);
      opts.use_io = no_io_opt->count() ? 0 : pick(no_io_opt, true, g, "/corpus/io"_json_pointer);
      opts.use_ids = pick(ids_opt, ids, g, "/corpus/ids"_json_pointer);
      opts.use_co = pick(co_opt, co, g, "/corpus/co"_json_pointer);
      opts.use_cp = pick(cp_opt, cp, g, "/corpus/cp"_json_pointer);
      opts.negatives_per_synonym = pick(neg_opt, negatives, g, "/corpus/negatives_per_synonym"_json_pointer);
      opts.soft_negatives = pick(soft_opt, soft, g, "/corpus/soft_negatives"_json_pointer);
      opts.hard_negatives = pick(hard_opt, hard, g, "/corpus/hard_negatives"_json_pointer);
      opts.val_fraction = pick(vf_opt, val_fraction, g, "/corpus/val_fraction"_json_pointer);
      opts.seed = pick(cseed_opt, corpus_seed, g, "/corpus/seed"_json_pointer);
      Mappings train;
      if (!corpus_train.empty()) train = load_mappings(corpus_train, src, tgt);
      std::vector<Ontology> aux_owned;
      std::vector<std::string> aux_paths = corpus_aux;
      if (aux_paths.empty() && g.cfg.contains("auxiliary")) aux_paths = g.cfg["auxiliary"].get<std::vector<std::string>>();
      for (const auto& a : aux_paths) aux_owned.push_back(load_ontology(a, label_properties(g, corpus_pair.label_props)));
      std::vector<const oa_ontology*> aux;
      for (const auto& a : aux_owned) aux.push_back(a.get());
      char* report = nullptr;
      check(oa_corpus_build(src.get(), tgt.get(), train.get(), aux.data(), aux.size(), &opts, dir.string().c_str(),
                            &report),
            "building corpus");
      write_text(dir / "corpus_report.json", take(report));
    } else if (*index) {
      if (g.out.empty()) throw UsageError("--out is required");
      auto o = load_ontology(index_in, label_properties(g, index_props));
      auto vocab_path = pick(index_vocab_opt, index_vocab, g, "/vocab"_json_pointer);
      if (vocab_path.empty()) throw UsageError("--vocab is required");
      oa_vocab* v = nullptr;
      check(oa_vocab_load(vocab_path.c_str(), &v), "loading " + vocab_path);
      Vocab vocab(v);
      oa_index* ix = nullptr;
      check(oa_index_build(o.get(), vocab.get(), workers_of(g), &ix), "building index");
      Index idx(ix);
      check(oa_index_save_json(idx.get(), g.out.c_str()), "writing " + g.out);
    } else if (*predict) {
      auto [src, tgt] = predict_pair.load(g);
      auto dir = out_dir(g);
      auto vocab_path = pick(predict_vocab_opt, predict_vocab, g, "/vocab"_json_pointer);
      if (vocab_path.empty()) throw UsageError("--vocab is required");
      oa_vocab* v = nullptr;
      check(oa_vocab_load(vocab_path.c_str(), &v), "loading " + vocab_path);
      Vocab vocab(v);
      const auto workers = workers_of(g);
      oa_index *si = nullptr, *ti = nullptr;
      check(oa_index_build(src.get(), vocab.get(), workers, &si), "indexing source");
      Index src_index(si);
      check(oa_index_build(tgt.get(), vocab.get(), workers, &ti), "indexing target");
      Index tgt_index(ti);
      auto scorer = predict_scorer.make(g);
      oa_predict_options po;
      oa_predict_options_default(&po);
      po.k = pick(k_opt, k, g, "/prediction/k"_json_pointer);
      po.batch_size = predict_scorer.batch(g);
      po.workers = workers;
      oa_mappings *a = nullptr, *b = nullptr, *c = nullptr;
      char* stats = nullptr;
      const bool both = direction != "src2tgt";
      check(oa_predict(src_index.get(), tgt_index.get(), scorer.get(), &po, both, &a, &b, &c, &stats), "predicting");
      Mappings s2t(a), t2s(b), comb(c);
      if (direction != "tgt2src") save(s2t, dir / "src2tgt.tsv");
      if (direction != "src2tgt") save(t2s, dir / "tgt2src.tsv");
      if (direction == "both") save(comb, dir / "combined.tsv");
      ordered_json report;
      report["tool_version"] = oa_version();
      report["config"] = {{"source", pick(predict_pair.src_opt, predict_pair.src, g, "/source"_json_pointer)},
                          {"target", pick(predict_pair.tgt_opt, predict_pair.tgt, g, "/target"_json_pointer)},
                          {"vocab", vocab_path},
                          {"k", po.k},
                          {"direction", direction},
                          {"scorer", predict_scorer.snapshot(g)},
                          {"workers", workers}};
      report["seed"] = g.cfg.contains("/split/seed"_json_pointer) ? g.cfg.at("/split/seed"_json_pointer) : json(nullptr);
      report["stats"] = json::parse(take(stats));
      report["elapsed_ms"] = elapsed_ms(start);
      write_text(dir / "run_report.json", report.dump(2) + "\n");
    } else if (*extend) {
      auto [src, tgt] = extend_pair.load(g);
      auto dir = out_dir(g);
      auto seeds = load_mappings(extend_maps, src, tgt);
      auto scorer = extend_scorer.make(g);
      oa_extend_options eo;
      oa_extend_options_default(&eo);
      eo.kappa = pick(kappa_opt, kappa, g, "/refinement/kappa"_json_pointer);
      eo.max_iterations = pick(iter_opt, max_iterations, g, "/refinement/max_iterations"_json_pointer);
      eo.batch_size = extend_scorer.batch(g);
      eo.workers = workers_of(g);
      oa_mappings* ex = nullptr;
      char* report = nullptr;
      check(oa_extend(seeds.get(), scorer.get(), &eo, &ex, &report), "extending");
      Mappings extended(ex);
      save(extended, dir / "extended.tsv");
      write_text(dir / "extension_report.json", take(report));
    } else if (*repair) {
      auto [src, tgt] = repair_pair.load(g);
      auto dir = out_dir(g);
      auto maps = load_mappings(repair_maps, src, tgt);
      oa_repair_options ro;
      oa_repair_options_default(&ro);
      ro.sibling_disjointness = no_siblings ? 0 : pick(repair->get_option("--no-sibling-disjointness"), true, g,
                                                       "/refinement/sibling_disjointness"_json_pointer);
      ro.explicit_disjointness = !no_explicit;
      ro.restore_pass =
          no_restore ? 0 : pick(repair->get_option("--no-restore"), true, g, "/refinement/restore_pass"_json_pointer);
      oa_mappings *kept = nullptr, *removed = nullptr;
      char* report = nullptr;
      check(oa_repair(maps.get(), &ro, &kept, &removed, &report), "repairing");
      Mappings k_set(kept), r_set(removed);
      save(k_set, dir / "repair_kept.tsv");
      save(r_set, dir / "repair_removed.tsv");
      write_text(dir / "repair_report.json", take(report));
    } else if (*evaluate) {
      auto [src, tgt] = eval_pair.load(g);
      auto dir = out_dir(g);
      auto out = load_mappings(eval_maps, src, tgt);
      auto refs = load_mappings(eval_refs, src, tgt);
      Mappings ignored;
      if (!eval_ignored.empty()) ignored = load_mappings(eval_ignored, src, tgt);
      char* report = nullptr;
      check(oa_evaluate(out.get(), refs.get(), ignored.get(), &report), "evaluating");
      write_text(dir / "evaluation.json", take(report));
    } else if (*sweep) {
      auto [src, tgt] = sweep_pair.load(g);
      auto dir = out_dir(g);
      std::vector<Mappings> owned;
      std::vector<const oa_mappings*> runs;
      std::vector<oa_direction> dirs;
      const std::pair<const char*, oa_direction> files[] = {
          {"src2tgt.tsv", OA_DIR_SRC2TGT}, {"tgt2src.tsv", OA_DIR_TGT2SRC}, {"combined.tsv", OA_DIR_COMBINED}};
      for (const auto& [name, d] : files) {
        auto path = fs::path(sweep_predictions) / name;
        if (!fs::exists(path)) continue;
        owned.push_back(load_mappings(path.string(), src, tgt));
        runs.push_back(owned.back().get());
        dirs.push_back(d);
      }
      if (runs.empty()) throw Failure("no prediction TSVs in " + sweep_predictions);
      auto val = load_mappings(sweep_val, src, tgt);
      Mappings ignored;
      if (!sweep_ignored.empty()) ignored = load_mappings(sweep_ignored, src, tgt);
      std::vector<double> grid = sweep_grid;
      if (grid_opt->count() == 0 && g.cfg.contains("/evaluation/lambda_grid"_json_pointer)) {
        grid = g.cfg.at("/evaluation/lambda_grid"_json_pointer).get<std::vector<double>>();
      }
      char *csv = nullptr, *best = nullptr;
      check(oa_sweep(runs.data(), dirs.data(), runs.size(), val.get(), ignored.get(), grid.empty() ? nullptr : grid.data(),
                     grid.size(), &csv, &best),
            "sweeping");
      write_text(dir / "grid.csv", take(csv));
      write_text(dir / "best.json", take(best));
    } else if (*run) {
      if (g.config.empty()) throw UsageError("run needs --config");
      char* summary = nullptr;
      check(oa_run_experiment(g.config.c_str(), g.out.empty() ? nullptr : g.out.c_str(), g.workers, &summary),
            "run");
      take(summary);
    }
  } catch (const UsageError& e) {
    std::cerr << "ontoalign: usage error: " << e.what() << "\nRun with --help for more information.\n";
    return 2;
  } catch (const Failure& e) {
    std::cerr << "ontoalign: error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "ontoalign: error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
