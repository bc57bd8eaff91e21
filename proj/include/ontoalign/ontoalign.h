/* C interface to the ontology alignment library.
 *
 * All functions return an oa_status; on failure a description of the most
 * recent error on the calling thread is available from oa_last_error().
 * Handles are opaque and owned by the caller: release them with the matching
 * *_free function. Strings returned through char** out-parameters are
 * allocated by the library and must be released with oa_string_free().
 */
#ifndef ONTOALIGN_H
#define ONTOALIGN_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(ONTOALIGN_BUILDING)
#    define OA_API __declspec(dllexport)
#  else
#    define OA_API __declspec(dllimport)
#  endif
#else
#  define OA_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum oa_status {
  OA_OK = 0,
  OA_ERR_INVALID_ARGUMENT = 1,
  OA_ERR_IO = 2,
  OA_ERR_PARSE = 3,
  OA_ERR_CYCLE = 4,
  OA_ERR_UNKNOWN_FORMAT = 5,
  OA_ERR_INSUFFICIENT_DATA = 6,
  OA_ERR_CONFIG = 7,
  OA_ERR_SCORER_TRANSPORT = 8,
  OA_ERR_SCORER_PROTOCOL = 9,
  OA_ERR_UNDEFINED_SCORE = 10,
  OA_ERR_INTERNAL = 99
} oa_status;

typedef enum oa_direction {
  OA_DIR_SRC2TGT = 0,
  OA_DIR_TGT2SRC = 1,
  OA_DIR_COMBINED = 2
} oa_direction;

typedef struct oa_ontology oa_ontology;
typedef struct oa_vocab oa_vocab;
typedef struct oa_index oa_index;
typedef struct oa_mappings oa_mappings;
typedef struct oa_scorer oa_scorer;

OA_API const char* oa_version(void);
OA_API const char* oa_status_name(oa_status status);
/* Thread-local; empty string when the last call on this thread succeeded. */
OA_API const char* oa_last_error(void);
OA_API void oa_string_free(char* s);

/* trace, debug, info, warn, error, off. Logs go to stderr. */
OA_API oa_status oa_set_log_level(const char* level);

/* ---- ontologies ---- */

/* label_properties may be NULL (rdfs:label only). Format is detected from
 * the extension or content. */
OA_API oa_status oa_ontology_load(const char* path, const char* const* label_properties, size_t n_label_properties,
                                  oa_ontology** out);
OA_API void oa_ontology_free(oa_ontology* ontology);
OA_API size_t oa_ontology_size(const oa_ontology* ontology);
/* {"name", "classes", "labeled", "undeclared", "explicit_disjointness"} */
OA_API oa_status oa_ontology_info(const oa_ontology* ontology, char** json_out);
OA_API oa_status oa_ontology_save_json(const oa_ontology* ontology, const char* path);

/* ---- sub-word index ---- */

OA_API oa_status oa_vocab_load(const char* path, oa_vocab** out);
OA_API void oa_vocab_free(oa_vocab* vocab);

/* workers == 0 uses all available cores. The index keeps the ontology alive. */
OA_API oa_status oa_index_build(const oa_ontology* ontology, const oa_vocab* vocab, size_t workers, oa_index** out);
OA_API void oa_index_free(oa_index* index);
OA_API oa_status oa_index_save_json(const oa_index* index, const char* path);
/* Top-k candidates for a free-text label: [{"iri", "score"}, ...]. */
OA_API oa_status oa_index_select(const oa_index* index, const char* label, size_t k, char** json_out);

/* ---- mappings ---- */

/* Rows whose IRIs do not resolve are skipped and counted in the log. */
OA_API oa_status oa_mappings_load(const char* path, const oa_ontology* source, const oa_ontology* target,
                                  oa_mappings** out);
OA_API void oa_mappings_free(oa_mappings* mappings);
OA_API size_t oa_mappings_size(const oa_mappings* mappings);
OA_API oa_status oa_mappings_save(const oa_mappings* mappings, const char* path);
OA_API oa_status oa_mappings_threshold(const oa_mappings* mappings, double lambda, oa_mappings** out);

/* ---- scorers ---- */

/* kind: "string", "edit", "mock" or "remote" (endpoint required). */
OA_API oa_status oa_scorer_create(const char* kind, const char* endpoint, int timeout_ms, int max_in_flight,
                                  oa_scorer** out);
OA_API void oa_scorer_free(oa_scorer* scorer);

/* ---- corpus ---- */

typedef struct oa_corpus_options {
  int use_io;
  int use_ids;
  int use_co;
  int use_cp;
  int negatives_per_synonym;
  int soft_negatives;
  int hard_negatives;
  double val_fraction;
  uint64_t seed;
} oa_corpus_options;

OA_API void oa_corpus_options_default(oa_corpus_options* options);

/* Writes train.jsonl, val.jsonl and corpus_manifest.json to out_dir. train
 * may be NULL unless use_co is set; auxiliary may be NULL when n_auxiliary
 * is 0. report_out (nullable) receives sample counts. */
OA_API oa_status oa_corpus_build(const oa_ontology* source, const oa_ontology* target, const oa_mappings* train,
                                 const oa_ontology* const* auxiliary, size_t n_auxiliary,
                                 const oa_corpus_options* options, const char* out_dir, char** report_out);

/* ---- prediction ---- */

typedef struct oa_predict_options {
  size_t k;
  size_t batch_size;
  size_t workers;
} oa_predict_options;

OA_API void oa_predict_options_default(oa_predict_options* options);

/* Mappings are always oriented (source, target). With both_directions set
 * all three outputs are filled; otherwise only src2tgt_out is and the others
 * are set to NULL. stats_out (nullable) receives per-direction counters. */
OA_API oa_status oa_predict(const oa_index* source_index, const oa_index* target_index, const oa_scorer* scorer,
                            const oa_predict_options* options, int both_directions, oa_mappings** src2tgt_out,
                            oa_mappings** tgt2src_out, oa_mappings** combined_out, char** stats_out);

/* ---- refinement ---- */

typedef struct oa_extend_options {
  double kappa;
  size_t max_iterations;
  size_t batch_size;
  size_t workers;
} oa_extend_options;

OA_API void oa_extend_options_default(oa_extend_options* options);

/* extended_out receives only the new mappings. */
OA_API oa_status oa_extend(const oa_mappings* seeds, const oa_scorer* scorer, const oa_extend_options* options,
                           oa_mappings** extended_out, char** report_out);

typedef struct oa_repair_options {
  int sibling_disjointness;
  int explicit_disjointness;
  int restore_pass;
} oa_repair_options;

OA_API void oa_repair_options_default(oa_repair_options* options);

/* report_out: unsatisfiable counts before/after and each removal with its score. */
OA_API oa_status oa_repair(const oa_mappings* mappings, const oa_repair_options* options, oa_mappings** kept_out,
                           oa_mappings** removed_out, char** report_out);

/* ---- evaluation ---- */

/* ignored may be NULL. */
OA_API oa_status oa_evaluate(const oa_mappings* output, const oa_mappings* references, const oa_mappings* ignored,
                             char** report_out);

/* Grid search over (direction, lambda). runs[i] is the mapping set for
 * directions[i]. grid may be NULL for the default lambda grid. csv_out
 * receives direction,lambda,precision,recall,f1 rows; best_out the winner. */
OA_API oa_status oa_sweep(const oa_mappings* const* runs, const oa_direction* directions, size_t n_runs,
                          const oa_mappings* validation, const oa_mappings* ignored, const double* grid,
                          size_t n_grid, char** csv_out, char** best_out);

/* ---- experiments ---- */

/* Parses and validates a JSON or TOML config; canonical_out (nullable)
 * receives the normalized form and hash_out (nullable) its hash. */
OA_API oa_status oa_config_check(const char* path, char** canonical_out, char** hash_out);

/* Runs the whole pipeline. output_dir (nullable) overrides the configured
 * output directory; workers < 0 keeps the configured worker count. */
OA_API oa_status oa_run_experiment(const char* config_path, const char* output_dir, long workers,
                                   char** summary_out);

#ifdef __cplusplus
}
#endif

#endif /* ONTOALIGN_H */
