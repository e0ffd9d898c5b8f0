/* Prominent-difference pipeline: relative attribute rankers, prominence
   prediction, WhittleSearch re-ranking and comparative descriptions.

   Every call returns a pd_status. On failure a message is available from
   pd_last_error() on the same thread until the next failing call. Strings
   returned through char** out-parameters are owned by the caller and released
   with pd_string_free(). Options and results are JSON documents; a NULL or
   empty options string selects defaults. */

#ifndef PROMINENCE_PROMINENCE_H
#define PROMINENCE_PROMINENCE_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define PD_API __declspec(dllexport)
#else
#define PD_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum pd_status {
  PD_OK = 0,
  PD_ERR_INVALID_ARGUMENT = 1,
  PD_ERR_IO = 2,
  PD_ERR_PARSE = 3,
  PD_ERR_NOT_FOUND = 4,
  PD_ERR_STATE = 5,
  PD_ERR_CAPACITY = 6,
  PD_ERR_INTERNAL = 7
} pd_status;

typedef struct pd_dataset pd_dataset;
typedef struct pd_model pd_model;
typedef struct pd_scores pd_scores;

PD_API const char* pd_version(void);
PD_API const char* pd_status_name(pd_status status);
PD_API const char* pd_last_error(void);
PD_API void pd_string_free(char* s);

/* 64-bit FNV-1a of a file's bytes. */
PD_API pd_status pd_hash_file(const char* path, uint64_t* out);

/* Generates a synthetic dataset with oracle labels into out_dir (created if
   missing). spec_json keys: M, D, n_images, map_seed, annotator_count, alpha,
   beta, temperature, seed, noise_sigma, n_ordered_pairs, n_similar_pairs,
   n_labeled_pairs, ordered_threshold, similar_threshold. */
PD_API pd_status pd_synthesize(const char* spec_json, const char* out_dir);

/* Loads vocab.json, images.jsonl, pairs.csv and votes.jsonl from dir.
   options: {"annotator_count": 7} (0 disables the vote-total check). */
PD_API pd_status pd_dataset_load(const char* dir, const char* options_json, pd_dataset** out);
PD_API void pd_dataset_free(pd_dataset* dataset);
/* {"M", "D", "images", "ordered_pairs", "similar_pairs", "vote_pairs",
   "agreement": {...}, "synthetic": bool} */
PD_API pd_status pd_dataset_info(const pd_dataset* dataset, char** out_json);

/* options: {"C", "epochs", "similar_margin", "seed"} */
PD_API pd_status pd_train_ranker(const pd_dataset* dataset, const char* options_json, pd_model** out);
/* A model holding only the dataset vocabulary, for training prominence on
   external scores. */
PD_API pd_status pd_model_create(const pd_dataset* dataset, pd_model** out);
PD_API pd_status pd_model_load(const char* path, pd_model** out);
/* run_json, when given, is embedded under "run" (seed, config hash). */
PD_API pd_status pd_model_save(const pd_model* model, const char* path, const char* run_json);
PD_API void pd_model_free(pd_model* model);
/* {"version", "M", "vocab", "ranker": bool, "prominence": bool, "baselines": [...]} */
PD_API pd_status pd_model_info(const pd_model* model, char** out_json);

/* Standardized scores of every dataset image under the model's ranker. */
PD_API pd_status pd_score(const pd_model* model, const pd_dataset* dataset, pd_scores** out);
/* External score CSV (image_id,score_0..), standardized over the file; must
   cover every dataset image. */
PD_API pd_status pd_scores_ingest(const char* path, const pd_dataset* dataset, pd_scores** out);
PD_API pd_status pd_scores_save(const pd_scores* scores, const char* path);
PD_API void pd_scores_free(pd_scores* scores);

/* Trains the prominence model on every voted pair and, unless
   {"baselines": false}, the widest+tf-idf, single-image and prior baselines.
   options: {"C", "feature_map", "calibration_fraction", "refit_on_full",
   "seed", "baselines"} */
PD_API pd_status pd_train_prominence(pd_model* model, const pd_dataset* dataset, const pd_scores* scores,
                                     const char* options_json);

/* Ranked attribute list for one pair. method: "model" (default), "widest",
   "single" or "prior". */
PD_API pd_status pd_predict(const pd_model* model, const pd_scores* scores, const char* id_i, const char* id_j,
                            const char* method, char** out_json);

/* {"i", "j", "k", "statements", "text", "confidences"} */
PD_API pd_status pd_describe(const pd_model* model, const pd_scores* scores, const char* id_i, const char* id_j,
                             size_t k, char** out_json);

/* Cross-validated comparison. options: {"folds", "seed", "max_k", "methods",
   "ranker": {...}, "prominence": {...}, "scores_path", "oracle"}.
   Result: {"summary", "accuracy_csv", "gnuplot"} */
PD_API pd_status pd_evaluate(const pd_dataset* dataset, const char* options_json, char** out_json);

/* Simulated WhittleSearch on a fresh population from a synthetic dataset's
   spec. options: {"database_size", "targets", "iterations", "page_size",
   "references", "noise", "threshold", "seed"}. Result: {"summary", "csv"} */
PD_API pd_status pd_search_experiment(const pd_model* model, const pd_dataset* dataset, const char* options_json,
                                      char** out_json);

/* Runs the HTTP service until the process is stopped. options: {"host",
   "port", "page_size", "session_ttl", "max_sessions", "asset_dir", "seed"}. */
PD_API pd_status pd_serve(const pd_model* model, const pd_dataset* dataset, const pd_scores* scores,
                          const char* options_json);

#ifdef __cplusplus
}
#endif

#endif
