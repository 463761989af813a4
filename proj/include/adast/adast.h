/*
 * adast: adversarial domain adaptation with self-training for single-channel
 * biosignal sleep staging, plus a synthetic domain-shift benchmark.
 *
 * C API of the shared library: opaque handles and status codes. All heavy
 * state lives behind the handles; strings are UTF-8, paths are filesystem
 * paths. Every function returning adast_status leaves a human-readable
 * message for the calling thread in adast_last_error() on failure.
 */
#ifndef ADAST_ADAST_H
#define ADAST_ADAST_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum adast_status {
  ADAST_OK = 0,
  ADAST_ERROR_INVALID_ARGUMENT = 1,
  ADAST_ERROR_CONFIG = 2,
  ADAST_ERROR_DATA = 3,
  ADAST_ERROR_NUMERIC = 4,
  ADAST_ERROR_IO = 5
} adast_status;

typedef enum adast_domain_role {
  ADAST_DOMAIN_SOURCE = 0,
  ADAST_DOMAIN_TARGET = 1
} adast_domain_role;

typedef enum adast_split {
  ADAST_SPLIT_TRAIN = 0,
  ADAST_SPLIT_VAL = 1,
  ADAST_SPLIT_TEST = 2
} adast_split;

/* Experiment configuration: flat dotted keys, e.g. loss.lambda1 = 0.01. */
typedef struct adast_config adast_config;
/* A single-domain collection of labeled/unlabeled 30-second epochs. */
typedef struct adast_dataset adast_dataset;

const char* adast_version(void);
const char* adast_status_name(adast_status status);
/* Message of the most recent failure on this thread; empty if none. */
const char* adast_last_error(void);

/* ---- configuration -------------------------------------------------- */

adast_status adast_config_create(adast_config** out_config);
void adast_config_destroy(adast_config* config);

/* Merges assignments from a key = value file over the current state. */
adast_status adast_config_load_file(adast_config* config, const char* path);
adast_status adast_config_set(adast_config* config, const char* key, const char* value);
/* Copies the value into buffer (NUL-terminated). */
adast_status adast_config_get(const adast_config* config, const char* key, char* buffer,
                              size_t buffer_len);
/* Reports every problem at once through adast_last_error(). */
adast_status adast_config_validate(const adast_config* config);
adast_status adast_config_write_file(const adast_config* config, const char* path);

/* ---- datasets -------------------------------------------------------- */

typedef struct adast_dataset_info {
  uint64_t n_records;
  uint32_t n_subjects;
  uint32_t t;
  uint32_t k;
} adast_dataset_info;

adast_status adast_dataset_generate(const adast_config* config, adast_domain_role role,
                                    adast_dataset** out_dataset);
adast_status adast_dataset_load(const char* path, adast_dataset** out_dataset);
adast_status adast_dataset_save(const adast_dataset* dataset, const char* path);
adast_status adast_dataset_get_info(const adast_dataset* dataset, adast_dataset_info* out_info);
/* counts must hold at least k entries; unlabeled records are not counted. */
adast_status adast_dataset_class_histogram(const adast_dataset* dataset, uint64_t* counts,
                                           size_t counts_len);
void adast_dataset_destroy(adast_dataset* dataset);

/* ---- experiments ------------------------------------------------------ */

typedef struct adast_run_summary {
  double acc_mean;
  double acc_std;
  double mf1_mean;
  double mf1_std;
  uint32_t n_seeds;
} adast_run_summary;

/* Writes source.adst / target.adst plus config and summary into out_dir. */
adast_status adast_generate_data_files(const adast_config* config, const char* out_dir);

/* Runs train.mode (adast | source-only) for every configured seed; writes
 * per-seed artifacts and a mean/std summary into out_dir. */
adast_status adast_run_training(const adast_config* config, const char* out_dir,
                                adast_run_summary* out_summary);

/* The five-component study: (-,-,-), ATT, ATT+DC, ATT+ST, ATT+DC+ST. */
adast_status adast_run_ablation(const adast_config* config, const char* out_dir);

/* which_lambda: 1 or 2. One full training per grid point per seed. */
adast_status adast_run_sweep(const adast_config* config, int which_lambda, const char* out_dir);

/* Loads the checkpoint against the dataset's geometry and evaluates one
 * split through the given domain path. report_path may be NULL. */
adast_status adast_evaluate_checkpoint(const adast_config* config, const char* checkpoint_path,
                                       const char* data_path, adast_domain_role route,
                                       adast_split split, const char* report_path,
                                       double* out_acc, double* out_mf1);

/* One CSV row per record: domain, subject, true label, predicted label and
 * the flattened post-attention feature vector. */
adast_status adast_dump_embeddings(const adast_config* config, const char* checkpoint_path,
                                   const char* data_path, adast_domain_role route,
                                   const char* out_csv);

#ifdef __cplusplus
}
#endif

#endif /* ADAST_ADAST_H */
