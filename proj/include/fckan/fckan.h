/* FC-KAN: Kolmogorov-Arnold network layers, multi-branch combination
 * networks and a training harness, behind a C ABI.
 *
 * Conventions
 *   - Every fallible call returns fckan_status; FCKAN_OK is 0.
 *   - On failure, fckan_last_error() describes the most recent error on the
 *     calling thread. The pointer stays valid until the next failing call.
 *   - Strings returned through char** are owned by the caller and released
 *     with fckan_string_free().
 *   - Specs and configs are "key = value" text, one entry per line.
 *   - Structured results are JSON documents.
 */
#ifndef FCKAN_FCKAN_H
#define FCKAN_FCKAN_H

#include <stddef.h>
#include <stdint.h>

#if defined(FCKAN_BUILDING)
#define FCKAN_API __attribute__((visibility("default")))
#else
#define FCKAN_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum fckan_status {
  FCKAN_OK = 0,
  FCKAN_ERR_ARGUMENT = 1,  /* null pointer or malformed argument */
  FCKAN_ERR_CONFIG = 2,    /* invalid spec / config field */
  FCKAN_ERR_DIMENSION = 3, /* shape mismatch */
  FCKAN_ERR_INDEX = 4,     /* label or index out of range */
  FCKAN_ERR_PARAMETER = 5, /* invalid parameter value, e.g. non-positive scale */
  FCKAN_ERR_PARSE = 6,     /* malformed IDX or checkpoint bytes */
  FCKAN_ERR_NUMERIC = 7,   /* NaN/Inf during training or evaluation */
  FCKAN_ERR_IO = 8,        /* missing file, download failure */
  FCKAN_ERR_INTERNAL = 9
} fckan_status;

typedef enum fckan_precision { FCKAN_F32 = 4, FCKAN_F64 = 8 } fckan_precision;

typedef struct fckan_model fckan_model;
typedef struct fckan_dataset fckan_dataset;

FCKAN_API const char* fckan_version(void);
FCKAN_API const char* fckan_status_name(fckan_status status);
FCKAN_API const char* fckan_last_error(void);
FCKAN_API void fckan_string_free(char* s);

/* --- specs --------------------------------------------------------------- */

/* Validates a network spec and returns it with every field resolved. */
FCKAN_API fckan_status fckan_spec_resolve(const char* spec_text, char** out_text);
/* Validates a training config ("epochs = 25", "seeds = 0,1,2", ...). */
FCKAN_API fckan_status fckan_training_config_resolve(const char* config_text, char** out_text);
/* Parameter census of the model a spec describes, without training:
 * {"entries":[{path,rows,cols,count,trainable,counted}], "counted_total",
 *  "trainable_total", "buffer_total"} */
FCKAN_API fckan_status fckan_spec_census(const char* spec_text, char** out_json);
/* Resolves a full experiment config (network, training, dataset, fraction,
 * precision, out, jobs). Repeated keys: the last one wins. Returns
 * {"spec","training","text","hash","dataset","fraction","precision","out",
 *  "jobs","seeds":[...],"label"} where text is the canonical resolved form. */
FCKAN_API fckan_status fckan_experiment_resolve(const char* config_text, char** out_json);
/* JSON arrays of the accepted names: {"models":[...],"functions":[...],
 * "combine":[...],"datasets":[...]} */
FCKAN_API fckan_status fckan_names(char** out_json);

/* --- datasets ------------------------------------------------------------ */

/* name: "mnist" or "fashion-mnist"; split: "train" or "validation". Files are
 * read from <root>/<name>/, raw or gzip. A NULL root uses FCKAN_DATA_DIR. */
FCKAN_API fckan_status fckan_dataset_load(const char* root, const char* name, const char* split,
                                          fckan_dataset** out);
/* Stratified subset of round(fraction * N) samples. */
FCKAN_API fckan_status fckan_dataset_subset(const fckan_dataset* ds, double fraction,
                                            uint64_t seed, fckan_dataset** out);
/* Builds a dataset from memory: pixels is rows * features bytes. */
FCKAN_API fckan_status fckan_dataset_from_memory(const uint8_t* pixels, const int32_t* labels,
                                                 size_t rows, size_t features, size_t classes,
                                                 const char* name, fckan_dataset** out);
FCKAN_API size_t fckan_dataset_size(const fckan_dataset* ds);
/* {"name","split","size","features","classes","class_counts":[...]} */
FCKAN_API fckan_status fckan_dataset_info(const fckan_dataset* ds, char** out_json);
FCKAN_API void fckan_dataset_free(fckan_dataset* ds);
/* Downloads the four gzip files into <root>/<name>/ and checks their sizes.
 * A NULL base_url uses the built-in mirror. */
FCKAN_API fckan_status fckan_fetch(const char* root, const char* name, const char* base_url);

/* --- models -------------------------------------------------------------- */

FCKAN_API fckan_status fckan_model_create(const char* spec_text, uint64_t seed,
                                          fckan_precision precision, fckan_model** out);
FCKAN_API void fckan_model_free(fckan_model* model);
FCKAN_API fckan_status fckan_model_spec(const fckan_model* model, char** out_text);
FCKAN_API fckan_status fckan_model_census(const fckan_model* model, char** out_json);
FCKAN_API size_t fckan_model_num_classes(const fckan_model* model);

/* Binary checkpoint holding the spec and every parameter. Loading converts to
 * the requested precision. */
FCKAN_API fckan_status fckan_model_save(const fckan_model* model, const char* path);
FCKAN_API fckan_status fckan_model_load(const char* path, fckan_precision precision,
                                        fckan_model** out);

/* Called after every epoch with one epoch record as JSON. */
typedef void (*fckan_epoch_callback)(const char* epoch_json, void* user);

typedef struct fckan_train_options {
  const char* training_config; /* NULL: defaults */
  const char* label;           /* NULL: model name */
  /* Stored in the run record and hashed; NULL: spec + training config. */
  const char* config_text;
  uint64_t seed; /* shuffle stream; initialization uses the model's own seed */
  fckan_epoch_callback on_epoch;
  void* user;
} fckan_train_options;

/* Trains in place. out_record (optional) receives the run record JSON. */
FCKAN_API fckan_status fckan_model_train(fckan_model* model, const fckan_dataset* train,
                                         const fckan_dataset* validation,
                                         const fckan_train_options* options, char** out_record);

/* {"loss","accuracy","macro_f1","per_class_f1":[...],"confusion":[[...]],
 *  "errors_per_class":[...],"support":[...]} */
FCKAN_API fckan_status fckan_model_evaluate(const fckan_model* model, const fckan_dataset* ds,
                                            char** out_json);

/* Class scores for rows x features inputs already scaled to [0, 1];
 * scores receives rows * num_classes values. */
FCKAN_API fckan_status fckan_model_predict(const fckan_model* model, const double* inputs,
                                           size_t rows, size_t features, double* scores);

#ifdef __cplusplus
}
#endif

#endif /* FCKAN_FCKAN_H */
