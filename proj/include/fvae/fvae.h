// Copyright 2026 The fvae Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef FVAE_FVAE_H_
#define FVAE_FVAE_H_

/* C interface to the factorized VAE toolkit. Every call returns an
 * fvae_status; on failure fvae_last_error() describes the problem for the
 * calling thread. Strings returned through char** are released with
 * fvae_string_free. Feature data is [bands x frames], copied row-major. */

#include <stddef.h>
#include <stdint.h>

#if defined(FVAE_BUILDING_LIBRARY)
#define FVAE_API __attribute__((visibility("default")))
#else
#define FVAE_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum fvae_status {
  FVAE_OK = 0,
  FVAE_INPUT_TOO_SHORT = 1,
  FVAE_DOMAIN_ERROR = 2,
  FVAE_DEGENERATE_BAND = 3,
  FVAE_INSUFFICIENT_DATA = 4,
  FVAE_CONFIG_ERROR = 5,
  FVAE_SHAPE_ERROR = 6,
  FVAE_LABEL_ERROR = 7,
  FVAE_SEGMENT_TOO_SHORT = 8,
  FVAE_ALIGNMENT_ERROR = 9,
  FVAE_NUMERICAL_ERROR = 10,
  FVAE_IO_ERROR = 11,
  FVAE_FORMAT_ERROR = 12,
  FVAE_USAGE_ERROR = 13,
  FVAE_INTERNAL = 14
} fvae_status;

typedef struct fvae_model fvae_model;
typedef struct fvae_features fvae_features;

FVAE_API const char* fvae_version(void);
FVAE_API const char* fvae_status_string(fvae_status status);
FVAE_API const char* fvae_last_error(void);
FVAE_API void fvae_string_free(char* s);

/* Piecewise-linear VTLP warp of frequency f (Hz); f_hi in Hz. */
FVAE_API fvae_status fvae_vtlp_warp_frequency(double f, double alpha, double f_hi,
                                              double f_max, double* out);

/* Synthetic corpus: audio/, labels/, manifest.jsonl and toy_config.json.
 * config_json may be NULL (defaults) and may set split_seed. */
FVAE_API fvae_status fvae_make_toy_corpus(const char* out_dir, const char* config_json,
                                          uint64_t seed);

/* Global mean/std over the training split of a manifest. */
FVAE_API fvae_status fvae_fit_stats(const char* manifest, const char* feature_config_json,
                                    const char* out_path);

/* Resolves the effective training configuration: the mode preset, then
 * config_json, then overrides_json (flags). Either JSON may be NULL. */
FVAE_API fvae_status fvae_resolve_train_config(const char* config_json,
                                               const char* overrides_json, char** out_json);

/* Trains on a manifest and writes a model directory. stats_path may be
 * NULL to fit statistics on the training split. */
FVAE_API fvae_status fvae_train(const char* config_json, const char* overrides_json,
                                const char* manifest, const char* stats_path,
                                const char* out_dir, int verbose);

FVAE_API fvae_status fvae_model_load(const char* model_dir, fvae_model** out);
FVAE_API void fvae_model_free(fvae_model* model);
/* JSON with the model configuration, step, val_l_rec and checkpoint hash. */
FVAE_API fvae_status fvae_model_info(const fvae_model* model, char** out_json);

/* Feature archive from disk, as stored. */
FVAE_API fvae_status fvae_features_load(const char* path, fvae_features** out);
/* Log-mel of a WAV file, globally normalised with the model's statistics. */
FVAE_API fvae_status fvae_features_from_wav(const fvae_model* model, const char* wav_path,
                                            fvae_features** out);
FVAE_API fvae_status fvae_features_shape(const fvae_features* f, int* bands, int* frames);
FVAE_API fvae_status fvae_features_copy_data(const fvae_features* f, float* dst, size_t count);
FVAE_API fvae_status fvae_features_save(const fvae_features* f, const char* path);
FVAE_API void fvae_features_free(fvae_features* f);

/* Content of src, speaker of tgt. Raw inputs are normalised with the
 * model's statistics first. */
FVAE_API fvae_status fvae_convert(fvae_model* model, const fvae_features* src,
                                  const fvae_features* tgt, fvae_features** out);

/* Griffin-Lim resynthesis of globally normalised features. */
FVAE_API fvae_status fvae_invert_to_wav(const fvae_model* model, const fvae_features* f,
                                        const char* wav_path, int iterations);

/* Oracle probes are loaded from probes_dir or trained and stored there.
 * Writes report.json, report.csv and eval_config.json to out_dir. */
FVAE_API fvae_status fvae_evaluate(const char* model_dir, const char* manifest,
                                   const char* probes_dir, const char* eval_config_json,
                                   const char* out_dir, int verbose);

#ifdef __cplusplus
}
#endif

#endif /* FVAE_FVAE_H_ */
