// Copyright 2026-present the rqkit authors
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


#ifndef RQKIT_RQKIT_H
#define RQKIT_RQKIT_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define RQK_API __declspec(dllexport)
#else
#define RQK_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum rqk_status {
    RQK_OK = 0,
    RQK_ERR_INVALID_ARGUMENT = 2,
    RQK_ERR_FORMAT = 3,
    RQK_ERR_DEGENERATE = 5,
    RQK_ERR_IO = 6,
    RQK_ERR_INTERNAL = 7
} rqk_status;

typedef enum rqk_method {
    RQK_METHOD_RABITQ_PROD = 0,
    RQK_METHOD_RABITQ_MSE = 1,
    RQK_METHOD_TQ_PROD = 2,
    RQK_METHOD_TQ_MSE = 3
} rqk_method;

typedef enum rqk_rotation_kind { RQK_ROTATION_DENSE = 0, RQK_ROTATION_FAST = 1 } rqk_rotation_kind;

typedef enum rqk_rescale {
    RQK_RESCALE_EXHAUSTIVE = 0,
    RQK_RESCALE_CANDIDATE_SET = 1,
    RQK_RESCALE_EXPECTED_FACTOR = 2
} rqk_rescale;

typedef enum rqk_distribution { RQK_DIST_GAUSSIAN = 0, RQK_DIST_UNIT_SPHERE = 1 } rqk_distribution;

typedef enum rqk_mixed_codec { RQK_MIXED_RABITQ = 0, RQK_MIXED_TQ_MSE = 1 } rqk_mixed_codec;

typedef struct rqk_rotation rqk_rotation;
typedef struct rqk_codec rqk_codec;
typedef struct rqk_code rqk_code;
typedef struct rqk_query rqk_query;
typedef struct rqk_codebook rqk_codebook;
typedef struct rqk_dataset rqk_dataset;
typedef struct rqk_mixed rqk_mixed;

/* Message of the last failed call on this thread; empty when none. */
RQK_API const char* rqk_last_error(void);
RQK_API const char* rqk_version(void);
RQK_API void rqk_string_free(char* s);

/* ---- rotation ---- */
RQK_API rqk_status rqk_rotation_create(rqk_rotation_kind kind, uint32_t dim, uint64_t seed,
                                       uint32_t rounds, rqk_rotation** out);
RQK_API rqk_status rqk_rotation_load(const char* path, rqk_rotation** out);
RQK_API rqk_status rqk_rotation_save(const rqk_rotation* rot, const char* path);
RQK_API uint32_t rqk_rotation_input_dim(const rqk_rotation* rot);
RQK_API uint32_t rqk_rotation_output_dim(const rqk_rotation* rot);
RQK_API rqk_status rqk_rotation_apply(const rqk_rotation* rot, const double* x, size_t len,
                                      double* out, size_t out_len);
RQK_API void rqk_rotation_free(rqk_rotation* rot);

/* ---- codec: rotation + quantizer for one method and bit-width ---- */
typedef struct rqk_codec_options {
    rqk_method method;
    uint32_t bits;
    rqk_rotation_kind rotation;
    uint32_t rounds;
    rqk_rescale rescale;
    const double* candidates; /* RQK_RESCALE_CANDIDATE_SET */
    size_t num_candidates;
    uint32_t expected_samples; /* RQK_RESCALE_EXPECTED_FACTOR */
    uint64_t seed;
    const char* cache_dir; /* NULL or "" disables the codebook file cache */
} rqk_codec_options;

RQK_API void rqk_codec_options_init(rqk_codec_options* opts);
RQK_API rqk_status rqk_codec_create(const rqk_codec_options* opts, uint32_t dim, rqk_codec** out);
RQK_API uint32_t rqk_codec_code_dim(const rqk_codec* codec);
RQK_API void rqk_codec_free(rqk_codec* codec);

RQK_API rqk_status rqk_codec_encode(const rqk_codec* codec, const double* x, size_t len,
                                    rqk_code** out);
RQK_API void rqk_code_free(rqk_code* code);
RQK_API rqk_status rqk_codec_prepare_query(const rqk_codec* codec, const double* y, size_t len,
                                           rqk_query** out);
RQK_API void rqk_query_free(rqk_query* q);
RQK_API rqk_status rqk_codec_estimate(const rqk_codec* codec, const rqk_code* code,
                                      const rqk_query* q, double* out);
/* Reconstruction in the rotated basis; out_len must equal rqk_codec_code_dim. */
RQK_API rqk_status rqk_codec_reconstruct(const rqk_codec* codec, const rqk_code* code,
                                         double* out, size_t out_len);

/* RaBitQ codes only. */
RQK_API rqk_status rqk_rabitq_code_info(const rqk_code* code, double* factor_prod,
                                        double* factor_mse, double* cosine);
RQK_API rqk_status rqk_rabitq_code_values(const rqk_code* code, uint8_t* out, size_t out_len);
RQK_API rqk_status rqk_rabitq_estimate_incremental(const rqk_code* code, const rqk_query* q,
                                                   unsigned split_bits, double* coarse,
                                                   double* refined);

/* ---- Lloyd-Max codebooks ---- */
RQK_API rqk_status rqk_codebook_build(uint32_t dim, unsigned bits, double tol,
                                      uint32_t max_iter, rqk_codebook** out);
RQK_API rqk_status rqk_codebook_load(const char* path, rqk_codebook** out);
RQK_API rqk_status rqk_codebook_save(const rqk_codebook* cb, const char* path);
RQK_API size_t rqk_codebook_size(const rqk_codebook* cb);
RQK_API int rqk_codebook_converged(const rqk_codebook* cb);
RQK_API rqk_status rqk_codebook_centroids(const rqk_codebook* cb, double* out, size_t out_len);
RQK_API void rqk_codebook_free(rqk_codebook* cb);

/* ---- datasets ---- */
RQK_API rqk_status rqk_dataset_load(const char* path, rqk_dataset** out);
RQK_API rqk_status rqk_dataset_generate(size_t n, uint32_t dim, rqk_distribution dist,
                                        uint64_t seed, rqk_dataset** out);
RQK_API rqk_status rqk_dataset_from_rows(const float* data, size_t n, uint32_t dim,
                                         rqk_dataset** out);
RQK_API size_t rqk_dataset_n(const rqk_dataset* ds);
RQK_API uint32_t rqk_dataset_dim(const rqk_dataset* ds);
RQK_API const float* rqk_dataset_data(const rqk_dataset* ds);
RQK_API rqk_status rqk_dataset_save_fvecs(const rqk_dataset* ds, const char* path);
RQK_API rqk_status rqk_dataset_save_matf(const rqk_dataset* ds, const char* path);
RQK_API void rqk_dataset_free(rqk_dataset* ds);

/* ---- evaluation ---- */
typedef struct rqk_error_stats {
    size_t count;
    double mean;
    double std; /* population */
    double max_abs;
    double q50;
    double q90;
    double q99;
} rqk_error_stats;

RQK_API rqk_status rqk_ip_error_stats(const double* estimates, const double* truths, size_t n,
                                      rqk_error_stats* out);
RQK_API rqk_status rqk_brute_force_topk(const float* base, size_t n, uint32_t dim,
                                        const double* query, size_t k, uint32_t* out_ids);
/* approx is row-major num_queries x list_len. */
RQK_API rqk_status rqk_recall_at_1_at_k(const uint32_t* exact_top1, const uint32_t* approx,
                                        size_t num_queries, size_t list_len, size_t k,
                                        double* out);
RQK_API rqk_status rqk_chebyshev_tail_check(const double* errors, size_t n,
                                            const double* thresholds, size_t num_thresholds,
                                            double* empirical_tail, double* bound);
RQK_API rqk_status rqk_optimal_bitwidth(double eps, double delta, uint32_t dim, double* out);

/* ---- mixed precision ---- */
RQK_API rqk_status rqk_select_outlier_channels(const float* keys, size_t rows, uint32_t head_dim,
                                               uint32_t count, uint32_t* out_idx);
RQK_API rqk_status rqk_mixed_create(uint32_t head_dim, const uint32_t* outliers,
                                    size_t num_outliers, unsigned hi_bits, unsigned lo_bits,
                                    rqk_mixed_codec codec, uint64_t seed, rqk_mixed** out);
RQK_API size_t rqk_mixed_serialized_bytes(const rqk_mixed* mq);
RQK_API double rqk_mixed_effective_bitwidth(const rqk_mixed* mq);
RQK_API rqk_status rqk_mixed_quantize(const rqk_mixed* mq, const double* x, size_t len,
                                      uint8_t* out, size_t out_len);
RQK_API rqk_status rqk_mixed_reconstruct(const rqk_mixed* mq, const uint8_t* bytes, size_t len,
                                         double* out, size_t out_len);
RQK_API void rqk_mixed_free(rqk_mixed* mq);

/* ---- experiments ----
 * config_json may be NULL for defaults. On success *result_json holds the result
 * document and must be released with rqk_string_free. */
RQK_API rqk_status rqk_experiment_default_config(const char* name, char** config_json);
RQK_API rqk_status rqk_experiment_run(const char* name, const char* config_json,
                                      unsigned threads, char** result_json);
RQK_API unsigned rqk_default_threads(void);

#ifdef __cplusplus
}
#endif

#endif /* RQKIT_RQKIT_H */
