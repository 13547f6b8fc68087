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


#include "rqkit/rqkit.h"

#include <cstring>
#include <fstream>
#include <new>
#include <string>

#include "codec.hpp"
#include "dataset.hpp"
#include "error.hpp"
#include "eval.hpp"
#include "experiments.hpp"
#include "lloydmax.hpp"
#include "mixed_precision.hpp"
#include "parallel.hpp"

struct rqk_rotation {
    rqkit::Rotation impl;
};

struct rqk_codec {
    rqkit::Codec impl;
};

struct rqk_code {
    rqkit::EncodedVector impl;
};

struct rqk_query {
    rqkit::QueryContext impl;
};

struct rqk_codebook {
    rqkit::ScalarCodebook impl;
};

struct rqk_dataset {
    rqkit::Dataset impl;
};

struct rqk_mixed {
    rqkit::MixedQuantizer impl;
};

namespace {

thread_local std::string last_error;

rqk_status
fail(rqk_status status, const std::string& message) {
    last_error = message;
    return status;
}

template <typename Fn>
rqk_status
guard(Fn&& fn) {
    try {
        last_error.clear();
        fn();
        return RQK_OK;
    } catch (const rqkit::RqkitException& e) {
        switch (e.type()) {
            case rqkit::ErrorType::INVALID_ARGUMENT:
                return fail(RQK_ERR_INVALID_ARGUMENT, e.what());
            case rqkit::ErrorType::DEGENERATE_INPUT:
                return fail(RQK_ERR_DEGENERATE, e.what());
            case rqkit::ErrorType::FORMAT_ERROR:
                return fail(RQK_ERR_FORMAT, e.what());
            case rqkit::ErrorType::IO_ERROR:
                return fail(RQK_ERR_IO, e.what());
            case rqkit::ErrorType::INTERNAL_ERROR:
                return fail(RQK_ERR_INTERNAL, e.what());
        }
        return fail(RQK_ERR_INTERNAL, e.what());
    } catch (const nlohmann::json::exception& e) {
        return fail(RQK_ERR_INVALID_ARGUMENT, std::string("json: ") + e.what());
    } catch (const std::bad_alloc&) {
        return fail(RQK_ERR_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return fail(RQK_ERR_INTERNAL, e.what());
    }
}

void
require(const void* p, const char* what) {
    if (p == nullptr) {
        rqkit::throw_invalid(std::string(what) + " must not be null");
    }
}

void
require_len(size_t got, size_t want, const char* what) {
    if (got != want) {
        rqkit::throw_invalid(std::string(what) + ": length " + std::to_string(got) +
                             ", expected " + std::to_string(want));
    }
}

char*
dup_string(const std::string& s) {
    char* out = new char[s.size() + 1];
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

const rqkit::RabitqCode&
rabitq_of(const rqk_code* code) {
    require(code, "code");
    const auto* c = std::get_if<rqkit::RabitqCode>(&code->impl);
    if (c == nullptr) {
        rqkit::throw_invalid("code is not a RaBitQ code");
    }
    return *c;
}

}  // namespace

extern "C" {

const char*
rqk_last_error(void) {
    return last_error.c_str();
}

const char*
rqk_version(void) {
    return rqkit::git_describe();
}

void
rqk_string_free(char* s) {
    delete[] s;
}

unsigned
rqk_default_threads(void) {
    return rqkit::default_thread_count();
}

// ---------------------------------------------------------------- rotation

rqk_status
rqk_rotation_create(rqk_rotation_kind kind, uint32_t dim, uint64_t seed, uint32_t rounds,
                    rqk_rotation** out) {
    return guard([&] {
        require(out, "out");
        if (kind != RQK_ROTATION_DENSE && kind != RQK_ROTATION_FAST) {
            rqkit::throw_invalid("unknown rotation kind");
        }
        *out = new rqk_rotation{
            rqkit::Rotation::sample(static_cast<rqkit::RotationKind>(kind), dim, seed, rounds)};
    });
}

rqk_status
rqk_rotation_load(const char* path, rqk_rotation** out) {
    return guard([&] {
        require(path, "path");
        require(out, "out");
        *out = new rqk_rotation{rqkit::Rotation::load(std::string(path))};
    });
}

rqk_status
rqk_rotation_save(const rqk_rotation* rot, const char* path) {
    return guard([&] {
        require(rot, "rotation");
        require(path, "path");
        rot->impl.save(std::string(path));
    });
}

uint32_t
rqk_rotation_input_dim(const rqk_rotation* rot) {
    return rot ? rot->impl.input_dim() : 0;
}

uint32_t
rqk_rotation_output_dim(const rqk_rotation* rot) {
    return rot ? rot->impl.output_dim() : 0;
}

rqk_status
rqk_rotation_apply(const rqk_rotation* rot, const double* x, size_t len, double* out,
                   size_t out_len) {
    return guard([&] {
        require(rot, "rotation");
        require(x, "x");
        require(out, "out");
        rot->impl.apply_into({x, len}, {out, out_len});
    });
}

void
rqk_rotation_free(rqk_rotation* rot) {
    delete rot;
}

// ---------------------------------------------------------------- codec

void
rqk_codec_options_init(rqk_codec_options* opts) {
    if (opts == nullptr) {
        return;
    }
    *opts = rqk_codec_options{};
    opts->method = RQK_METHOD_RABITQ_PROD;
    opts->bits = 4;
    opts->rotation = RQK_ROTATION_DENSE;
    opts->rounds = rqkit::FastRotation::DEFAULT_ROUNDS;
    opts->rescale = RQK_RESCALE_EXHAUSTIVE;
    opts->expected_samples = rqkit::RescaleStrategy::DEFAULT_EXPECTED_SAMPLES;
}

rqk_status
rqk_codec_create(const rqk_codec_options* opts, uint32_t dim, rqk_codec** out) {
    return guard([&] {
        require(opts, "options");
        require(out, "out");
        rqkit::CodecConfig c;
        if (opts->method < RQK_METHOD_RABITQ_PROD || opts->method > RQK_METHOD_TQ_MSE) {
            rqkit::throw_invalid("unknown method");
        }
        if (opts->rotation != RQK_ROTATION_DENSE && opts->rotation != RQK_ROTATION_FAST) {
            rqkit::throw_invalid("unknown rotation kind");
        }
        c.method = static_cast<rqkit::Method>(opts->method);
        c.bits = opts->bits;
        c.rotation = static_cast<rqkit::RotationKind>(opts->rotation);
        c.rounds = opts->rounds;
        c.seed = opts->seed;
        switch (opts->rescale) {
            case RQK_RESCALE_EXHAUSTIVE:
                c.strategy = rqkit::RescaleStrategy::exhaustive();
                break;
            case RQK_RESCALE_CANDIDATE_SET:
                if (opts->num_candidates > 0) {
                    require(opts->candidates, "candidates");
                }
                c.strategy = rqkit::RescaleStrategy::candidate_set(
                    {opts->candidates, opts->candidates + opts->num_candidates});
                break;
            case RQK_RESCALE_EXPECTED_FACTOR:
                c.strategy = rqkit::RescaleStrategy::expected_factor(opts->expected_samples);
                break;
            default:
                rqkit::throw_invalid("unknown rescale strategy");
        }
        if (opts->cache_dir != nullptr) {
            c.cache_dir = opts->cache_dir;
        }
        *out = new rqk_codec{rqkit::Codec(c, dim)};
    });
}

uint32_t
rqk_codec_code_dim(const rqk_codec* codec) {
    return codec ? codec->impl.code_dim() : 0;
}

void
rqk_codec_free(rqk_codec* codec) {
    delete codec;
}

rqk_status
rqk_codec_encode(const rqk_codec* codec, const double* x, size_t len, rqk_code** out) {
    return guard([&] {
        require(codec, "codec");
        require(x, "x");
        require(out, "out");
        *out = new rqk_code{codec->impl.encode({x, len})};
    });
}

void
rqk_code_free(rqk_code* code) {
    delete code;
}

rqk_status
rqk_codec_prepare_query(const rqk_codec* codec, const double* y, size_t len, rqk_query** out) {
    return guard([&] {
        require(codec, "codec");
        require(y, "y");
        require(out, "out");
        *out = new rqk_query{codec->impl.prepare({y, len})};
    });
}

void
rqk_query_free(rqk_query* q) {
    delete q;
}

rqk_status
rqk_codec_estimate(const rqk_codec* codec, const rqk_code* code, const rqk_query* q, double* out) {
    return guard([&] {
        require(codec, "codec");
        require(code, "code");
        require(q, "query");
        require(out, "out");
        *out = codec->impl.estimate(code->impl, q->impl);
    });
}

rqk_status
rqk_codec_reconstruct(const rqk_codec* codec, const rqk_code* code, double* out, size_t out_len) {
    return guard([&] {
        require(codec, "codec");
        require(code, "code");
        require(out, "out");
        const auto rec = codec->impl.reconstruct_rotated(code->impl);
        require_len(out_len, rec.size(), "reconstruct output");
        std::copy(rec.begin(), rec.end(), out);
    });
}

rqk_status
rqk_rabitq_code_info(const rqk_code* code, double* factor_prod, double* factor_mse,
                     double* cosine) {
    return guard([&] {
        const auto& c = rabitq_of(code);
        if (factor_prod) {
            *factor_prod = c.factor_prod;
        }
        if (factor_mse) {
            *factor_mse = c.factor_mse;
        }
        if (cosine) {
            *cosine = c.cosine;
        }
    });
}

rqk_status
rqk_rabitq_code_values(const rqk_code* code, uint8_t* out, size_t out_len) {
    return guard([&] {
        const auto& c = rabitq_of(code);
        require(out, "out");
        require_len(out_len, c.codes.size(), "code output");
        std::copy(c.codes.begin(), c.codes.end(), out);
    });
}

rqk_status
rqk_rabitq_estimate_incremental(const rqk_code* code, const rqk_query* q, unsigned split_bits,
                                double* coarse, double* refined) {
    return guard([&] {
        const auto& c = rabitq_of(code);
        require(q, "query");
        if (split_bits == 0) {
            rqkit::throw_invalid("split_bits must be in [1, bits-1], got 0");
        }
        const auto e = rqkit::rabitq_estimate_incremental(c, q->impl, split_bits);
        if (coarse) {
            *coarse = e.coarse;
        }
        if (refined) {
            *refined = e.refined;
        }
    });
}

// ---------------------------------------------------------------- codebook

rqk_status
rqk_codebook_build(uint32_t dim, unsigned bits, double tol, uint32_t max_iter, rqk_codebook** out) {
    return guard([&] {
        require(out, "out");
        rqkit::LloydMaxOptions o;
        o.tol = tol;
        o.max_iter = max_iter;
        *out = new rqk_codebook{rqkit::build_lloydmax_codebook(dim, bits, o)};
    });
}

rqk_status
rqk_codebook_load(const char* path, rqk_codebook** out) {
    return guard([&] {
        require(path, "path");
        require(out, "out");
        std::ifstream in(path, std::ios::binary);
        if (!in) {
            rqkit::throw_io(std::string("cannot open ") + path);
        }
        *out = new rqk_codebook{rqkit::load_codebook(in)};
    });
}

rqk_status
rqk_codebook_save(const rqk_codebook* cb, const char* path) {
    return guard([&] {
        require(cb, "codebook");
        require(path, "path");
        std::ofstream o(path, std::ios::binary);
        if (!o) {
            rqkit::throw_io(std::string("cannot open ") + path + " for writing");
        }
        rqkit::save_codebook(o, cb->impl);
    });
}

size_t
rqk_codebook_size(const rqk_codebook* cb) {
    return cb ? cb->impl.size() : 0;
}

int
rqk_codebook_converged(const rqk_codebook* cb) {
    return cb && cb->impl.converged ? 1 : 0;
}

rqk_status
rqk_codebook_centroids(const rqk_codebook* cb, double* out, size_t out_len) {
    return guard([&] {
        require(cb, "codebook");
        require(out, "out");
        require_len(out_len, cb->impl.size(), "centroid output");
        std::copy(cb->impl.centroids.begin(), cb->impl.centroids.end(), out);
    });
}

void
rqk_codebook_free(rqk_codebook* cb) {
    delete cb;
}

// ---------------------------------------------------------------- dataset

rqk_status
rqk_dataset_load(const char* path, rqk_dataset** out) {
    return guard([&] {
        require(path, "path");
        require(out, "out");
        *out = new rqk_dataset{rqkit::load_dataset(path)};
    });
}

rqk_status
rqk_dataset_generate(size_t n, uint32_t dim, rqk_distribution dist, uint64_t seed,
                     rqk_dataset** out) {
    return guard([&] {
        require(out, "out");
        if (dist != RQK_DIST_GAUSSIAN && dist != RQK_DIST_UNIT_SPHERE) {
            rqkit::throw_invalid("unknown distribution");
        }
        *out = new rqk_dataset{
            rqkit::generate_synthetic(n, dim, static_cast<rqkit::Distribution>(dist), seed)};
    });
}

rqk_status
rqk_dataset_from_rows(const float* data, size_t n, uint32_t dim, rqk_dataset** out) {
    return guard([&] {
        require(data, "data");
        require(out, "out");
        if (n == 0 || dim == 0) {
            rqkit::throw_invalid("dataset must be non-empty");
        }
        rqkit::Dataset ds;
        ds.n = n;
        ds.dim = dim;
        ds.data.assign(data, data + n * dim);
        ds.source = "memory";
        *out = new rqk_dataset{std::move(ds)};
    });
}

size_t
rqk_dataset_n(const rqk_dataset* ds) {
    return ds ? ds->impl.n : 0;
}

uint32_t
rqk_dataset_dim(const rqk_dataset* ds) {
    return ds ? ds->impl.dim : 0;
}

const float*
rqk_dataset_data(const rqk_dataset* ds) {
    return ds ? ds->impl.data.data() : nullptr;
}

rqk_status
rqk_dataset_save_fvecs(const rqk_dataset* ds, const char* path) {
    return guard([&] {
        require(ds, "dataset");
        require(path, "path");
        rqkit::write_fvecs(path, ds->impl);
    });
}

rqk_status
rqk_dataset_save_matf(const rqk_dataset* ds, const char* path) {
    return guard([&] {
        require(ds, "dataset");
        require(path, "path");
        rqkit::write_matf(path, ds->impl);
    });
}

void
rqk_dataset_free(rqk_dataset* ds) {
    delete ds;
}

// ---------------------------------------------------------------- eval

rqk_status
rqk_ip_error_stats(const double* estimates, const double* truths, size_t n, rqk_error_stats* out) {
    return guard([&] {
        require(out, "out");
        if (n > 0) {
            require(estimates, "estimates");
            require(truths, "truths");
        }
        const auto s = rqkit::ip_error_stats({estimates, n}, {truths, n});
        out->count = s.count;
        out->mean = s.mean;
        out->std = s.std;
        out->max_abs = s.max_abs;
        out->q50 = s.quantiles[0].second;
        out->q90 = s.quantiles[1].second;
        out->q99 = s.quantiles[2].second;
    });
}

rqk_status
rqk_brute_force_topk(const float* base, size_t n, uint32_t dim, const double* query, size_t k,
                     uint32_t* out_ids) {
    return guard([&] {
        require(base, "base");
        require(query, "query");
        require(out_ids, "out_ids");
        const auto ids = rqkit::brute_force_topk({base, n * dim}, n, dim, {query, dim}, k);
        std::copy(ids.begin(), ids.end(), out_ids);
    });
}

rqk_status
rqk_recall_at_1_at_k(const uint32_t* exact_top1, const uint32_t* approx, size_t num_queries,
                     size_t list_len, size_t k, double* out) {
    return guard([&] {
        require(out, "out");
        if (num_queries > 0) {
            require(exact_top1, "exact_top1");
            require(approx, "approx");
        }
        std::vector<std::vector<uint32_t>> lists(num_queries);
        for (size_t q = 0; q < num_queries; ++q) {
            lists[q].assign(approx + q * list_len, approx + (q + 1) * list_len);
        }
        *out = rqkit::recall_at_1_at_k({exact_top1, num_queries}, lists, k);
    });
}

rqk_status
rqk_chebyshev_tail_check(const double* errors, size_t n, const double* thresholds,
                         size_t num_thresholds, double* empirical_tail, double* bound) {
    return guard([&] {
        if (n > 0) {
            require(errors, "errors");
        }
        if (num_thresholds > 0) {
            require(thresholds, "thresholds");
            require(empirical_tail, "empirical_tail");
            require(bound, "bound");
        }
        const auto pts = rqkit::chebyshev_tail_check({errors, n}, {thresholds, num_thresholds});
        for (size_t i = 0; i < pts.size(); ++i) {
            empirical_tail[i] = pts[i].empirical_tail;
            bound[i] = pts[i].bound;
        }
    });
}

rqk_status
rqk_optimal_bitwidth(double eps, double delta, uint32_t dim, double* out) {
    return guard([&] {
        require(out, "out");
        *out = rqkit::optimal_bitwidth_reference({eps, delta, dim});
    });
}

// ---------------------------------------------------------------- mixed

rqk_status
rqk_select_outlier_channels(const float* keys, size_t rows, uint32_t head_dim, uint32_t count,
                            uint32_t* out_idx) {
    return guard([&] {
        require(keys, "keys");
        if (count > 0) {
            require(out_idx, "out_idx");
        }
        const auto split =
            rqkit::select_outlier_channels({keys, rows * head_dim}, rows, head_dim, count);
        std::copy(split.outlier_idx.begin(), split.outlier_idx.end(), out_idx);
    });
}

rqk_status
rqk_mixed_create(uint32_t head_dim, const uint32_t* outliers, size_t num_outliers,
                 unsigned hi_bits, unsigned lo_bits, rqk_mixed_codec codec, uint64_t seed,
                 rqk_mixed** out) {
    return guard([&] {
        require(out, "out");
        if (num_outliers > 0) {
            require(outliers, "outliers");
        }
        if (codec != RQK_MIXED_RABITQ && codec != RQK_MIXED_TQ_MSE) {
            rqkit::throw_invalid("unknown mixed codec");
        }
        if (hi_bits > 8 || lo_bits > 8) {
            rqkit::throw_invalid("mixed quantizer needs 1 <= lo_bits < hi_bits <= 8");
        }
        rqkit::MixedConfig mc;
        mc.hi_bits = static_cast<uint8_t>(hi_bits);
        mc.lo_bits = static_cast<uint8_t>(lo_bits);
        mc.codec = static_cast<rqkit::MixedCodec>(codec);
        mc.seed = seed;
        auto split = rqkit::make_channel_split(head_dim, {outliers, outliers + num_outliers});
        *out = new rqk_mixed{rqkit::MixedQuantizer(std::move(split), mc)};
    });
}

size_t
rqk_mixed_serialized_bytes(const rqk_mixed* mq) {
    return mq ? mq->impl.serialized_bytes() : 0;
}

double
rqk_mixed_effective_bitwidth(const rqk_mixed* mq) {
    if (mq == nullptr) {
        return 0.0;
    }
    return rqkit::effective_bitwidth(mq->impl.split(), mq->impl.config().hi_bits,
                                     mq->impl.config().lo_bits, 32);
}

rqk_status
rqk_mixed_quantize(const rqk_mixed* mq, const double* x, size_t len, uint8_t* out, size_t out_len) {
    return guard([&] {
        require(mq, "mixed quantizer");
        require(x, "x");
        require(out, "out");
        const auto bytes = mq->impl.serialize(mq->impl.quantize({x, len}));
        require_len(out_len, bytes.size(), "mixed code output");
        std::copy(bytes.begin(), bytes.end(), out);
    });
}

rqk_status
rqk_mixed_reconstruct(const rqk_mixed* mq, const uint8_t* bytes, size_t len, double* out,
                      size_t out_len) {
    return guard([&] {
        require(mq, "mixed quantizer");
        require(bytes, "bytes");
        require(out, "out");
        const auto rec = mq->impl.reconstruct(mq->impl.deserialize({bytes, len}));
        require_len(out_len, rec.size(), "reconstruct output");
        std::copy(rec.begin(), rec.end(), out);
    });
}

void
rqk_mixed_free(rqk_mixed* mq) {
    delete mq;
}

// ---------------------------------------------------------------- experiments

rqk_status
rqk_experiment_default_config(const char* name, char** config_json) {
    return guard([&] {
        require(name, "name");
        require(config_json, "config_json");
        auto cfg = rqkit::default_config(name);
        cfg["experiment"] = name;
        *config_json = dup_string(cfg.dump(2));
    });
}

rqk_status
rqk_experiment_run(const char* name, const char* config_json, unsigned threads,
                   char** result_json) {
    return guard([&] {
        require(name, "name");
        require(result_json, "result_json");
        nlohmann::json overrides;
        if (config_json != nullptr && config_json[0] != '\0') {
            try {
                overrides = nlohmann::json::parse(config_json);
            } catch (const nlohmann::json::parse_error& e) {
                rqkit::throw_format(std::string("config is not valid JSON: ") + e.what());
            }
        }
        const auto result = rqkit::run_experiment(name, overrides, threads);
        *result_json = dup_string(result.to_json().dump(2));
    });
}

}  // extern "C"
