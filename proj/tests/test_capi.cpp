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


#include <cmath>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "rqkit/rqkit.h"

namespace {

std::string
temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / ("rqkit_capi_" + name)).string();
}

}  // namespace

TEST_CASE("status codes and last error") {
    rqk_rotation* rot = nullptr;
    CHECK(rqk_rotation_create(RQK_ROTATION_DENSE, 0, 1, 0, &rot) == RQK_ERR_INVALID_ARGUMENT);
    CHECK(std::strlen(rqk_last_error()) > 0);
    CHECK(rqk_rotation_create(RQK_ROTATION_DENSE, 4, 1, 0, nullptr) == RQK_ERR_INVALID_ARGUMENT);
    CHECK(rqk_rotation_load("/nonexistent/rot.bin", &rot) == RQK_ERR_IO);
    const std::string bad = temp_path("bad.rot");
    {
        FILE* f = std::fopen(bad.c_str(), "wb");
        std::fputs("NOPE", f);
        std::fclose(f);
    }
    CHECK(rqk_rotation_load(bad.c_str(), &rot) == RQK_ERR_FORMAT);
    std::filesystem::remove(bad);
    CHECK(std::string(rqk_version()).size() > 0);
    CHECK(rqk_default_threads() >= 1);
}

TEST_CASE("rotation through the C API") {
    rqk_rotation* rot = nullptr;
    REQUIRE(rqk_rotation_create(RQK_ROTATION_FAST, 6, 3, 3, &rot) == RQK_OK);
    CHECK(rqk_rotation_input_dim(rot) == 6);
    CHECK(rqk_rotation_output_dim(rot) == 8);
    const double x[6] = {1, 2, 3, 4, 5, 6};
    double out[8];
    REQUIRE(rqk_rotation_apply(rot, x, 6, out, 8) == RQK_OK);
    double n = 0.0;
    for (double v : out) {
        n += v * v;
    }
    CHECK(n == doctest::Approx(91.0).epsilon(1e-12));
    CHECK(rqk_rotation_apply(rot, x, 5, out, 8) == RQK_ERR_INVALID_ARGUMENT);

    const std::string path = temp_path("rot.bin");
    REQUIRE(rqk_rotation_save(rot, path.c_str()) == RQK_OK);
    rqk_rotation* back = nullptr;
    REQUIRE(rqk_rotation_load(path.c_str(), &back) == RQK_OK);
    double out2[8];
    REQUIRE(rqk_rotation_apply(back, x, 6, out2, 8) == RQK_OK);
    CHECK(std::memcmp(out, out2, sizeof out) == 0);
    rqk_rotation_free(back);
    rqk_rotation_free(rot);
    std::filesystem::remove(path);
}

TEST_CASE("codec round trip for every method") {
    const double x[5] = {0.3, -1.2, 0.7, 2.0, -0.4};
    const double y[5] = {1.0, 0.5, -0.5, 0.2, 0.9};
    double truth = 0.0;
    for (int i = 0; i < 5; ++i) {
        truth += x[i] * y[i];
    }
    for (auto m : {RQK_METHOD_RABITQ_PROD, RQK_METHOD_RABITQ_MSE, RQK_METHOD_TQ_PROD,
                   RQK_METHOD_TQ_MSE}) {
        rqk_codec_options o;
        rqk_codec_options_init(&o);
        o.method = m;
        o.bits = 8;
        o.seed = 4;
        rqk_codec* c = nullptr;
        REQUIRE(rqk_codec_create(&o, 5, &c) == RQK_OK);
        CHECK(rqk_codec_code_dim(c) == 5);
        rqk_code* code = nullptr;
        rqk_query* q = nullptr;
        REQUIRE(rqk_codec_encode(c, x, 5, &code) == RQK_OK);
        REQUIRE(rqk_codec_prepare_query(c, y, 5, &q) == RQK_OK);
        double est = 0.0;
        REQUIRE(rqk_codec_estimate(c, code, q, &est) == RQK_OK);
        CHECK(std::abs(est - truth) < 0.2);
        std::vector<double> rec(5);
        CHECK(rqk_codec_reconstruct(c, code, rec.data(), rec.size()) == RQK_OK);
        double fp = 0.0;
        double fm = 0.0;
        double cosv = 0.0;
        const bool rabitq = m == RQK_METHOD_RABITQ_PROD || m == RQK_METHOD_RABITQ_MSE;
        CHECK((rqk_rabitq_code_info(code, &fp, &fm, &cosv) == RQK_OK) == rabitq);
        if (rabitq) {
            CHECK(cosv > 0.99);
            uint8_t vals[5];
            CHECK(rqk_rabitq_code_values(code, vals, 5) == RQK_OK);
            double coarse = 0.0;
            double refined = 0.0;
            CHECK(rqk_rabitq_estimate_incremental(code, q, 3, &coarse, &refined) == RQK_OK);
            if (m == RQK_METHOD_RABITQ_PROD) {
                CHECK(refined == doctest::Approx(est).epsilon(1e-9));
            }
        }
        const double zeros[5] = {0, 0, 0, 0, 0};
        rqk_code* zc = nullptr;
        CHECK(rqk_codec_encode(c, zeros, 5, &zc) == RQK_ERR_DEGENERATE);
        rqk_query_free(q);
        rqk_code_free(code);
        rqk_codec_free(c);
    }
}

TEST_CASE("codebook through the C API") {
    rqk_codebook* cb = nullptr;
    REQUIRE(rqk_codebook_build(3, 1, 1e-9, 1000, &cb) == RQK_OK);
    CHECK(rqk_codebook_size(cb) == 2);
    CHECK(rqk_codebook_converged(cb) == 1);
    double c[2];
    REQUIRE(rqk_codebook_centroids(cb, c, 2) == RQK_OK);
    CHECK(c[1] == doctest::Approx(0.5).epsilon(1e-3));
    const std::string path = temp_path("cb.lmcb");
    REQUIRE(rqk_codebook_save(cb, path.c_str()) == RQK_OK);
    rqk_codebook* back = nullptr;
    REQUIRE(rqk_codebook_load(path.c_str(), &back) == RQK_OK);
    double d[2];
    REQUIRE(rqk_codebook_centroids(back, d, 2) == RQK_OK);
    CHECK(std::memcmp(c, d, sizeof c) == 0);
    CHECK(rqk_codebook_build(1, 1, 1e-9, 10, &cb) == RQK_ERR_INVALID_ARGUMENT);
    rqk_codebook_free(back);
    rqk_codebook_free(cb);
    std::filesystem::remove(path);
}

TEST_CASE("dataset and eval through the C API") {
    rqk_dataset* ds = nullptr;
    REQUIRE(rqk_dataset_generate(10, 3, RQK_DIST_UNIT_SPHERE, 1, &ds) == RQK_OK);
    CHECK(rqk_dataset_n(ds) == 10);
    CHECK(rqk_dataset_dim(ds) == 3);
    const std::string path = temp_path("ds.fvecs");
    REQUIRE(rqk_dataset_save_fvecs(ds, path.c_str()) == RQK_OK);
    rqk_dataset* back = nullptr;
    REQUIRE(rqk_dataset_load(path.c_str(), &back) == RQK_OK);
    CHECK(std::memcmp(rqk_dataset_data(ds), rqk_dataset_data(back), 30 * sizeof(float)) == 0);
    rqk_dataset_free(back);
    rqk_dataset_free(ds);
    std::filesystem::remove(path);

    const float base[9] = {1, 0, 0, 0, 1, 0, 0, 0, 1};
    const double q[3] = {0, 1, 0};
    uint32_t ids[1];
    REQUIRE(rqk_brute_force_topk(base, 3, 3, q, 1, ids) == RQK_OK);
    CHECK(ids[0] == 1);
    CHECK(rqk_brute_force_topk(base, 3, 3, q, 4, ids) == RQK_ERR_INVALID_ARGUMENT);

    const uint32_t exact[3] = {5, 7, 9};
    const uint32_t approx[15] = {1, 2, 5, 3, 9, 7, 0, 1, 2, 3, 0, 1, 2, 3, 9};
    double r = 0.0;
    REQUIRE(rqk_recall_at_1_at_k(exact, approx, 3, 5, 4, &r) == RQK_OK);
    CHECK(r == doctest::Approx(2.0 / 3.0).epsilon(1e-9));

    const double est[3] = {0, 1, 2};
    const double truth[3] = {1, 1, 1};
    rqk_error_stats s;
    REQUIRE(rqk_ip_error_stats(est, truth, 3, &s) == RQK_OK);
    CHECK(s.std == doctest::Approx(std::sqrt(2.0 / 3.0)));
    const double errs[2] = {-0.1, 0.1};
    const double t[1] = {0.5};
    double tail = 0.0;
    double bound = 0.0;
    REQUIRE(rqk_chebyshev_tail_check(errs, 2, t, 1, &tail, &bound) == RQK_OK);
    CHECK(bound == doctest::Approx(0.04));
    double b = 0.0;
    REQUIRE(rqk_optimal_bitwidth(0.1, 1e-4, 128, &b) == RQK_OK);
    CHECK(b == doctest::Approx(2.847).epsilon(1e-3));
    CHECK(rqk_optimal_bitwidth(0.5, 1e-4, 128, &b) == RQK_ERR_INVALID_ARGUMENT);
}

TEST_CASE("mixed precision through the C API") {
    std::vector<float> keys(4 * 8, 1.0F);
    for (int r = 0; r < 4; ++r) {
        keys[static_cast<size_t>(r) * 8 + 3] = 50.0F;
    }
    uint32_t idx[1];
    REQUIRE(rqk_select_outlier_channels(keys.data(), 4, 8, 1, idx) == RQK_OK);
    CHECK(idx[0] == 3);
    CHECK(rqk_select_outlier_channels(keys.data(), 4, 8, 9, idx) == RQK_ERR_INVALID_ARGUMENT);

    std::vector<uint32_t> out(32);
    for (uint32_t i = 0; i < 32; ++i) {
        out[i] = i * 4;
    }
    rqk_mixed* mq = nullptr;
    REQUIRE(rqk_mixed_create(128, out.data(), 32, 3, 2, RQK_MIXED_RABITQ, 1, &mq) == RQK_OK);
    CHECK(rqk_mixed_effective_bitwidth(mq) == 2.5);
    CHECK(rqk_mixed_serialized_bytes(mq) == 40);
    std::vector<double> x(128);
    for (size_t i = 0; i < 128; ++i) {
        x[i] = std::sin(static_cast<double>(i));
    }
    std::vector<uint8_t> bytes(40);
    REQUIRE(rqk_mixed_quantize(mq, x.data(), 128, bytes.data(), 40) == RQK_OK);
    std::vector<double> rec(128);
    REQUIRE(rqk_mixed_reconstruct(mq, bytes.data(), 40, rec.data(), 128) == RQK_OK);
    double err = 0.0;
    double energy = 0.0;
    for (size_t i = 0; i < 128; ++i) {
        err += (x[i] - rec[i]) * (x[i] - rec[i]);
        energy += x[i] * x[i];
    }
    CHECK(err < 0.2 * energy);
    CHECK(rqk_mixed_reconstruct(mq, bytes.data(), 39, rec.data(), 128) == RQK_ERR_FORMAT);
    rqk_mixed_free(mq);
    CHECK(rqk_mixed_create(128, out.data(), 32, 2, 3, RQK_MIXED_RABITQ, 1, &mq) ==
          RQK_ERR_INVALID_ARGUMENT);
}

TEST_CASE("experiments through the C API") {
    char* cfg = nullptr;
    REQUIRE(rqk_experiment_default_config("codebook", &cfg) == RQK_OK);
    CHECK(std::string(cfg).find("sweep_points") != std::string::npos);
    rqk_string_free(cfg);
    char* result = nullptr;
    REQUIRE(rqk_experiment_run("codebook", R"({"dims": [3], "bits": [1, 2]})", 1, &result) == RQK_OK);
    CHECK(nlohmann::json::parse(result).at("all_passed") == true);
    rqk_string_free(result);
    CHECK(rqk_experiment_run("codebook", "{not json", 1, &result) == RQK_ERR_FORMAT);
    CHECK(rqk_experiment_run("codebook", R"({"bogus": 1})", 1, &result) == RQK_ERR_INVALID_ARGUMENT);
    CHECK(rqk_experiment_run("nope", "{}", 1, &result) == RQK_ERR_INVALID_ARGUMENT);
}
