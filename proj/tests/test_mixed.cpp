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


#include <algorithm>
#include <numeric>

#include "doctest.h"
#include "mixed_precision.hpp"
#include "test_helpers.hpp"

using namespace rqkit;
using namespace rqkit::test;

namespace {

std::vector<float>
random_keys(Rng& rng, size_t rows, uint32_t dim) {
    std::vector<float> k(rows * dim);
    for (auto& v : k) {
        v = static_cast<float>(rng.normal());
    }
    return k;
}

double
mean_squared_error(const MixedQuantizer& q, const std::vector<std::vector<double>>& xs) {
    double total = 0.0;
    for (const auto& x : xs) {
        const auto rec = q.reconstruct(q.quantize(x));
        for (size_t i = 0; i < x.size(); ++i) {
            total += (x[i] - rec[i]) * (x[i] - rec[i]);
        }
    }
    return total / static_cast<double>(xs.size());
}

}  // namespace

TEST_CASE("outlier selection") {
    Rng rng(1);
    const uint32_t dh = 8;
    auto keys = random_keys(rng, 50, dh);
    for (size_t r = 0; r < 50; ++r) {
        keys[r * dh + 0] *= 100.0F;
    }
    const auto s = select_outlier_channels(keys, 50, dh, 1);
    CHECK(s.outlier_idx == std::vector<uint32_t>{0});
    CHECK(s.regular_idx.size() == 7);

    const auto all = select_outlier_channels(keys, 50, dh, dh);
    CHECK(all.outlier_idx.size() == dh);
    CHECK(all.regular_idx.empty());
    const auto none = select_outlier_channels(keys, 50, dh, 0);
    CHECK(none.outlier_idx.empty());
    CHECK(none.regular_idx.size() == dh);

    // channels 2 and 5 tie for the last slot; channel 6 is clearly largest
    std::vector<float> tie(2 * 8, 1.0F);
    for (size_t r = 0; r < 2; ++r) {
        tie[r * 8 + 6] = 10.0F;
        tie[r * 8 + 2] = 3.0F;
        tie[r * 8 + 5] = 3.0F;
    }
    CHECK(select_outlier_channels(tie, 2, 8, 2).outlier_idx == std::vector<uint32_t>{2, 6});

    CHECK(error_type_of([&] { select_outlier_channels(keys, 50, dh, dh + 1); }) ==
          ErrorType::INVALID_ARGUMENT);
    CHECK(error_type_of([&] { select_outlier_channels({}, 0, dh, 1); }) ==
          ErrorType::INVALID_ARGUMENT);
}

TEST_CASE("outlier selection ignores row order") {
    Rng rng(2);
    const uint32_t dh = 32;
    const size_t rows = 64;
    auto keys = random_keys(rng, rows, dh);
    for (size_t r = 0; r < rows; ++r) {
        for (uint32_t c = 0; c < dh; c += 5) {
            keys[r * dh + c] *= 3.0F;
        }
    }
    std::vector<size_t> perm(rows);
    std::iota(perm.begin(), perm.end(), size_t{0});
    std::reverse(perm.begin(), perm.end());
    std::swap(perm[3], perm[40]);
    std::vector<float> shuffled(keys.size());
    for (size_t r = 0; r < rows; ++r) {
        std::copy_n(keys.begin() + static_cast<std::ptrdiff_t>(perm[r] * dh), dh,
                    shuffled.begin() + static_cast<std::ptrdiff_t>(r * dh));
    }
    CHECK(select_outlier_channels(keys, rows, dh, 7).outlier_idx ==
          select_outlier_channels(shuffled, rows, dh, 7).outlier_idx);
}

TEST_CASE("effective bitwidth") {
    std::vector<uint32_t> out(32);
    std::iota(out.begin(), out.end(), 0U);
    const auto split = make_channel_split(128, out);
    CHECK(effective_bitwidth(split, 3, 2, 32) == 2.5);
    CHECK(effective_bitwidth(split, 4, 3, 32) == 3.5);
    for (unsigned b = 1; b <= 8; ++b) {
        CHECK(effective_bitwidth(split, b, b, 0) == static_cast<double>(b));
    }
}

TEST_CASE("bit accounting matches the serialized record") {
    std::vector<uint32_t> out(32);
    std::iota(out.begin(), out.end(), 96U);
    const auto split = make_channel_split(128, out);
    for (auto codec : {MixedCodec::RABITQ, MixedCodec::TURBOQUANT_MSE}) {
        for (auto [hi, lo] : {std::pair{3, 2}, {4, 3}}) {
            MixedConfig cfg;
            cfg.hi_bits = static_cast<uint8_t>(hi);
            cfg.lo_bits = static_cast<uint8_t>(lo);
            cfg.codec = codec;
            cfg.seed = 7;
            const MixedQuantizer q(split, cfg);
            const double eff = effective_bitwidth(split, hi, lo, 32);
            CHECK(q.serialized_bytes() * 8 == static_cast<size_t>(std::ceil(eff * 128 / 8) * 8));
            Rng rng(3);
            const auto x = random_vector(rng, 128);
            const auto code = q.quantize(x);
            const auto bytes = q.serialize(code);
            CHECK(bytes.size() == q.serialized_bytes());
            const auto back = q.deserialize(bytes);
            CHECK(back.hi_code == code.hi_code);
            CHECK(back.lo_code == code.lo_code);
            CHECK(back.hi_scale == code.hi_scale);
            CHECK(back.lo_scale == code.lo_scale);
            CHECK(q.reconstruct(back) == q.reconstruct(code));
            std::vector<uint8_t> short_bytes(bytes.begin(), bytes.end() - 1);
            CHECK(error_type_of([&] { q.deserialize(short_bytes); }) == ErrorType::FORMAT_ERROR);
        }
    }
}

TEST_CASE("zero regular sub-vector decodes to zeros") {
    const auto split = make_channel_split(6, {1, 4});
    for (auto codec : {MixedCodec::RABITQ, MixedCodec::TURBOQUANT_MSE}) {
        MixedConfig cfg;
        cfg.codec = codec;
        const MixedQuantizer q(split, cfg);
        const std::vector<double> x = {0, 2.0, 0, 0, -1.0, 0};
        const auto code = q.quantize(x);
        CHECK(code.lo_scale == 0);
        CHECK(std::all_of(code.lo_code.begin(), code.lo_code.end(), [](uint8_t v) { return v == 0; }));
        CHECK(code.hi_scale != 0);
        const auto rec = q.reconstruct(code);
        for (uint32_t c : split.regular_idx) {
            CHECK(rec[c] == 0.0);
        }

        MixedCode zero = code;
        zero.hi_scale = 0;
        zero.lo_scale = 0;
        std::fill(zero.hi_code.begin(), zero.hi_code.end(), 0);
        std::fill(zero.lo_code.begin(), zero.lo_code.end(), 0);
        for (double v : q.reconstruct(zero)) {
            CHECK(v == 0.0);
        }
    }
}

TEST_CASE("grid-aligned vector round trips and scatter keeps channel order") {
    // Without rotation, a vector on the RaBitQ grid is reproduced exactly.
    const auto split = make_channel_split(6, {0, 3});
    MixedConfig cfg;
    cfg.hi_bits = 2;
    cfg.lo_bits = 1;
    cfg.rotate = false;
    const MixedQuantizer q(split, cfg);
    // hi channels 0, 3 on the B=2 grid {-1.5, -0.5, 0.5, 1.5} * 0.5
    // lo channels 1, 2, 4, 5 on the B=1 grid {-0.5, 0.5} * 2
    const std::vector<double> x = {0.75, 1.0, -1.0, -0.25, 1.0, 1.0};
    const auto code = q.quantize(x);
    CHECK(code.hi_code == std::vector<uint8_t>{3, 1});
    CHECK(code.lo_code == std::vector<uint8_t>{1, 0, 1, 1});
    const auto rec = q.reconstruct(code);
    for (size_t i = 0; i < x.size(); ++i) {
        CHECK(rec[i] == doctest::Approx(x[i]).epsilon(1e-3));
    }
}

TEST_CASE("half precision conversion rounds to nearest even") {
    CHECK(to_half_bits(1.0) == 0x3c00);
    CHECK(from_half_bits(0x3c00) == 1.0);
    CHECK(to_half_bits(0.0) == 0);
    // 1 + 2^-11 is halfway between 1 and the next half; ties go to the even mantissa
    CHECK(to_half_bits(1.0 + std::ldexp(1.0, -11)) == 0x3c00);
    CHECK(to_half_bits(1.0 + 3 * std::ldexp(1.0, -11)) == 0x3c02);
    CHECK(from_half_bits(to_half_bits(65504.0)) == 65504.0);
}

TEST_CASE("more bits never increase reconstruction error") {
    Rng rng(5);
    const uint32_t dh = 128;
    std::vector<std::vector<double>> xs;
    for (int i = 0; i < 1000; ++i) {
        xs.push_back(random_vector(rng, dh));
    }
    std::vector<uint32_t> out(32);
    std::iota(out.begin(), out.end(), 0U);
    const auto split = make_channel_split(dh, out);
    for (auto codec : {MixedCodec::RABITQ, MixedCodec::TURBOQUANT_MSE}) {
        auto mse = [&](int hi, int lo) {
            MixedConfig cfg;
            cfg.hi_bits = static_cast<uint8_t>(hi);
            cfg.lo_bits = static_cast<uint8_t>(lo);
            cfg.codec = codec;
            cfg.seed = 11;
            return mean_squared_error(MixedQuantizer(split, cfg), xs);
        };
        const double e32 = mse(3, 2);
        const double e42 = mse(4, 2);
        const double e43 = mse(4, 3);
        CHECK(e43 <= e32);
        CHECK(e42 <= e32);
        CHECK(e43 <= e42);
    }
}

TEST_CASE("invalid mixed configurations") {
    const auto split = make_channel_split(4, {0});
    MixedConfig cfg;
    cfg.hi_bits = 2;
    cfg.lo_bits = 2;
    CHECK(error_type_of([&] { MixedQuantizer(split, cfg); }) == ErrorType::INVALID_ARGUMENT);
    cfg.hi_bits = 2;
    cfg.lo_bits = 0;
    CHECK(error_type_of([&] { MixedQuantizer(split, cfg); }) == ErrorType::INVALID_ARGUMENT);
    cfg.lo_bits = 1;
    cfg.codec = MixedCodec::TURBOQUANT_MSE;
    CHECK(error_type_of([&] { MixedQuantizer(split, cfg); }) == ErrorType::INVALID_ARGUMENT);
    cfg.codec = MixedCodec::RABITQ;
    const MixedQuantizer q(split, cfg);
    CHECK(error_type_of([&] { q.quantize(std::vector<double>(5, 1.0)); }) ==
          ErrorType::INVALID_ARGUMENT);
    CHECK(error_type_of([&] { make_channel_split(4, {1, 1}); }) == ErrorType::INVALID_ARGUMENT);
    CHECK(error_type_of([&] { make_channel_split(4, {4}); }) == ErrorType::INVALID_ARGUMENT);
}
