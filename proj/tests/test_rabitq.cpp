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
#include <sstream>

#include "doctest.h"
#include "rabitq.hpp"
#include "rotation.hpp"
#include "test_helpers.hpp"

using namespace rqkit;
using namespace rqkit::test;

namespace {

std::vector<double>
grid_direction(const RabitqCode& c) {
    std::vector<double> xh(c.dim);
    for (size_t i = 0; i < xh.size(); ++i) {
        xh[i] = static_cast<double>(c.codes[i]) - grid_offset(c.bits);
    }
    return xh;
}

QueryContext
plain_query(std::vector<double> y) {
    return prepare_rotated_query(std::move(y));
}

}  // namespace

TEST_CASE("hand example: axis vector at one bit") {
    const auto c = rabitq_quantize(std::vector<double>{1, 0, 0, 0}, 1, RescaleStrategy::exhaustive());
    CHECK(c.codes == std::vector<uint8_t>{1, 1, 1, 1});
    CHECK(c.cosine == doctest::Approx(0.5));
    CHECK(c.factor_prod == doctest::Approx(2.0));
    CHECK(c.factor_mse == doctest::Approx(0.5));
    CHECK_FALSE(c.low_quality);

    CHECK(rabitq_estimate_ip(c, plain_query({1, 0, 0, 0})) == doctest::Approx(1.0));
    CHECK(rabitq_estimate_ip(c, plain_query({0, 1, 0, 0})) == doctest::Approx(1.0));
    CHECK(rabitq_estimate_ip(c, plain_query({0, 0, 0, 0})) == 0.0);

    const auto rec = rabitq_reconstruct(c);
    for (double v : rec) {
        CHECK(v == doctest::Approx(0.25));
    }
}

TEST_CASE("hand example: grid-aligned direction") {
    const std::vector<double> x = {0.5, 0.5, 0.5, 0.5};
    const auto c = rabitq_quantize(x, 1, RescaleStrategy::exhaustive());
    CHECK(c.cosine == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(c.factor_prod == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(c.factor_mse == doctest::Approx(1.0).epsilon(1e-15));
    const auto rec = rabitq_reconstruct(c);
    double err = 0.0;
    for (size_t i = 0; i < 4; ++i) {
        CHECK(rec[i] == doctest::Approx(0.5).epsilon(1e-15));
        err += (rec[i] - x[i]) * (rec[i] - x[i]);
    }
    CHECK(err <= 1e-28);
    const double t = select_rescale_factor(x, 1, RescaleStrategy::exhaustive());
    CHECK(rabitq_cosine_at(x, 1, t) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("argument validation") {
    CHECK(error_type_of([] {
              rabitq_quantize(std::vector<double>(4, 0.0), 2, RescaleStrategy::exhaustive());
          }) == ErrorType::DEGENERATE_INPUT);
    CHECK(error_type_of([] {
              rabitq_quantize(std::vector<double>{1, 2}, 0, RescaleStrategy::exhaustive());
          }) == ErrorType::INVALID_ARGUMENT);
    CHECK(error_type_of([] {
              rabitq_quantize(std::vector<double>{1, 2}, 9, RescaleStrategy::exhaustive());
          }) == ErrorType::INVALID_ARGUMENT);
    CHECK(error_type_of([] {
              select_rescale_factor(std::vector<double>{0.6, 0.8}, 2, RescaleStrategy::candidate_set({}));
          }) == ErrorType::INVALID_ARGUMENT);
    const auto c = rabitq_quantize(std::vector<double>{1, 2, 3}, 2, RescaleStrategy::exhaustive());
    CHECK(error_type_of([&] { rabitq_estimate_ip(c, plain_query({1, 2})); }) ==
          ErrorType::INVALID_ARGUMENT);
    CHECK(error_type_of([&] { rabitq_estimate_incremental(c, plain_query({1, 2, 3}), 2); }) ==
          ErrorType::INVALID_ARGUMENT);
}

TEST_CASE("rounding ties go away from zero on the unsigned scale") {
    // t * 0 + 1.5 sits exactly between grid entries 1 and 2
    CHECK(rabitq_round(std::vector<double>{0.0, 0.0}, 2, 1.0) == std::vector<uint8_t>{2, 2});
    // clamping at both grid ends
    CHECK(rabitq_round(std::vector<double>{1.0, -1.0}, 2, 10.0) == std::vector<uint8_t>{3, 0});
}

TEST_CASE("candidate set with one value returns it") {
    Rng rng(1);
    const auto xn = random_unit(rng, 16);
    CHECK(select_rescale_factor(xn, 3, RescaleStrategy::candidate_set({1.0})) == 1.0);
}

TEST_CASE("exhaustive search dominates candidates and a fine brute-force scan") {
    Rng rng(2);
    const std::vector<double> candidates = {0.5, 1.0, 2.0, 3.0, 4.0, 6.0, 8.0};
    for (int trial = 0; trial < 100; ++trial) {
        const auto xn = random_unit(rng, 16);
        const double t = select_rescale_factor(xn, 3, RescaleStrategy::exhaustive());
        const double best = rabitq_cosine_at(xn, 3, t);
        for (double c : candidates) {
            CHECK(best >= rabitq_cosine_at(xn, 3, c) - 1e-12);
        }
        const double tc = select_rescale_factor(xn, 3, RescaleStrategy::candidate_set(candidates));
        CHECK(best >= rabitq_cosine_at(xn, 3, tc) - 1e-12);
        double amax = 0.0;
        for (double v : xn) {
            amax = std::max(amax, std::abs(v));
        }
        const double t_max = grid_offset(3) / amax;
        double scan = 0.0;
        for (int k = 1; k <= 4000; ++k) {
            scan = std::max(scan, rabitq_cosine_at(xn, 3, t_max * k / 4000.0));
        }
        CHECK(best >= scan - 1e-12);
    }
}

TEST_CASE("expected factor strategy is cached and positive") {
    const double a = expected_rescale_factor(16, 3, 256);
    const double b = expected_rescale_factor(16, 3, 256);
    CHECK(a == b);
    CHECK(a > 0.0);
    Rng rng(3);
    const auto xn = random_unit(rng, 16);
    CHECK(select_rescale_factor(xn, 3, RescaleStrategy::expected_factor(256)) == a);
}

TEST_CASE("code invariants") {
    Rng rng(4);
    for (unsigned bits = 1; bits <= 8; ++bits) {
        for (int trial = 0; trial < 20; ++trial) {
            const auto x = random_vector(rng, 33);
            const auto c = rabitq_quantize(x, bits, RescaleStrategy::exhaustive());
            for (uint8_t u : c.codes) {
                CHECK(u < (1U << bits));
            }
            const auto xh = grid_direction(c);
            const double ratio = dot(x, x) / dot(xh, xh);
            CHECK(c.factor_prod * c.factor_mse == doctest::Approx(ratio).epsilon(1e-6));
            if (c.cosine > 0.0) {
                CHECK(c.factor_prod > 0.0);
            }
        }
    }
}

TEST_CASE("integer path matches the direct estimator") {
    Rng rng(5);
    for (unsigned bits : {1U, 2U, 3U, 4U, 7U, 8U}) {
        for (int trial = 0; trial < 200; ++trial) {
            const auto x = random_vector(rng, 40);
            const auto y = random_vector(rng, 40);
            const auto c = rabitq_quantize(x, bits, RescaleStrategy::exhaustive());
            const double direct = c.factor_prod * dot(grid_direction(c), y);
            const double est = rabitq_estimate_ip(c, plain_query(y));
            CHECK(std::abs(est - direct) <= 1e-5 * std::abs(direct) + 1e-12);
        }
    }
}

TEST_CASE("incremental refinement is bit-identical and coarse error shrinks") {
    Rng rng(6);
    {
        const auto x = random_vector(rng, 20);
        const auto y = random_vector(rng, 20);
        const auto c = rabitq_quantize(x, 2, RescaleStrategy::exhaustive());
        const auto q = plain_query(y);
        const auto inc = rabitq_estimate_incremental(c, q, 1);
        CHECK(inc.refined == rabitq_estimate_ip(c, q));
    }
    std::vector<double> gap(4, 0.0);
    for (int trial = 0; trial < 1000; ++trial) {
        const auto x = random_vector(rng, 64);
        const auto y = random_vector(rng, 64);
        const auto c = rabitq_quantize(x, 4, RescaleStrategy::exhaustive());
        const auto q = plain_query(y);
        const double full = rabitq_estimate_ip(c, q);
        for (unsigned s = 1; s < 4; ++s) {
            const auto inc = rabitq_estimate_incremental(c, q, s);
            CHECK(inc.refined == full);
            gap[s] += std::abs(inc.coarse - inc.refined);
        }
    }
    CHECK(gap[1] > gap[2]);
    CHECK(gap[2] > gap[3]);
}

TEST_CASE("factor_mse minimizes reconstruction error for a fixed code") {
    Rng rng(7);
    for (int trial = 0; trial < 100; ++trial) {
        const auto x = random_vector(rng, 24);
        auto c = rabitq_quantize(x, 3, RescaleStrategy::exhaustive());
        auto err = [&](double f) {
            auto cc = c;
            cc.factor_mse = f;
            const auto rec = rabitq_reconstruct(cc);
            double e = 0.0;
            for (size_t i = 0; i < x.size(); ++i) {
                e += (rec[i] - x[i]) * (rec[i] - x[i]);
            }
            return e;
        };
        const double base = err(c.factor_mse);
        CHECK(err(c.factor_mse * 1.1) > base);
        CHECK(err(c.factor_mse * 0.9) > base);
    }
}

TEST_CASE("unbiased over fresh rotations of a fixed pair") {
    const uint32_t dim = 32;
    Rng rng(8);
    const auto x = random_unit(rng, dim);
    const auto y = random_unit(rng, dim);
    const double truth = dot(x, y);
    for (unsigned bits : {1U, 2U, 4U, 8U}) {
        const int draws = 400;
        std::vector<double> err;
        for (int d = 0; d < draws; ++d) {
            const auto rot = DenseRotation::sample(dim, 1000 + d);
            const auto c = rabitq_quantize(rot.apply(x), bits, RescaleStrategy::exhaustive());
            err.push_back(rabitq_estimate_ip(c, plain_query(rot.apply(y))) - truth);
        }
        double mean = 0.0;
        for (double e : err) {
            mean += e;
        }
        mean /= draws;
        double var = 0.0;
        for (double e : err) {
            var += (e - mean) * (e - mean);
        }
        const double se = std::sqrt(var / draws) / std::sqrt(static_cast<double>(draws));
        CHECK(std::abs(mean) <= 4.0 * se);
    }
}

TEST_CASE("error spread shrinks as bits grow") {
    const uint32_t dim = 128;
    const int pairs = 2000;
    const auto rot = DenseRotation::sample(dim, 99);
    Rng rng(9);
    std::vector<std::vector<double>> xs;
    std::vector<std::vector<double>> ys;
    for (int i = 0; i < pairs; ++i) {
        xs.push_back(rot.apply(random_unit(rng, dim)));
        ys.push_back(rot.apply(random_unit(rng, dim)));
    }
    double prev = INFINITY;
    for (unsigned bits = 1; bits <= 8; ++bits) {
        double s = 0.0;
        double sq = 0.0;
        for (int i = 0; i < pairs; ++i) {
            const auto c = rabitq_quantize(xs[i], bits, RescaleStrategy::exhaustive());
            const double e = rabitq_estimate_ip(c, plain_query(ys[i])) - dot(xs[i], ys[i]);
            s += e;
            sq += e * e;
        }
        const double sd = std::sqrt(sq / pairs - (s / pairs) * (s / pairs));
        CHECK(sd < prev);
        prev = sd;
    }
}

TEST_CASE("RBQ1 file layout and round trip") {
    Rng rng(10);
    std::vector<RabitqCode> codes;
    for (int i = 0; i < 3; ++i) {
        codes.push_back(rabitq_quantize(random_vector(rng, 10), 3, RescaleStrategy::exhaustive()));
    }
    std::stringstream ss;
    save_rabitq_codes(ss, codes, 10, 3);
    const std::string bytes = ss.str();
    CHECK(bytes.substr(0, 4) == "RBQ1");
    CHECK(bytes.size() == 4 + 4 + 1 + 8 + 3 * (4 + 4 + 3 * 2));
    const auto back = load_rabitq_codes(ss);
    REQUIRE(back.size() == 3);
    for (size_t i = 0; i < 3; ++i) {
        CHECK(back[i].codes == codes[i].codes);
        CHECK(back[i].factor_prod == static_cast<double>(static_cast<float>(codes[i].factor_prod)));
        CHECK(back[i].factor_mse == static_cast<double>(static_cast<float>(codes[i].factor_mse)));
    }
    std::stringstream truncated(bytes.substr(0, bytes.size() - 1));
    CHECK(error_type_of([&] { load_rabitq_codes(truncated); }) == ErrorType::FORMAT_ERROR);
}
