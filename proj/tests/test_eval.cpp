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

#include "bench.hpp"
#include "codec.hpp"
#include "dataset.hpp"
#include "doctest.h"
#include "eval.hpp"
#include "test_helpers.hpp"

using namespace rqkit;
using namespace rqkit::test;

TEST_CASE("error statistics") {
    const std::vector<double> est = {0.0, 1.0, 2.0};
    const std::vector<double> truth = {1.0, 1.0, 1.0};
    const auto s = ip_error_stats(est, truth);
    CHECK(s.count == 3);
    CHECK(s.mean == 0.0);
    CHECK(s.std == doctest::Approx(std::sqrt(2.0 / 3.0)).epsilon(1e-15));
    CHECK(s.max_abs == 1.0);
    REQUIRE(s.quantiles.size() == 3);
    CHECK(s.quantiles[0].first == 0.5);
    CHECK(s.quantiles[0].second == 0.0);
    CHECK(s.quantiles[1].second == doctest::Approx(0.8));

    const auto same = ip_error_stats(truth, truth);
    CHECK(same.mean == 0.0);
    CHECK(same.std == 0.0);
    CHECK(same.max_abs == 0.0);

    const std::vector<double> one = {-0.25};
    const auto single = error_stats(one);
    CHECK(single.mean == -0.25);
    CHECK(single.std == 0.0);
    CHECK(single.max_abs == 0.25);

    CHECK(error_type_of([&] { ip_error_stats(est, one); }) == ErrorType::INVALID_ARGUMENT);
    CHECK(error_type_of([] { error_stats({}); }) == ErrorType::INVALID_ARGUMENT);
}

TEST_CASE("compensated sum") {
    CompensatedSum s;
    s.add(1.0);
    for (int i = 0; i < 1000; ++i) {
        s.add(1e-16);
    }
    s.add(-1.0);
    CHECK(s.value() == doctest::Approx(1e-13).epsilon(1e-9));
}

TEST_CASE("brute force top-k") {
    const std::vector<float> base = {1, 0, 0, 0, 1, 0, 0, 0, 1};
    CHECK(brute_force_topk(base, 3, 3, std::vector<double>{0, 1, 0}, 1) == std::vector<uint32_t>{1});
    CHECK(brute_force_topk(base, 3, 3, std::vector<double>{0.2, 0.5, 0.3}, 3) ==
          std::vector<uint32_t>{1, 2, 0});
    CHECK(brute_force_topk(base, 3, 3, std::vector<double>{0, 1, 1}, 3) ==
          std::vector<uint32_t>{1, 2, 0});
    CHECK(error_type_of([&] { brute_force_topk(base, 3, 3, std::vector<double>{0, 1, 0}, 4); }) ==
          ErrorType::INVALID_ARGUMENT);
    CHECK(error_type_of([&] { brute_force_topk(base, 3, 3, std::vector<double>{0, 1, 0}, 0); }) ==
          ErrorType::INVALID_ARGUMENT);
}

TEST_CASE("recall at 1 at k") {
    const std::vector<uint32_t> exact = {5, 7, 9};
    const std::vector<std::vector<uint32_t>> approx = {
        {1, 2, 5, 3, 9}, {7, 0, 1, 2, 3}, {0, 1, 2, 3, 9}};
    CHECK(recall_at_1_at_k(exact, approx, 4) == doctest::Approx(2.0 / 3.0).epsilon(1e-9));
    CHECK(recall_at_1_at_k(exact, approx, 5) == 1.0);
    double prev = 0.0;
    for (size_t k = 1; k <= 5; ++k) {
        const double r = recall_at_1_at_k(exact, approx, k);
        CHECK(r >= prev);
        prev = r;
    }
    CHECK(error_type_of([] { recall_at_1_at_k({}, {}, 1); }) == ErrorType::INVALID_ARGUMENT);
    CHECK(error_type_of([&] { recall_at_1_at_k(exact, approx, 6); }) == ErrorType::INVALID_ARGUMENT);

    // exact scorer gives recall 1 for every k
    Rng rng(1);
    const size_t n = 200;
    const uint32_t d = 8;
    std::vector<float> base(n * d);
    for (auto& v : base) {
        v = static_cast<float>(rng.normal());
    }
    std::vector<uint32_t> top1;
    std::vector<std::vector<uint32_t>> lists;
    for (int q = 0; q < 20; ++q) {
        const auto y = random_vector(rng, d);
        top1.push_back(brute_force_topk(base, n, d, y, 1)[0]);
        lists.push_back(brute_force_topk(base, n, d, y, 16));
    }
    for (size_t k : {1, 2, 4, 8, 16}) {
        CHECK(recall_at_1_at_k(top1, lists, k) == 1.0);
    }
}

TEST_CASE("recall summary") {
    const auto r = summarize_recall({1, 2}, {{0.5, 1.0}, {0.7, 1.0}});
    CHECK(r.runs == 2);
    CHECK(r.recall[0] == doctest::Approx(0.6));
    CHECK(r.std_per_k[0] == doctest::Approx(0.1));
    CHECK(r.std_per_k[1] == 0.0);
    CHECK(error_type_of([] { summarize_recall({1}, {}); }) == ErrorType::INVALID_ARGUMENT);
}

TEST_CASE("chebyshev tail check") {
    // population std of {-0.1, 0.1} is exactly 0.1
    const std::vector<double> e = {-0.1, 0.1};
    const std::vector<double> t = {0.5};
    const auto pts = chebyshev_tail_check(e, t);
    REQUIRE(pts.size() == 1);
    CHECK(pts[0].bound == doctest::Approx(0.04).epsilon(1e-12));
    CHECK(pts[0].empirical_tail == 0.0);

    const std::vector<double> zeros(10, 0.0);
    for (const auto& p : chebyshev_tail_check(zeros, std::vector<double>{0.1, 1.0})) {
        CHECK(p.empirical_tail == 0.0);
        CHECK(p.bound == 0.0);
    }

    Rng rng(9);
    std::vector<double> sample(5000);
    for (auto& v : sample) {
        v = rng.normal() * 0.3;
    }
    std::vector<double> ts;
    for (double m : {0.5, 1.0, 1.5, 2.0, 3.0}) {
        ts.push_back(m * 0.3);
    }
    for (const auto& p : chebyshev_tail_check(sample, ts)) {
        CHECK(p.empirical_tail <= p.bound * 1.05 + 2.0 / std::sqrt(5000.0));
    }

    const std::vector<double> nan = {std::nan("")};
    CHECK(error_type_of([&] { chebyshev_tail_check(nan, t); }) == ErrorType::INVALID_ARGUMENT);
    CHECK(error_type_of([&] { chebyshev_tail_check(e, std::vector<double>{0.0}); }) ==
          ErrorType::INVALID_ARGUMENT);
}

TEST_CASE("optimal bitwidth reference") {
    CHECK(optimal_bitwidth_reference({1.0, std::exp(-1.0), 1}) == doctest::Approx(0.0));
    const double a = optimal_bitwidth_reference({0.1, 1e-4, 128});
    CHECK(a == doctest::Approx(std::log2(std::log(1e4) / 1.28)).epsilon(1e-12));
    CHECK(a == doctest::Approx(2.847).epsilon(1e-3));
    CHECK(optimal_bitwidth_reference({0.05, 1e-4, 128}) - a == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(error_type_of([] { optimal_bitwidth_reference({0.5, 1e-4, 128}); }) ==
          ErrorType::INVALID_ARGUMENT);
    CHECK(error_type_of([] { optimal_bitwidth_reference({0.01, 1e-4, 1}); }) ==
          ErrorType::INVALID_ARGUMENT);
    CHECK(error_type_of([] { optimal_bitwidth_reference({0.0, 1e-4, 128}); }) ==
          ErrorType::INVALID_ARGUMENT);
    try {
        optimal_bitwidth_reference({0.5, 1e-4, 128});
    } catch (const RqkitException& e) {
        CHECK(std::string(e.what()).find(">= D") != std::string::npos);
    }
}

TEST_CASE("bench reports the median of its repeats") {
    const auto data = generate_synthetic(500, 32, Distribution::GAUSSIAN, 1);
    CodecConfig cfg;
    cfg.bits = 2;
    const Codec codec(cfg, 32);
    const auto t = bench_quantize(data, codec, 3, 1);
    REQUIRE(t.samples.size() == 3);
    auto sorted = t.samples;
    std::sort(sorted.begin(), sorted.end());
    CHECK(t.median_seconds == sorted[1]);
    CHECK(t.min_seconds == sorted[0]);
    CHECK(t.repeats == 3);
    CHECK_FALSE(t.hardware_note.empty());
    REQUIRE(t.rotation_samples.size() == 3);
    for (size_t i = 0; i < 3; ++i) {
        CHECK(t.rotation_samples[i] > 0.0);
        CHECK(t.samples[i] * static_cast<double>(t.workers) >=
              t.rotation_samples[i] + t.quantize_samples[i]);
    }
    CHECK(error_type_of([&] { bench_quantize(data, codec, 0, 1); }) == ErrorType::INVALID_ARGUMENT);
}
