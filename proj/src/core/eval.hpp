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

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace rqkit {

/// Neumaier-compensated running sum.
class CompensatedSum {
public:
    void
    add(double v);

    double
    value() const {
        return sum_ + correction_;
    }

private:
    double sum_ = 0.0;
    double correction_ = 0.0;
};

struct ErrorStats {
    size_t count = 0;
    double mean = 0.0;
    double std = 0.0;  // population
    double max_abs = 0.0;
    std::vector<std::pair<double, double>> quantiles;  // (p, value) of the signed error
};

inline constexpr double STATS_QUANTILES[] = {0.5, 0.9, 0.99};

/// Statistics of estimates - truths.
ErrorStats
ip_error_stats(std::span<const double> estimates, std::span<const double> truths);

ErrorStats
error_stats(std::span<const double> errors);

/// Linear-interpolation quantile of sorted data.
double
sorted_quantile(std::span<const double> sorted, double p);

/// Top-k ids by descending score; equal scores keep the lower id first.
std::vector<uint32_t>
topk_from_scores(std::span<const double> scores, size_t k);

/// Exact inner-product top-k over a row-major n x dim base.
std::vector<uint32_t>
brute_force_topk(std::span<const float> base, size_t n, uint32_t dim,
                 std::span<const double> query, size_t k);

/// Fraction of queries whose exact top-1 appears among the first k approximate ids.
double
recall_at_1_at_k(std::span<const uint32_t> exact_top1,
                 const std::vector<std::vector<uint32_t>>& approx_topk, size_t k);

struct RecallResult {
    std::vector<size_t> k_values;
    std::vector<double> recall;     // mean over runs
    std::vector<double> std_per_k;  // population std over runs
    size_t runs = 0;
    std::vector<std::vector<double>> per_run;  // [run][k index]
};

/// Aggregates per-run recall curves.
RecallResult
summarize_recall(std::vector<size_t> k_values, std::vector<std::vector<double>> per_run);

struct TailPoint {
    double threshold = 0.0;
    double empirical_tail = 0.0;  // fraction of |e| >= t
    double bound = 0.0;           // sigma^2 / t^2
};

std::vector<TailPoint>
chebyshev_tail_check(std::span<const double> errors, std::span<const double> thresholds);

struct TheoryParams {
    double eps = 0.1;
    double delta = 1e-4;
    uint32_t dim = 128;
};

/// log2((1/D) * ln(1/delta) / eps^2), the constant-free optimal bit-width curve.
double
optimal_bitwidth_reference(const TheoryParams& p);

}  // namespace rqkit
