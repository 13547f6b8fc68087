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

#include "eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "error.hpp"

namespace rqkit {

void
CompensatedSum::add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v)) {
        correction_ += (sum_ - t) + v;
    } else {
        correction_ += (v - t) + sum_;
    }
    sum_ = t;
}

double
sorted_quantile(std::span<const double> sorted, double p) {
    if (sorted.empty()) {
        throw_invalid("quantile of an empty sample");
    }
    const double pos = p * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<size_t>(std::floor(pos));
    const size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

ErrorStats
error_stats(std::span<const double> errors) {
    if (errors.empty()) {
        throw_invalid("error statistics need at least one sample");
    }
    ErrorStats s;
    s.count = errors.size();
    CompensatedSum sum;
    for (double e : errors) {
        sum.add(e);
        s.max_abs = std::max(s.max_abs, std::abs(e));
    }
    s.mean = sum.value() / static_cast<double>(s.count);
    CompensatedSum sq;
    for (double e : errors) {
        const double d = e - s.mean;
        sq.add(d * d);
    }
    s.std = std::sqrt(sq.value() / static_cast<double>(s.count));
    std::vector<double> sorted(errors.begin(), errors.end());
    std::sort(sorted.begin(), sorted.end());
    for (double p : STATS_QUANTILES) {
        s.quantiles.emplace_back(p, sorted_quantile(sorted, p));
    }
    return s;
}

ErrorStats
ip_error_stats(std::span<const double> estimates, std::span<const double> truths) {
    if (estimates.size() != truths.size()) {
        throw_invalid("ip_error_stats: " + std::to_string(estimates.size()) + " estimates vs " +
                      std::to_string(truths.size()) + " truths");
    }
    std::vector<double> errors(estimates.size());
    for (size_t i = 0; i < errors.size(); ++i) {
        errors[i] = estimates[i] - truths[i];
    }
    return error_stats(errors);
}

std::vector<uint32_t>
topk_from_scores(std::span<const double> scores, size_t k) {
    if (k < 1 || k > scores.size()) {
        throw_invalid("top-k: k must be in [1, " + std::to_string(scores.size()) + "], got " +
                      std::to_string(k));
    }
    std::vector<uint32_t> ids(scores.size());
    std::iota(ids.begin(), ids.end(), 0U);
    auto better = [&](uint32_t a, uint32_t b) {
        return scores[a] > scores[b] || (scores[a] == scores[b] && a < b);
    };
    std::partial_sort(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(k), ids.end(), better);
    ids.resize(k);
    return ids;
}

std::vector<uint32_t>
brute_force_topk(std::span<const float> base, size_t n, uint32_t dim,
                 std::span<const double> query, size_t k) {
    if (query.size() != dim || base.size() != n * dim) {
        throw_invalid("brute_force_topk: shape mismatch");
    }
    std::vector<double> scores(n);
    for (size_t i = 0; i < n; ++i) {
        const float* row = base.data() + i * dim;
        double s = 0.0;
        for (uint32_t d = 0; d < dim; ++d) {
            s += static_cast<double>(row[d]) * query[d];
        }
        scores[i] = s;
    }
    return topk_from_scores(scores, k);
}

double
recall_at_1_at_k(std::span<const uint32_t> exact_top1,
                 const std::vector<std::vector<uint32_t>>& approx_topk, size_t k) {
    if (exact_top1.empty()) {
        throw_invalid("recall: empty query set");
    }
    if (approx_topk.size() != exact_top1.size()) {
        throw_invalid("recall: approximate lists do not match the query count");
    }
    size_t hits = 0;
    for (size_t q = 0; q < exact_top1.size(); ++q) {
        const auto& list = approx_topk[q];
        if (list.size() < k) {
            throw_invalid("recall: approximate list shorter than k");
        }
        if (std::find(list.begin(), list.begin() + static_cast<std::ptrdiff_t>(k), exact_top1[q]) !=
            list.begin() + static_cast<std::ptrdiff_t>(k)) {
            ++hits;
        }
    }
    return static_cast<double>(hits) / static_cast<double>(exact_top1.size());
}

RecallResult
summarize_recall(std::vector<size_t> k_values, std::vector<std::vector<double>> per_run) {
    if (per_run.empty()) {
        throw_invalid("recall summary needs at least one run");
    }
    RecallResult r;
    r.k_values = std::move(k_values);
    r.runs = per_run.size();
    const size_t nk = r.k_values.size();
    for (const auto& run : per_run) {
        if (run.size() != nk) {
            throw_invalid("recall run length does not match k_values");
        }
    }
    r.recall.assign(nk, 0.0);
    r.std_per_k.assign(nk, 0.0);
    for (size_t j = 0; j < nk; ++j) {
        CompensatedSum sum;
        for (const auto& run : per_run) {
            sum.add(run[j]);
        }
        const double mean = sum.value() / static_cast<double>(r.runs);
        CompensatedSum sq;
        for (const auto& run : per_run) {
            sq.add((run[j] - mean) * (run[j] - mean));
        }
        r.recall[j] = mean;
        r.std_per_k[j] = std::sqrt(sq.value() / static_cast<double>(r.runs));
    }
    r.per_run = std::move(per_run);
    return r;
}

std::vector<TailPoint>
chebyshev_tail_check(std::span<const double> errors, std::span<const double> thresholds) {
    std::vector<double> finite;
    finite.reserve(errors.size());
    for (double e : errors) {
        if (std::isfinite(e)) {
            finite.push_back(e);
        }
    }
    if (finite.empty()) {
        throw_invalid("chebyshev_tail_check: no finite errors");
    }
    const ErrorStats stats = error_stats(finite);
    const double var = stats.std * stats.std;
    std::vector<TailPoint> out;
    for (double t : thresholds) {
        if (!(t > 0.0)) {
            throw_invalid("chebyshev_tail_check: thresholds must be positive");
        }
        size_t above = 0;
        for (double e : finite) {
            if (std::abs(e) >= t) {
                ++above;
            }
        }
        out.push_back({t, static_cast<double>(above) / static_cast<double>(finite.size()),
                       var / (t * t)});
    }
    return out;
}

double
optimal_bitwidth_reference(const TheoryParams& p) {
    if (!(p.eps > 0.0 && p.eps <= 1.0)) {
        throw_invalid("optimal_bitwidth_reference: eps must lie in (0, 1]");
    }
    if (!(p.delta > 0.0 && p.delta < 1.0)) {
        throw_invalid("optimal_bitwidth_reference: delta must lie in (0, 1)");
    }
    const double log_inv_delta = std::log(1.0 / p.delta);
    const double d = static_cast<double>(p.dim);
    if (!(log_inv_delta / (p.eps * p.eps) >= d)) {
        throw_invalid("optimal_bitwidth_reference: violates (1/eps^2) ln(1/delta) >= D");
    }
    if (!(d >= log_inv_delta)) {
        throw_invalid("optimal_bitwidth_reference: violates D >= ln(1/delta)");
    }
    return std::log2(log_inv_delta / (d * p.eps * p.eps));
}

}  // namespace rqkit
