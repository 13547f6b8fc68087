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

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "query.hpp"

namespace rqkit {

/// How the per-vector rescaling factor t is chosen before rounding.
struct RescaleStrategy {
    enum class Kind { EXHAUSTIVE_CRITICAL, CANDIDATE_SET, EXPECTED_FACTOR };

    static constexpr uint32_t DEFAULT_EXPECTED_SAMPLES = 4096;

    Kind kind = Kind::EXHAUSTIVE_CRITICAL;
    std::vector<double> candidates;                  // CANDIDATE_SET
    uint32_t samples = DEFAULT_EXPECTED_SAMPLES;    // EXPECTED_FACTOR

    static RescaleStrategy
    exhaustive() {
        return {};
    }

    static RescaleStrategy
    candidate_set(std::vector<double> values) {
        RescaleStrategy s;
        s.kind = Kind::CANDIDATE_SET;
        s.candidates = std::move(values);
        return s;
    }

    static RescaleStrategy
    expected_factor(uint32_t samples = DEFAULT_EXPECTED_SAMPLES) {
        RescaleStrategy s;
        s.kind = Kind::EXPECTED_FACTOR;
        s.samples = samples;
        return s;
    }
};

/// B-bit unsigned codes on the shifted grid plus both scalar factors.
///
/// x_hat = codes - (2^B - 1)/2. factor_prod = |x|/|x_hat| / cos(x, x_hat) scales
/// for unbiased inner products, factor_mse = |x|/|x_hat| * cos(x, x_hat) for
/// least-squares reconstruction.
struct RabitqCode {
    uint32_t dim = 0;
    uint8_t bits = 0;
    std::vector<uint8_t> codes;
    double factor_prod = 0.0;
    double factor_mse = 0.0;
    double cosine = 0.0;
    // cos(x, x_hat) <= 0; the code is still usable but carries no useful direction.
    bool low_quality = false;
};

struct IncrementalEstimate {
    double coarse = 0.0;
    double refined = 0.0;
};

inline double
grid_offset(unsigned bits) {
    return (static_cast<double>((1U << bits) - 1U)) / 2.0;
}

/// Rounds t * xn onto the shifted grid. Ties round half away from zero on the
/// unsigned scale; values beyond the grid are clamped to its ends.
std::vector<uint8_t>
rabitq_round(std::span<const double> xn, unsigned bits, double t);

/// cos(xn, x_hat(t)) for a unit vector xn.
double
rabitq_cosine_at(std::span<const double> xn, unsigned bits, double t);

double
select_rescale_factor(std::span<const double> xn, unsigned bits, const RescaleStrategy& strategy);

/// Monte Carlo mean of the exhaustive optimum over unit-sphere samples, cached
/// per (dim, bits, samples) and computed once even under concurrent callers.
double
expected_rescale_factor(uint32_t dim, unsigned bits, uint32_t samples);

RabitqCode
rabitq_quantize(std::span<const double> x, unsigned bits, const RescaleStrategy& strategy);

/// factor_prod * (<codes, y> - (2^B-1)/2 * sum(y)), accumulated bit-plane by
/// bit-plane from the most significant plane down.
double
rabitq_estimate_ip(const RabitqCode& code, const QueryContext& q);

/// factor_mse * <x_hat, y>, the reconstruction-based inner product.
double
rabitq_estimate_ip_mse(const RabitqCode& code, const QueryContext& q);


/// Coarse estimate from the top `split_bits` planes (lower planes replaced by
/// their midpoint), then the refined estimate, which continues the same
/// accumulation and is bit-identical to rabitq_estimate_ip.
IncrementalEstimate
rabitq_estimate_incremental(const RabitqCode& code, const QueryContext& q, unsigned split_bits);

std::vector<double>
rabitq_reconstruct(const RabitqCode& code);

/// "RBQ1" code file. Factors are stored as f32, codes bit-plane packed.
void
save_rabitq_codes(std::ostream& out, std::span<const RabitqCode> codes, uint32_t dim,
                  uint8_t bits);

std::vector<RabitqCode>
load_rabitq_codes(std::istream& in);

}  // namespace rqkit
