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

#include "rabitq.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <tuple>

#include "binary_io.hpp"
#include "bitpack.hpp"
#include "error.hpp"
#include "random.hpp"

namespace rqkit {

namespace {

constexpr uint64_t EXPECTED_FACTOR_SEED = 0x5eedfac7;

void
check_bits(unsigned bits) {
    if (bits < 1 || bits > 8) {
        throw_invalid("bits must be in [1, 8], got " + std::to_string(bits));
    }
}

double
exhaustive_critical(std::span<const double> xn, unsigned bits) {
    const size_t dim = xn.size();
    const double offset = grid_offset(bits);
    const uint32_t levels = 1U << (bits - 1);  // magnitudes 0.5, 1.5, ..., offset

    double amax = 0.0;
    for (double v : xn) {
        amax = std::max(amax, std::abs(v));
    }
    const double t_max = offset / amax;

    // A coordinate with magnitude a moves from level m-1/2 to m+1/2 when
    // t * a crosses m. Crossings past t_max clamp the largest coordinates but
    // still produce distinct codes, so they are enumerated too.
    struct Event {
        double t;
        uint32_t coord;
    };
    std::vector<Event> events;
    events.reserve(dim * 2);
    for (size_t i = 0; i < dim; ++i) {
        const double a = std::abs(xn[i]);
        if (a == 0.0) {
            continue;
        }
        for (uint32_t m = 1; m < levels; ++m) {
            const double t = static_cast<double>(m) / a;
            events.push_back({t, static_cast<uint32_t>(i)});
        }
    }
    std::sort(events.begin(), events.end(), [](const Event& l, const Event& r) {
        return l.t < r.t || (l.t == r.t && l.coord < r.coord);
    });

    std::vector<uint32_t> level(dim, 0);
    double dot = 0.0;
    for (double v : xn) {
        dot += 0.5 * std::abs(v);
    }
    double sq = 0.25 * static_cast<double>(dim);

    // Beyond the last crossing every coordinate is saturated; any larger t is equivalent.
    const double t_end = events.empty() ? t_max : 2.0 * events.back().t;
    double best_cos = dot / std::sqrt(sq);
    double best_lo = 0.0;
    double best_hi = events.empty() ? t_end : events.front().t;

    size_t k = 0;
    while (k < events.size()) {
        const double t = events[k].t;
        while (k < events.size() && events[k].t == t) {
            const uint32_t i = events[k].coord;
            const uint32_t m = ++level[i];
            dot += std::abs(xn[i]);
            sq += 2.0 * static_cast<double>(m);
            ++k;
        }
        const double cos = dot / std::sqrt(sq);
        if (cos > best_cos) {
            best_cos = cos;
            best_lo = t;
            best_hi = k < events.size() ? events[k].t : t_end;
        }
    }
    // Interior of the winning interval; the endpoints are rounding ties.
    return best_hi > best_lo ? 0.5 * (best_lo + best_hi) : best_lo;
}

struct ExpectedFactorCache {
    struct Entry {
        std::once_flag once;
        double value = 0.0;
    };
    std::mutex mu;
    std::map<std::tuple<uint32_t, unsigned, uint32_t>, std::shared_ptr<Entry>> entries;
};

ExpectedFactorCache&
expected_cache() {
    static ExpectedFactorCache cache;
    return cache;
}

}  // namespace

std::vector<uint8_t>
rabitq_round(std::span<const double> xn, unsigned bits, double t) {
    check_bits(bits);
    const double offset = grid_offset(bits);
    const double top = static_cast<double>((1U << bits) - 1U);
    std::vector<uint8_t> codes(xn.size());
    for (size_t i = 0; i < xn.size(); ++i) {
        const double k = std::round(t * xn[i] + offset);
        codes[i] = static_cast<uint8_t>(std::clamp(k, 0.0, top));
    }
    return codes;
}

double
rabitq_cosine_at(std::span<const double> xn, unsigned bits, double t) {
    const auto codes = rabitq_round(xn, bits, t);
    const double offset = grid_offset(bits);
    double dot = 0.0;
    double sq = 0.0;
    for (size_t i = 0; i < xn.size(); ++i) {
        const double g = static_cast<double>(codes[i]) - offset;
        dot += g * xn[i];
        sq += g * g;
    }
    return dot / std::sqrt(sq);
}

double
select_rescale_factor(std::span<const double> xn, unsigned bits, const RescaleStrategy& strategy) {
    check_bits(bits);
    if (xn.empty()) {
        throw_invalid("select_rescale_factor: empty vector");
    }
    switch (strategy.kind) {
        case RescaleStrategy::Kind::EXHAUSTIVE_CRITICAL:
            return exhaustive_critical(xn, bits);
        case RescaleStrategy::Kind::CANDIDATE_SET: {
            if (strategy.candidates.empty()) {
                throw_invalid("candidate rescale set is empty");
            }
            double best_t = strategy.candidates.front();
            double best_cos = -2.0;
            for (double t : strategy.candidates) {
                if (!(t > 0.0) || !std::isfinite(t)) {
                    throw_invalid("rescale candidates must be positive and finite");
                }
                const double cos = rabitq_cosine_at(xn, bits, t);
                if (cos > best_cos) {
                    best_cos = cos;
                    best_t = t;
                }
            }
            return best_t;
        }
        case RescaleStrategy::Kind::EXPECTED_FACTOR:
            return expected_rescale_factor(static_cast<uint32_t>(xn.size()), bits,
                                           strategy.samples);
    }
    throw_invalid("unknown rescale strategy");
}

double
expected_rescale_factor(uint32_t dim, unsigned bits, uint32_t samples) {
    check_bits(bits);
    if (samples == 0) {
        throw_invalid("expected-factor strategy needs at least one sample");
    }
    if (dim == 0) {
        throw_invalid("expected-factor strategy needs a positive dimension");
    }
    auto& cache = expected_cache();
    std::shared_ptr<ExpectedFactorCache::Entry> entry;
    {
        std::lock_guard<std::mutex> lock(cache.mu);
        auto& slot = cache.entries[{dim, bits, samples}];
        if (!slot) {
            slot = std::make_shared<ExpectedFactorCache::Entry>();
        }
        entry = slot;
    }
    std::call_once(entry->once, [&] {
        Rng rng(mix_seed(EXPECTED_FACTOR_SEED, stream::RESCALE));
        std::vector<double> v(dim);
        double total = 0.0;
        for (uint32_t s = 0; s < samples; ++s) {
            double norm_sq = 0.0;
            do {
                norm_sq = 0.0;
                for (auto& c : v) {
                    c = rng.normal();
                    norm_sq += c * c;
                }
            } while (norm_sq == 0.0);
            const double inv = 1.0 / std::sqrt(norm_sq);
            for (auto& c : v) {
                c *= inv;
            }
            total += exhaustive_critical(v, bits);
        }
        entry->value = total / static_cast<double>(samples);
    });
    return entry->value;
}

RabitqCode
rabitq_quantize(std::span<const double> x, unsigned bits, const RescaleStrategy& strategy) {
    check_bits(bits);
    double norm_sq = 0.0;
    for (double v : x) {
        norm_sq += v * v;
    }
    if (x.empty() || !(norm_sq > 0.0)) {
        throw_degenerate("rabitq_quantize: input vector has zero norm");
    }
    const double norm = std::sqrt(norm_sq);
    std::vector<double> xn(x.begin(), x.end());
    for (auto& v : xn) {
        v /= norm;
    }

    const double t = select_rescale_factor(xn, bits, strategy);

    RabitqCode code;
    code.dim = static_cast<uint32_t>(x.size());
    code.bits = static_cast<uint8_t>(bits);
    code.codes = rabitq_round(xn, bits, t);

    const double offset = grid_offset(bits);
    double dot = 0.0;
    double sq = 0.0;
    for (size_t i = 0; i < xn.size(); ++i) {
        const double g = static_cast<double>(code.codes[i]) - offset;
        dot += g * xn[i];
        sq += g * g;
    }
    const double hat_norm = std::sqrt(sq);
    const double cos = dot / hat_norm;
    code.cosine = cos;
    code.low_quality = !(cos > 0.0);
    code.factor_mse = norm / hat_norm * cos;
    code.factor_prod = cos != 0.0 ? norm / hat_norm / cos : 0.0;
    return code;
}

double
rabitq_estimate_ip(const RabitqCode& code, const QueryContext& q) {
    return rabitq_estimate_incremental(code, q, 0).refined;
}

IncrementalEstimate
rabitq_estimate_incremental(const RabitqCode& code, const QueryContext& q, unsigned split_bits) {
    // split_bits == 0 is the internal full-estimate entry point.
    if (split_bits != 0 && split_bits >= code.bits) {
        throw_invalid("split_bits must be in [1, bits-1], got " + std::to_string(split_bits));
    }
    if (q.y.size() != code.dim || code.codes.size() != code.dim) {
        throw_invalid("rabitq_estimate_ip: code has " + std::to_string(code.dim) +
                      " dims, query has " + std::to_string(q.y.size()));
    }
    const unsigned bits = code.bits;
    const double offset = grid_offset(bits);
    const uint8_t* u = code.codes.data();
    const double* y = q.y.data();
    const size_t dim = code.dim;

    IncrementalEstimate out;
    double acc = 0.0;
    unsigned consumed = 0;
    for (int plane = static_cast<int>(bits) - 1; plane >= 0; --plane) {
        double s = 0.0;
        for (size_t i = 0; i < dim; ++i) {
            s += static_cast<double>((u[i] >> plane) & 1U) * y[i];
        }
        acc += std::ldexp(s, plane);
        ++consumed;
        if (consumed == split_bits) {
            const unsigned low = bits - split_bits;
            const double mid = static_cast<double>((1U << low) - 1U) / 2.0;
            out.coarse = code.factor_prod * (acc + mid * q.coord_sum - offset * q.coord_sum);
        }
    }
    out.refined = code.factor_prod * (acc - offset * q.coord_sum);
    if (split_bits == 0) {
        out.coarse = out.refined;
    }
    return out;
}

double
rabitq_estimate_ip_mse(const RabitqCode& code, const QueryContext& q) {
    IncrementalEstimate e = rabitq_estimate_incremental(code, q, 0);
    if (code.factor_prod == 0.0) {
        return 0.0;
    }
    return e.refined / code.factor_prod * code.factor_mse;
}

std::vector<double>
rabitq_reconstruct(const RabitqCode& code) {
    const double offset = grid_offset(code.bits);
    std::vector<double> out(code.codes.size());
    for (size_t i = 0; i < out.size(); ++i) {
        out[i] = code.factor_mse * (static_cast<double>(code.codes[i]) - offset);
    }
    return out;
}

void
save_rabitq_codes(std::ostream& out, std::span<const RabitqCode> codes, uint32_t dim,
                  uint8_t bits) {
    check_bits(bits);
    ByteWriter w(out);
    w.magic("RBQ1");
    w.u32(dim);
    w.u8(bits);
    w.u64(codes.size());
    for (const auto& c : codes) {
        if (c.dim != dim || c.bits != bits || c.codes.size() != dim) {
            throw_invalid("save_rabitq_codes: code shape does not match the file header");
        }
        w.f32(static_cast<float>(c.factor_prod));
        w.f32(static_cast<float>(c.factor_mse));
        w.bytes(pack_bit_planes(c.codes, bits));
    }
    w.check("RBQ1 codes");
}

std::vector<RabitqCode>
load_rabitq_codes(std::istream& in) {
    ByteReader r(in);
    r.expect_magic("RBQ1");
    const uint32_t dim = r.u32("dim");
    const uint8_t bits = r.u8("bits");
    const uint64_t n = r.u64("count");
    if (dim == 0 || bits < 1 || bits > 8) {
        throw_format("RBQ1 header has invalid dim/bits");
    }
    std::vector<RabitqCode> codes;
    std::vector<uint8_t> planes(plane_bytes(dim) * bits);
    for (uint64_t k = 0; k < n; ++k) {
        RabitqCode c;
        c.dim = dim;
        c.bits = bits;
        c.factor_prod = r.f32("factor_prod");
        c.factor_mse = r.f32("factor_mse");
        r.bytes(planes, "code planes");
        c.codes = unpack_bit_planes(planes, dim, bits);
        // cos^2 = factor_mse / factor_prod; the sign follows factor_prod.
        if (c.factor_prod != 0.0) {
            const double ratio = c.factor_mse / c.factor_prod;
            c.cosine = std::copysign(std::sqrt(std::abs(ratio)), c.factor_prod);
        }
        c.low_quality = !(c.cosine > 0.0);
        codes.push_back(std::move(c));
    }
    return codes;
}

}  // namespace rqkit
