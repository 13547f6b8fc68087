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

#include "turboquant.hpp"

#include <cmath>
#include <numbers>

#include "binary_io.hpp"
#include "bitpack.hpp"
#include "error.hpp"

namespace rqkit {

namespace {

const double SQRT_HALF_PI = std::sqrt(std::numbers::pi / 2.0);

double
norm_of(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) {
        s += v * v;
    }
    return std::sqrt(s);
}

void
check_query(uint32_t dim, const QueryContext& q, const char* what) {
    if (q.y.size() != dim) {
        throw_invalid(std::string(what) + ": code has " + std::to_string(dim) +
                      " dims, query has " + std::to_string(q.y.size()));
    }
}

void
check_prod_inputs(const TqProdCode& code, const ScalarCodebook* codebook,
                  const GaussianSketch& sketch) {
    if (sketch.dim() != code.dim || code.signs.size() != code.dim) {
        throw_invalid("prod code and sketch dimensions disagree");
    }
    if (sketch.seed() != code.sketch_seed) {
        throw_invalid("prod code was sketched with seed " + std::to_string(code.sketch_seed) +
                      ", got sketch seed " + std::to_string(sketch.seed()));
    }
    if (code.base) {
        if (codebook == nullptr || codebook->bits != code.base->bits) {
            throw_invalid("prod code needs its (bits-1)-bit codebook");
        }
    }
}

}  // namespace

TqMseCode
tq_quantize_mse(std::span<const double> x, const ScalarCodebook& codebook) {
    if (codebook.dim_context != x.size()) {
        throw_invalid("tq_quantize_mse: codebook built for dim " +
                      std::to_string(codebook.dim_context) + ", vector has " +
                      std::to_string(x.size()));
    }
    const double norm = norm_of(x);
    if (!(norm > 0.0)) {
        throw_degenerate("tq_quantize_mse: input vector has zero norm");
    }
    TqMseCode code;
    code.dim = static_cast<uint32_t>(x.size());
    code.bits = codebook.bits;
    code.norm = norm;
    code.indices.resize(x.size());
    for (size_t i = 0; i < x.size(); ++i) {
        code.indices[i] = codebook.encode(x[i] / norm);
    }
    return code;
}

std::vector<double>
tq_decode_direction(const TqMseCode& code, const ScalarCodebook& codebook) {
    if (code.bits != codebook.bits) {
        throw_invalid("tq code has " + std::to_string(code.bits) + " bits, codebook has " +
                      std::to_string(codebook.bits));
    }
    std::vector<double> out(code.indices.size());
    for (size_t i = 0; i < out.size(); ++i) {
        out[i] = codebook.centroids[code.indices[i]];
    }
    return out;
}

std::vector<double>
tq_reconstruct(const TqMseCode& code, const ScalarCodebook& codebook) {
    auto out = tq_decode_direction(code, codebook);
    for (auto& v : out) {
        v *= code.norm;
    }
    return out;
}

TqProdCode
tq_quantize_prod(std::span<const double> x, unsigned bits, const ScalarCodebook* codebook,
                 const GaussianSketch& sketch) {
    if (bits < 1 || bits > 8) {
        throw_invalid("tq_quantize_prod: bits must be in [1, 8]");
    }
    if (bits > 1 && (codebook == nullptr || codebook->bits != bits - 1)) {
        throw_invalid("tq_quantize_prod: needs a codebook with bits - 1 = " +
                      std::to_string(bits - 1) + " bits");
    }
    if (sketch.dim() != x.size()) {
        throw_invalid("tq_quantize_prod: sketch dimension does not match the vector");
    }
    const double norm = norm_of(x);
    if (!(norm > 0.0)) {
        throw_degenerate("tq_quantize_prod: input vector has zero norm");
    }

    TqProdCode code;
    code.dim = static_cast<uint32_t>(x.size());
    code.bits = static_cast<uint8_t>(bits);
    code.norm = norm;
    code.sketch_seed = sketch.seed();

    std::vector<double> residual(x.size());
    for (size_t i = 0; i < x.size(); ++i) {
        residual[i] = x[i] / norm;
    }
    if (bits > 1) {
        code.base = tq_quantize_mse(x, *codebook);
        code.base->norm = norm;
        for (size_t i = 0; i < x.size(); ++i) {
            residual[i] -= codebook->centroids[code.base->indices[i]];
        }
    }
    code.residual_norm = norm_of(residual);
    const auto projected = sketch.apply(residual);
    code.signs.resize(x.size());
    for (size_t i = 0; i < x.size(); ++i) {
        code.signs[i] = projected[i] >= 0.0 ? int8_t{1} : int8_t{-1};
    }
    return code;
}

double
tq_estimate_ip_mse(const TqMseCode& code, const ScalarCodebook& codebook, const QueryContext& q) {
    check_query(code.dim, q, "tq_estimate_ip_mse");
    if (code.bits != codebook.bits) {
        throw_invalid("tq_estimate_ip_mse: code/codebook bits mismatch");
    }
    double dot = 0.0;
    for (size_t i = 0; i < q.y.size(); ++i) {
        dot += codebook.centroids[code.indices[i]] * q.y[i];
    }
    return code.norm * dot;
}

double
tq_estimate_ip_prod(const TqProdCode& code, const ScalarCodebook* codebook,
                    const GaussianSketch& sketch, const QueryContext& q) {
    check_query(code.dim, q, "tq_estimate_ip_prod");
    check_prod_inputs(code, codebook, sketch);
    if (!q.sketch_y) {
        throw_invalid("tq_estimate_ip_prod: query context has no sketch projection");
    }
    if (q.sketch_seed != code.sketch_seed) {
        throw_invalid("tq_estimate_ip_prod: query was sketched with a different seed");
    }
    double base = 0.0;
    if (code.base) {
        for (size_t i = 0; i < q.y.size(); ++i) {
            base += codebook->centroids[code.base->indices[i]] * q.y[i];
        }
    }
    double corr = 0.0;
    const auto& sy = *q.sketch_y;
    for (size_t i = 0; i < sy.size(); ++i) {
        corr += static_cast<double>(code.signs[i]) * sy[i];
    }
    const double scale = SQRT_HALF_PI * code.norm * code.residual_norm / static_cast<double>(code.dim);
    return code.norm * base + scale * corr;
}

std::vector<double>
tq_reconstruct_prod(const TqProdCode& code, const ScalarCodebook* codebook,
                    const GaussianSketch& sketch) {
    check_prod_inputs(code, codebook, sketch);
    std::vector<double> out(code.dim, 0.0);
    if (code.base) {
        out = tq_decode_direction(*code.base, *codebook);
    }
    std::vector<double> signs(code.signs.begin(), code.signs.end());
    const auto back = sketch.apply_transpose(signs);
    const double scale = SQRT_HALF_PI * code.residual_norm / static_cast<double>(code.dim);
    for (size_t i = 0; i < out.size(); ++i) {
        out[i] = code.norm * (out[i] + scale * back[i]);
    }
    return out;
}

// ---------------------------------------------------------------- files

void
save_tq_mse_codes(std::ostream& out, std::span<const TqMseCode> codes, uint32_t dim, uint8_t bits) {
    ByteWriter w(out);
    w.magic("TQM1");
    w.u32(dim);
    w.u8(bits);
    w.u64(codes.size());
    for (const auto& c : codes) {
        if (c.dim != dim || c.bits != bits || c.indices.size() != dim) {
            throw_invalid("save_tq_mse_codes: code shape does not match the file header");
        }
        w.f32(static_cast<float>(c.norm));
        w.bytes(pack_fields(c.indices, bits));
    }
    w.check("TQM1 codes");
}

std::vector<TqMseCode>
load_tq_mse_codes(std::istream& in) {
    ByteReader r(in);
    r.expect_magic("TQM1");
    const uint32_t dim = r.u32("dim");
    const uint8_t bits = r.u8("bits");
    const uint64_t n = r.u64("count");
    if (dim == 0 || bits < 1 || bits > 8) {
        throw_format("TQM1 header has invalid dim/bits");
    }
    std::vector<uint8_t> packed(packed_bytes(dim, bits));
    std::vector<TqMseCode> codes;
    for (uint64_t k = 0; k < n; ++k) {
        TqMseCode c;
        c.dim = dim;
        c.bits = bits;
        c.norm = r.f32("norm");
        r.bytes(packed, "indices");
        c.indices = unpack_fields(packed, dim, bits);
        codes.push_back(std::move(c));
    }
    return codes;
}

void
save_tq_prod_codes(std::ostream& out, std::span<const TqProdCode> codes, uint32_t dim,
                   uint8_t bits, uint64_t sketch_seed) {
    ByteWriter w(out);
    w.magic("TQP1");
    w.u32(dim);
    w.u8(bits);
    w.u64(codes.size());
    w.u64(sketch_seed);
    const unsigned base_bits = bits - 1U;
    for (const auto& c : codes) {
        if (c.dim != dim || c.bits != bits || c.signs.size() != dim ||
            c.sketch_seed != sketch_seed || (base_bits > 0) != c.base.has_value()) {
            throw_invalid("save_tq_prod_codes: code shape does not match the file header");
        }
        w.f32(static_cast<float>(c.norm));
        w.f32(static_cast<float>(c.residual_norm));
        if (c.base) {
            w.bytes(pack_fields(c.base->indices, base_bits));
        }
        std::vector<uint8_t> sign_bits(dim);
        for (size_t i = 0; i < dim; ++i) {
            sign_bits[i] = c.signs[i] > 0 ? 1 : 0;
        }
        w.bytes(pack_fields(sign_bits, 1));
    }
    w.check("TQP1 codes");
}

std::vector<TqProdCode>
load_tq_prod_codes(std::istream& in) {
    ByteReader r(in);
    r.expect_magic("TQP1");
    const uint32_t dim = r.u32("dim");
    const uint8_t bits = r.u8("bits");
    const uint64_t n = r.u64("count");
    const uint64_t seed = r.u64("sketch seed");
    if (dim == 0 || bits < 1 || bits > 8) {
        throw_format("TQP1 header has invalid dim/bits");
    }
    const unsigned base_bits = bits - 1U;
    std::vector<uint8_t> base_packed(packed_bytes(dim, base_bits));
    std::vector<uint8_t> sign_packed(packed_bytes(dim, 1));
    std::vector<TqProdCode> codes;
    for (uint64_t k = 0; k < n; ++k) {
        TqProdCode c;
        c.dim = dim;
        c.bits = bits;
        c.sketch_seed = seed;
        c.norm = r.f32("norm");
        c.residual_norm = r.f32("residual norm");
        if (base_bits > 0) {
            r.bytes(base_packed, "base indices");
            TqMseCode base;
            base.dim = dim;
            base.bits = static_cast<uint8_t>(base_bits);
            base.norm = c.norm;
            base.indices = unpack_fields(base_packed, dim, base_bits);
            c.base = std::move(base);
        }
        r.bytes(sign_packed, "sign bits");
        const auto sign_bits = unpack_fields(sign_packed, dim, 1);
        c.signs.resize(dim);
        for (size_t i = 0; i < dim; ++i) {
            c.signs[i] = sign_bits[i] != 0 ? int8_t{1} : int8_t{-1};
        }
        codes.push_back(std::move(c));
    }
    return codes;
}

}  // namespace rqkit
