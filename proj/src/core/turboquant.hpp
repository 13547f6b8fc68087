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
#include <optional>
#include <span>
#include <vector>

#include "lloydmax.hpp"
#include "query.hpp"
#include "rotation.hpp"

namespace rqkit {

struct TqMseCode {
    uint32_t dim = 0;
    uint8_t bits = 0;
    std::vector<uint8_t> indices;
    double norm = 0.0;
};

/// (B-1)-bit Lloyd-Max base code plus one sign bit per coordinate of S * r,
/// where r is the residual of the normalized vector. With B == 1 there is no
/// base code and the whole normalized vector goes through the sign sketch.
struct TqProdCode {
    uint32_t dim = 0;
    uint8_t bits = 0;  // total budget per coordinate
    std::optional<TqMseCode> base;
    std::vector<int8_t> signs;  // +1 / -1, sign(0) = +1
    double norm = 0.0;
    double residual_norm = 0.0;
    uint64_t sketch_seed = 0;
};

TqMseCode
tq_quantize_mse(std::span<const double> x, const ScalarCodebook& codebook);

/// Unit-scale direction decoded through the codebook.
std::vector<double>
tq_decode_direction(const TqMseCode& code, const ScalarCodebook& codebook);

std::vector<double>
tq_reconstruct(const TqMseCode& code, const ScalarCodebook& codebook);

/// `codebook` must be the (bits-1)-bit table, or null when bits == 1.
TqProdCode
tq_quantize_prod(std::span<const double> x, unsigned bits, const ScalarCodebook* codebook,
                 const GaussianSketch& sketch);

/// norm * <x_bar, y>. Biased; this is the reconstruction-oriented variant.
double
tq_estimate_ip_mse(const TqMseCode& code, const ScalarCodebook& codebook, const QueryContext& q);

/// norm * <x_bar, y> + sqrt(pi/2) * norm * |r| / D * <signs, S y>.
double
tq_estimate_ip_prod(const TqProdCode& code, const ScalarCodebook* codebook,
                    const GaussianSketch& sketch, const QueryContext& q);

std::vector<double>
tq_reconstruct_prod(const TqProdCode& code, const ScalarCodebook* codebook,
                    const GaussianSketch& sketch);

// "TQM1": dim u32, bits u8, count u64, then per vector norm f32 and the
// indices packed LSB-first at `bits` bits each.
void
save_tq_mse_codes(std::ostream& out, std::span<const TqMseCode> codes, uint32_t dim, uint8_t bits);

std::vector<TqMseCode>
load_tq_mse_codes(std::istream& in);

// "TQP1": dim u32, bits u8, count u64, sketch seed u64, then per vector norm
// f32, residual norm f32, base indices at bits-1 bits each, and the signs
// packed 8 per byte LSB-first (bit set means +1).
void
save_tq_prod_codes(std::ostream& out, std::span<const TqProdCode> codes, uint32_t dim,
                   uint8_t bits, uint64_t sketch_seed);

std::vector<TqProdCode>
load_tq_prod_codes(std::istream& in);

}  // namespace rqkit
