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

#include "mixed_precision.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "bitpack.hpp"
#include "error.hpp"
#include "random.hpp"
#include "turboquant.hpp"

namespace rqkit {

namespace {

constexpr uint64_t HI_STREAM = 0x6869;
constexpr uint64_t LO_STREAM = 0x6c6f;

}  // namespace

uint16_t
to_half_bits(double v) {
    Eigen::half h(static_cast<float>(v));
    return Eigen::numext::bit_cast<uint16_t>(h);
}

double
from_half_bits(uint16_t bits) {
    return static_cast<double>(static_cast<float>(Eigen::numext::bit_cast<Eigen::half>(bits)));
}

ChannelSplit
make_channel_split(uint32_t head_dim, std::vector<uint32_t> outliers) {
    std::sort(outliers.begin(), outliers.end());
    if (std::adjacent_find(outliers.begin(), outliers.end()) != outliers.end()) {
        throw_invalid("outlier channel list has duplicates");
    }
    if (!outliers.empty() && outliers.back() >= head_dim) {
        throw_invalid("outlier channel index out of range");
    }
    ChannelSplit split;
    split.head_dim = head_dim;
    split.outlier_idx = std::move(outliers);
    for (uint32_t c = 0, k = 0; c < head_dim; ++c) {
        if (k < split.outlier_idx.size() && split.outlier_idx[k] == c) {
            ++k;
        } else {
            split.regular_idx.push_back(c);
        }
    }
    return split;
}

ChannelSplit
select_outlier_channels(std::span<const float> keys, size_t rows, uint32_t head_dim,
                        uint32_t count) {
    if (head_dim == 0) {
        throw_invalid("select_outlier_channels: head_dim must be positive");
    }
    if (count > head_dim) {
        throw_invalid("select_outlier_channels: count " + std::to_string(count) +
                      " exceeds head_dim " + std::to_string(head_dim));
    }
    if (rows == 0) {
        throw_invalid("select_outlier_channels: need at least one row");
    }
    if (keys.size() != rows * head_dim) {
        throw_invalid("select_outlier_channels: matrix size does not match rows * head_dim");
    }
    std::vector<double> norms(head_dim);
    std::vector<double> column(rows);
    for (uint32_t c = 0; c < head_dim; ++c) {
        for (size_t r = 0; r < rows; ++r) {
            const double v = keys[r * head_dim + c];
            column[r] = v * v;
        }
        std::sort(column.begin(), column.end());
        double s = 0.0;
        for (double v : column) {
            s += v;
        }
        norms[c] = std::sqrt(s);
    }
    std::vector<uint32_t> order(head_dim);
    std::iota(order.begin(), order.end(), 0U);
    std::stable_sort(order.begin(), order.end(),
                     [&](uint32_t a, uint32_t b) { return norms[a] > norms[b]; });
    order.resize(count);
    return make_channel_split(head_dim, std::move(order));
}

MixedQuantizer::MixedQuantizer(ChannelSplit split, MixedConfig config)
    : split_(std::move(split)), config_(std::move(config)) {
    if (config_.lo_bits < 1 || config_.hi_bits <= config_.lo_bits || config_.hi_bits > 8) {
        throw_invalid("mixed quantizer needs 1 <= lo_bits < hi_bits <= 8");
    }
    if (split_.outlier_idx.size() + split_.regular_idx.size() != split_.head_dim) {
        throw_invalid("channel split does not cover head_dim");
    }
    hi_.channels = split_.outlier_idx;
    hi_.bits = config_.hi_bits;
    lo_.channels = split_.regular_idx;
    lo_.bits = config_.lo_bits;
    for (Part* part : {&hi_, &lo_}) {
        const auto dim = static_cast<uint32_t>(part->channels.size());
        if (dim == 0) {
            continue;
        }
        if (config_.rotate) {
            const uint64_t stream = part == &hi_ ? HI_STREAM : LO_STREAM;
            part->rotation = DenseRotation::sample(dim, mix_seed(config_.seed, stream));
        }
        if (config_.codec == MixedCodec::TURBOQUANT_MSE) {
            if (dim < 2) {
                throw_invalid("turboquant sub-vectors need at least two channels");
            }
            part->codebook = cached_codebook(dim, part->bits, config_.lloyd, config_.cache_dir);
        }
    }
}

void
MixedQuantizer::encode_part(const Part& part, std::span<const double> x,
                            std::vector<uint8_t>& code, uint16_t& scale) const {
    const size_t dim = part.channels.size();
    code.assign(dim, 0);
    scale = 0;
    if (dim == 0) {
        return;
    }
    std::vector<double> sub(dim);
    double norm_sq = 0.0;
    for (size_t j = 0; j < dim; ++j) {
        sub[j] = x[part.channels[j]];
        norm_sq += sub[j] * sub[j];
    }
    if (!(norm_sq > 0.0)) {
        return;  // padding: zero scale, zero code
    }
    if (part.rotation) {
        sub = part.rotation->apply(sub);
    }
    double raw_scale = 0.0;
    if (config_.codec == MixedCodec::RABITQ) {
        auto c = rabitq_quantize(sub, part.bits, config_.strategy);
        code = std::move(c.codes);
        raw_scale = c.factor_mse;
    } else {
        auto c = tq_quantize_mse(sub, *part.codebook);
        code = std::move(c.indices);
        raw_scale = c.norm;
    }
    scale = to_half_bits(raw_scale);
    if (!std::isfinite(from_half_bits(scale))) {
        throw_invalid("sub-vector scale exceeds the float16 range");
    }
}

void
MixedQuantizer::decode_part(const Part& part, std::span<const uint8_t> code, uint16_t scale,
                            std::span<double> out) const {
    const size_t dim = part.channels.size();
    if (code.size() != dim) {
        throw_invalid("mixed code does not match the channel split");
    }
    if (dim == 0) {
        return;
    }
    const double s = from_half_bits(scale);
    std::vector<double> sub(dim, 0.0);
    if (s != 0.0) {
        if (config_.codec == MixedCodec::RABITQ) {
            const double offset = grid_offset(part.bits);
            for (size_t j = 0; j < dim; ++j) {
                sub[j] = s * (static_cast<double>(code[j]) - offset);
            }
        } else {
            for (size_t j = 0; j < dim; ++j) {
                sub[j] = s * part.codebook->centroids[code[j]];
            }
        }
        if (part.rotation) {
            sub = part.rotation->apply_inverse(sub);
        }
    }
    for (size_t j = 0; j < dim; ++j) {
        out[part.channels[j]] = sub[j];
    }
}

MixedCode
MixedQuantizer::quantize(std::span<const double> x) const {
    if (x.size() != split_.head_dim) {
        throw_invalid("quantize_mixed: vector has " + std::to_string(x.size()) +
                      " channels, split expects " + std::to_string(split_.head_dim));
    }
    MixedCode code;
    code.codec = config_.codec;
    code.hi_bits = config_.hi_bits;
    code.lo_bits = config_.lo_bits;
    encode_part(hi_, x, code.hi_code, code.hi_scale);
    encode_part(lo_, x, code.lo_code, code.lo_scale);
    return code;
}

std::vector<double>
MixedQuantizer::reconstruct(const MixedCode& code) const {
    if (code.hi_bits != config_.hi_bits || code.lo_bits != config_.lo_bits ||
        code.codec != config_.codec) {
        throw_invalid("reconstruct_mixed: code was produced by a different configuration");
    }
    std::vector<double> out(split_.head_dim, 0.0);
    decode_part(hi_, code.hi_code, code.hi_scale, out);
    decode_part(lo_, code.lo_code, code.lo_scale, out);
    return out;
}

std::vector<uint8_t>
MixedQuantizer::serialize(const MixedCode& code) const {
    if (code.hi_code.size() != hi_.channels.size() || code.lo_code.size() != lo_.channels.size()) {
        throw_invalid("mixed code does not match the channel split");
    }
    BitStreamWriter w;
    for (uint8_t v : code.hi_code) {
        w.put(v, code.hi_bits);
    }
    for (uint8_t v : code.lo_code) {
        w.put(v, code.lo_bits);
    }
    w.put(code.hi_scale, 16);
    w.put(code.lo_scale, 16);
    return w.finish();
}

MixedCode
MixedQuantizer::deserialize(std::span<const uint8_t> bytes) const {
    if (bytes.size() != serialized_bytes()) {
        throw_format("mixed code record has " + std::to_string(bytes.size()) +
                     " bytes, expected " + std::to_string(serialized_bytes()));
    }
    BitStreamReader r(bytes);
    MixedCode code;
    code.codec = config_.codec;
    code.hi_bits = config_.hi_bits;
    code.lo_bits = config_.lo_bits;
    code.hi_code.resize(hi_.channels.size());
    code.lo_code.resize(lo_.channels.size());
    for (auto& v : code.hi_code) {
        v = static_cast<uint8_t>(r.get(code.hi_bits));
    }
    for (auto& v : code.lo_code) {
        v = static_cast<uint8_t>(r.get(code.lo_bits));
    }
    code.hi_scale = static_cast<uint16_t>(r.get(16));
    code.lo_scale = static_cast<uint16_t>(r.get(16));
    return code;
}

size_t
MixedQuantizer::serialized_bytes() const {
    const size_t bits =
        hi_.channels.size() * hi_.bits + lo_.channels.size() * lo_.bits + 2 * 16;
    return (bits + 7) / 8;
}

MixedCode
quantize_mixed(const MixedQuantizer& quantizer, std::span<const double> x) {
    return quantizer.quantize(x);
}

std::vector<double>
reconstruct_mixed(const MixedQuantizer& quantizer, const MixedCode& code) {
    return quantizer.reconstruct(code);
}

double
effective_bitwidth(const ChannelSplit& split, unsigned hi_bits, unsigned lo_bits,
                   unsigned scale_bits_total) {
    if (split.head_dim == 0) {
        throw_invalid("effective_bitwidth: empty head");
    }
    const double total = static_cast<double>(split.outlier_idx.size()) * hi_bits +
                         static_cast<double>(split.regular_idx.size()) * lo_bits +
                         static_cast<double>(scale_bits_total);
    return total / static_cast<double>(split.head_dim);
}

}  // namespace rqkit
