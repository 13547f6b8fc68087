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
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lloydmax.hpp"
#include "rabitq.hpp"
#include "rotation.hpp"

namespace rqkit {

struct ChannelSplit {
    uint32_t head_dim = 0;
    std::vector<uint32_t> outlier_idx;  // ascending
    std::vector<uint32_t> regular_idx;  // ascending
};

/// Picks the `count` channels with the largest L2 norm over the rows of a
/// row-major n x head_dim matrix. Ties go to the lower channel index. Column
/// norms are summed in sorted order so row permutations give identical splits.
ChannelSplit
select_outlier_channels(std::span<const float> keys, size_t rows, uint32_t head_dim,
                        uint32_t count);

ChannelSplit
make_channel_split(uint32_t head_dim, std::vector<uint32_t> outliers);

enum class MixedCodec : uint8_t { RABITQ = 0, TURBOQUANT_MSE = 1 };

/// Round-to-nearest-even float16 conversion.
uint16_t
to_half_bits(double v);

double
from_half_bits(uint16_t bits);

struct MixedCode {
    MixedCodec codec = MixedCodec::RABITQ;
    uint8_t hi_bits = 0;
    uint8_t lo_bits = 0;
    std::vector<uint8_t> hi_code;  // one entry per outlier channel
    std::vector<uint8_t> lo_code;  // one entry per regular channel
    uint16_t hi_scale = 0;         // float16 bits
    uint16_t lo_scale = 0;
};

struct MixedConfig {
    uint8_t hi_bits = 3;
    uint8_t lo_bits = 2;
    MixedCodec codec = MixedCodec::RABITQ;
    uint64_t seed = 0;
    bool rotate = true;  // false keeps sub-vectors in their native basis
    RescaleStrategy strategy = RescaleStrategy::exhaustive();
    LloydMaxOptions lloyd;
    std::string cache_dir;
};

/// Outlier-aware two-bitwidth quantizer. Each sub-vector gets its own rotation
/// (of sub-vector dimension) and is coded independently with one float16 scale.
class MixedQuantizer {
public:
    MixedQuantizer(ChannelSplit split, MixedConfig config);

    const ChannelSplit&
    split() const {
        return split_;
    }

    const MixedConfig&
    config() const {
        return config_;
    }

    MixedCode
    quantize(std::span<const double> x) const;

    std::vector<double>
    reconstruct(const MixedCode& code) const;

    /// hi codes, lo codes, hi scale, lo scale as one LSB-first bit stream.
    std::vector<uint8_t>
    serialize(const MixedCode& code) const;

    MixedCode
    deserialize(std::span<const uint8_t> bytes) const;

    size_t
    serialized_bytes() const;

private:
    struct Part {
        std::vector<uint32_t> channels;
        uint8_t bits = 0;
        std::optional<DenseRotation> rotation;
        std::shared_ptr<const ScalarCodebook> codebook;
    };

    void
    encode_part(const Part& part, std::span<const double> x, std::vector<uint8_t>& code,
                uint16_t& scale) const;

    void
    decode_part(const Part& part, std::span<const uint8_t> code, uint16_t scale,
                std::span<double> out) const;

    ChannelSplit split_;
    MixedConfig config_;
    Part hi_;
    Part lo_;
};

MixedCode
quantize_mixed(const MixedQuantizer& quantizer, std::span<const double> x);

std::vector<double>
reconstruct_mixed(const MixedQuantizer& quantizer, const MixedCode& code);

/// (|outliers| * hi + |regular| * lo + scale_bits_total) / head_dim
double
effective_bitwidth(const ChannelSplit& split, unsigned hi_bits, unsigned lo_bits,
                   unsigned scale_bits_total);

}  // namespace rqkit
