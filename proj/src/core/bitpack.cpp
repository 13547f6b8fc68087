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

#include "bitpack.hpp"

#include "error.hpp"

namespace rqkit {

std::vector<uint8_t>
pack_bit_planes(std::span<const uint8_t> codes, unsigned bits) {
    const size_t stride = plane_bytes(codes.size());
    std::vector<uint8_t> out(stride * bits, 0);
    for (unsigned plane = 0; plane < bits; ++plane) {
        const unsigned shift = bits - 1 - plane;
        uint8_t* dst = out.data() + plane * stride;
        for (size_t i = 0; i < codes.size(); ++i) {
            dst[i / 8] |= static_cast<uint8_t>(((codes[i] >> shift) & 1U) << (i % 8));
        }
    }
    return out;
}

std::vector<uint8_t>
unpack_bit_planes(std::span<const uint8_t> planes, size_t dim, unsigned bits) {
    const size_t stride = plane_bytes(dim);
    if (planes.size() < stride * bits) {
        throw_format("bit-plane buffer too short");
    }
    std::vector<uint8_t> codes(dim, 0);
    for (unsigned plane = 0; plane < bits; ++plane) {
        const unsigned shift = bits - 1 - plane;
        const uint8_t* src = planes.data() + plane * stride;
        for (size_t i = 0; i < dim; ++i) {
            codes[i] |= static_cast<uint8_t>(((src[i / 8] >> (i % 8)) & 1U) << shift);
        }
    }
    return codes;
}

void
BitStreamWriter::put(uint32_t value, unsigned width) {
    for (unsigned b = 0; b < width; ++b) {
        if (bit_count_ % 8 == 0) {
            bytes_.push_back(0);
        }
        bytes_.back() |= static_cast<uint8_t>(((value >> b) & 1U) << (bit_count_ % 8));
        ++bit_count_;
    }
}

std::vector<uint8_t>
BitStreamWriter::finish() {
    std::vector<uint8_t> out;
    out.swap(bytes_);
    bit_count_ = 0;
    return out;
}

uint32_t
BitStreamReader::get(unsigned width) {
    if (bit_pos_ + width > bytes_.size() * 8) {
        throw_format("bit stream exhausted");
    }
    uint32_t value = 0;
    for (unsigned b = 0; b < width; ++b) {
        const size_t pos = bit_pos_ + b;
        value |= static_cast<uint32_t>((bytes_[pos / 8] >> (pos % 8)) & 1U) << b;
    }
    bit_pos_ += width;
    return value;
}

std::vector<uint8_t>
pack_fields(std::span<const uint8_t> values, unsigned width) {
    BitStreamWriter writer;
    for (uint8_t v : values) {
        writer.put(v, width);
    }
    auto out = writer.finish();
    out.resize(packed_bytes(values.size(), width), 0);
    return out;
}

std::vector<uint8_t>
unpack_fields(std::span<const uint8_t> bytes, size_t count, unsigned width) {
    BitStreamReader reader(bytes);
    std::vector<uint8_t> out(count);
    for (auto& v : out) {
        v = static_cast<uint8_t>(reader.get(width));
    }
    return out;
}

}  // namespace rqkit
