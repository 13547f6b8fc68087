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
#include <vector>

namespace rqkit {

inline size_t
plane_bytes(size_t dim) {
    return (dim + 7) / 8;
}

// Bit-plane-major layout: plane 0 holds the most significant bit of every
// code, plane bits-1 the least significant. Within a plane, coordinate i lives
// in byte i/8 at bit position i%8.
std::vector<uint8_t>
pack_bit_planes(std::span<const uint8_t> codes, unsigned bits);

std::vector<uint8_t>
unpack_bit_planes(std::span<const uint8_t> planes, size_t dim, unsigned bits);

// Contiguous LSB-first bit stream of fixed-width fields.
class BitStreamWriter {
public:
    void
    put(uint32_t value, unsigned width);

    // Pads the final partial byte with zeros.
    std::vector<uint8_t>
    finish();

    size_t
    bit_count() const {
        return bit_count_;
    }

private:
    std::vector<uint8_t> bytes_;
    size_t bit_count_ = 0;
};

class BitStreamReader {
public:
    explicit BitStreamReader(std::span<const uint8_t> bytes) : bytes_(bytes) {
    }

    uint32_t
    get(unsigned width);

private:
    std::span<const uint8_t> bytes_;
    size_t bit_pos_ = 0;
};

inline size_t
packed_bytes(size_t count, unsigned width) {
    return (count * width + 7) / 8;
}

std::vector<uint8_t>
pack_fields(std::span<const uint8_t> values, unsigned width);

std::vector<uint8_t>
unpack_fields(std::span<const uint8_t> bytes, size_t count, unsigned width);

}  // namespace rqkit
