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

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <string_view>

#include "error.hpp"

namespace rqkit {

// Little-endian writer; byte order is explicit so files are identical across hosts.
class ByteWriter {
public:
    explicit ByteWriter(std::ostream& out) : out_(out) {
    }

    void
    magic(std::string_view tag) {
        out_.write(tag.data(), static_cast<std::streamsize>(tag.size()));
    }

    void
    u8(uint8_t v) {
        out_.put(static_cast<char>(v));
    }

    void
    u32(uint32_t v) {
        le(v, 4);
    }

    void
    i32(int32_t v) {
        le(static_cast<uint32_t>(v), 4);
    }

    void
    u64(uint64_t v) {
        le(v, 8);
    }

    void
    f32(float v) {
        le(std::bit_cast<uint32_t>(v), 4);
    }

    void
    f64(double v) {
        le(std::bit_cast<uint64_t>(v), 8);
    }

    void
    bytes(std::span<const uint8_t> data) {
        out_.write(reinterpret_cast<const char*>(data.data()),
                   static_cast<std::streamsize>(data.size()));
    }

    void
    check(const std::string& what) const {
        if (!out_) {
            throw_io("failed writing " + what);
        }
    }

private:
    void
    le(uint64_t v, int width) {
        char buf[8];
        for (int i = 0; i < width; ++i) {
            buf[i] = static_cast<char>((v >> (8 * i)) & 0xFFU);
        }
        out_.write(buf, width);
    }

    std::ostream& out_;
};

// Little-endian reader that reports the byte offset of any truncation.
class ByteReader {
public:
    explicit ByteReader(std::istream& in) : in_(in) {
    }

    void
    expect_magic(std::string_view tag) {
        std::string got(tag.size(), '\0');
        raw(got.data(), got.size(), "magic");
        if (got != tag) {
            throw_format("bad magic at byte offset 0: expected '" + std::string(tag) + "'");
        }
    }

    uint8_t
    u8(const char* what) {
        return static_cast<uint8_t>(le(1, what));
    }

    uint32_t
    u32(const char* what) {
        return static_cast<uint32_t>(le(4, what));
    }

    int32_t
    i32(const char* what) {
        return static_cast<int32_t>(static_cast<uint32_t>(le(4, what)));
    }

    uint64_t
    u64(const char* what) {
        return le(8, what);
    }

    float
    f32(const char* what) {
        return std::bit_cast<float>(static_cast<uint32_t>(le(4, what)));
    }

    double
    f64(const char* what) {
        return std::bit_cast<double>(le(8, what));
    }

    void
    bytes(std::span<uint8_t> out, const char* what) {
        raw(reinterpret_cast<char*>(out.data()), out.size(), what);
    }

    uint64_t
    offset() const {
        return offset_;
    }

    bool
    at_eof() {
        return in_.peek() == std::char_traits<char>::eof();
    }

private:
    void
    raw(char* dst, size_t n, const char* what) {
        in_.read(dst, static_cast<std::streamsize>(n));
        if (static_cast<size_t>(in_.gcount()) != n) {
            throw_format(std::string("truncated file reading ") + what + " at byte offset " +
                         std::to_string(offset_ + static_cast<uint64_t>(in_.gcount())));
        }
        offset_ += n;
    }

    uint64_t
    le(int width, const char* what) {
        unsigned char buf[8];
        raw(reinterpret_cast<char*>(buf), static_cast<size_t>(width), what);
        uint64_t v = 0;
        for (int i = 0; i < width; ++i) {
            v |= static_cast<uint64_t>(buf[i]) << (8 * i);
        }
        return v;
    }

    std::istream& in_;
    uint64_t offset_ = 0;
};

}  // namespace rqkit
