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
#include <random>

namespace rqkit {

// Every random quantity in the library is drawn from this generator so that a
// seed reproduces the same bits on every platform.
//
//   engine   std::mt19937_64, whose output sequence is fixed by the C++ standard
//            (the 10000th output for the default seed is 9981545732273789042).
//   uniform  (engine() >> 11) * 2^-53, i.e. the 53 high bits as a double in [0,1).
//   normal   Box-Muller on u1 in (0,1], u2 in [0,1); both outputs of a pair are
//            used, cosine branch first.
//   sign     the top bit of one engine draw; set means -1.
//
// std::uniform_real_distribution and std::normal_distribution are not used
// because their algorithms are implementation-defined.
class Rng {
public:
    explicit Rng(uint64_t seed) : engine_(seed) {
    }

    uint64_t
    next_u64() {
        return engine_();
    }

    double
    uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double
    normal();

    int
    sign() {
        return (engine_() >> 63) != 0 ? -1 : 1;
    }

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

// SplitMix64 finalizer. Used to derive independent sub-seeds from a base seed.
uint64_t
mix_seed(uint64_t seed, uint64_t stream);

// Stream tags for sub-seed derivation; a base seed never feeds two consumers
// directly.
namespace stream {
inline constexpr uint64_t ROTATION = 0x726f746174696f6eULL;
inline constexpr uint64_t SKETCH = 0x736b65746368ULL;
inline constexpr uint64_t DATA = 0x64617461ULL;
inline constexpr uint64_t QUERY = 0x7175657279ULL;
inline constexpr uint64_t RESCALE = 0x7265736361ULL;
}  // namespace stream

}  // namespace rqkit
