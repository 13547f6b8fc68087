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

#include <string>
#include <vector>

#include "codec.hpp"
#include "dataset.hpp"

namespace rqkit {

struct TimingResult {
    unsigned repeats = 0;
    unsigned threads = 1;
    std::vector<double> samples;  // wall seconds per full pass, rotation included
    double min_seconds = 0.0;
    double median_seconds = 0.0;
    // Per-vector section timers summed over workers, one entry per repeat.
    std::vector<double> rotation_samples;
    std::vector<double> quantize_samples;
    double rotation_seconds = 0.0;  // medians of the above
    double quantize_seconds = 0.0;
    size_t workers = 1;
    std::string hardware_note;
};

/// Times rotation + quantization of every row. Codec setup (rotation sampling,
/// codebook, sketch) and I/O are outside the timed region; repeats run back to back.
TimingResult
bench_quantize(const Dataset& data, const Codec& codec, unsigned repeats, unsigned threads);

std::string
hardware_note();

}  // namespace rqkit
