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


#include "bench.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <thread>

#include "error.hpp"
#include "eval.hpp"
#include "parallel.hpp"

namespace rqkit {

namespace {

using Clock = std::chrono::steady_clock;

double
seconds(Clock::duration d) {
    return std::chrono::duration<double>(d).count();
}

double
median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return sorted_quantile(v, 0.5);
}

}  // namespace

std::string
hardware_note() {
    std::string model = "unknown cpu";
    std::ifstream info("/proc/cpuinfo");
    std::string line;
    while (std::getline(info, line)) {
        if (line.rfind("model name", 0) == 0) {
            const auto colon = line.find(':');
            if (colon != std::string::npos) {
                model = line.substr(colon + 1);
                model.erase(0, model.find_first_not_of(' '));
            }
            break;
        }
    }
    return model + "; " + std::to_string(std::thread::hardware_concurrency()) +
           " hardware threads";
}

TimingResult
bench_quantize(const Dataset& data, const Codec& codec, unsigned repeats, unsigned threads) {
    if (repeats < 1) {
        throw_invalid("bench_quantize: repeats must be >= 1");
    }
    if (data.dim != codec.input_dim()) {
        throw_invalid("bench_quantize: dataset dim does not match the codec");
    }
    threads = std::max(1U, threads);
    TimingResult result;
    result.repeats = repeats;
    result.threads = threads;
    result.hardware_note = hardware_note();

    const size_t workers = std::min<size_t>(threads, data.n);
    const size_t block = (data.n + workers - 1) / workers;
    result.workers = workers;
    auto& rot_samples = result.rotation_samples;
    auto& quant_samples = result.quantize_samples;
    for (unsigned rep = 0; rep < repeats; ++rep) {
        std::vector<Clock::duration> rot(workers, Clock::duration::zero());
        std::vector<Clock::duration> quant(workers, Clock::duration::zero());
        const auto start = Clock::now();
        parallel_for(workers, threads, [&](size_t w) {
            std::vector<double> x(data.dim);
            std::vector<double> xr(codec.code_dim());
            const size_t end = std::min(data.n, (w + 1) * block);
            for (size_t i = w * block; i < end; ++i) {
                const auto r = data.row(i);
                std::copy(r.begin(), r.end(), x.begin());
                const auto t0 = Clock::now();
                codec.rotation().apply_into(x, xr);
                const auto t1 = Clock::now();
                EncodedVector code = codec.encode_rotated(xr);
                const auto t2 = Clock::now();
                rot[w] += t1 - t0;
                quant[w] += t2 - t1;
                (void)code;
            }
        });
        result.samples.push_back(seconds(Clock::now() - start));
        Clock::duration rs = Clock::duration::zero();
        Clock::duration qs = Clock::duration::zero();
        for (size_t w = 0; w < workers; ++w) {
            rs += rot[w];
            qs += quant[w];
        }
        rot_samples.push_back(seconds(rs));
        quant_samples.push_back(seconds(qs));
    }
    result.min_seconds = *std::min_element(result.samples.begin(), result.samples.end());
    result.median_seconds = median_of(result.samples);
    result.rotation_seconds = median_of(rot_samples);
    result.quantize_seconds = median_of(quant_samples);
    return result;
}

}  // namespace rqkit
