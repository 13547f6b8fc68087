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
#include <string>
#include <vector>

namespace rqkit {

enum class Distribution : uint8_t { GAUSSIAN = 0, UNIT_SPHERE = 1 };

std::string
distribution_name(Distribution d);

Distribution
parse_distribution(const std::string& name);

/// Row-major n x dim float matrix.
struct Dataset {
    size_t n = 0;
    uint32_t dim = 0;
    std::vector<float> data;
    std::string source;

    std::span<const float>
    row(size_t i) const {
        return {data.data() + i * dim, dim};
    }

    std::vector<double>
    row_f64(size_t i) const;
};

Dataset
read_fvecs(const std::string& path);

void
write_fvecs(const std::string& path, const Dataset& ds);

/// "MATF", n (u64), dim (u32), row-major f32.
Dataset
read_matf(const std::string& path);

void
write_matf(const std::string& path, const Dataset& ds);

/// Dispatches on the leading magic: MATF files, otherwise fvecs.
Dataset
load_dataset(const std::string& path);

/// Seeded i.i.d. standard-normal rows, optionally projected to the unit sphere.
Dataset
generate_synthetic(size_t n, uint32_t dim, Distribution dist, uint64_t seed);

}  // namespace rqkit
