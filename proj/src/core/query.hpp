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
#include <optional>
#include <span>
#include <vector>

#include "rotation.hpp"

namespace rqkit {

/// Per-query state shared by every code it is scored against.
struct QueryContext {
    std::vector<double> y;  // rotated query
    double coord_sum = 0.0;
    std::optional<std::vector<double>> sketch_y;  // S * y
    uint64_t sketch_seed = 0;

    uint32_t
    dim() const {
        return static_cast<uint32_t>(y.size());
    }
};

QueryContext
prepare_query(const Rotation& rotation, std::span<const double> y_raw,
              const GaussianSketch* sketch = nullptr);

/// Builds a context from an already-rotated query.
QueryContext
prepare_rotated_query(std::vector<double> y, const GaussianSketch* sketch = nullptr);

}  // namespace rqkit
