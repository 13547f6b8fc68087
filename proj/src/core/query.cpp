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

#include "query.hpp"

#include "error.hpp"

namespace rqkit {

QueryContext
prepare_query(const Rotation& rotation, std::span<const double> y_raw,
              const GaussianSketch* sketch) {
    if (y_raw.size() != rotation.input_dim()) {
        throw_invalid("prepare_query: query has " + std::to_string(y_raw.size()) +
                      " dims, rotation expects " + std::to_string(rotation.input_dim()));
    }
    return prepare_rotated_query(rotation.apply(y_raw), sketch);
}

QueryContext
prepare_rotated_query(std::vector<double> y, const GaussianSketch* sketch) {
    QueryContext q;
    q.y = std::move(y);
    for (double v : q.y) {
        q.coord_sum += v;
    }
    if (sketch != nullptr) {
        if (sketch->dim() != q.y.size()) {
            throw_invalid("prepare_query: sketch dimension does not match the rotated query");
        }
        q.sketch_y = sketch->apply(q.y);
        q.sketch_seed = sketch->seed();
    }
    return q;
}

}  // namespace rqkit
