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

#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include "doctest.h"
#include "error.hpp"
#include "random.hpp"

namespace rqkit::test {

inline std::vector<double>
random_vector(Rng& rng, size_t dim) {
    std::vector<double> v(dim);
    for (auto& x : v) {
        x = rng.normal();
    }
    return v;
}

inline std::vector<double>
random_unit(Rng& rng, size_t dim) {
    auto v = random_vector(rng, dim);
    double n = 0.0;
    for (double x : v) {
        n += x * x;
    }
    n = std::sqrt(n);
    for (auto& x : v) {
        x /= n;
    }
    return v;
}

inline double
dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        s += a[i] * b[i];
    }
    return s;
}

inline double
norm(std::span<const double> a) {
    return std::sqrt(dot(a, a));
}

inline ErrorType
error_type_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const RqkitException& e) {
        return e.type();
    }
    FAIL("expected an RqkitException");
    return ErrorType::INTERNAL_ERROR;
}

}  // namespace rqkit::test
