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
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "lloydmax.hpp"
#include "query.hpp"
#include "rabitq.hpp"
#include "rotation.hpp"
#include "turboquant.hpp"

namespace rqkit {

enum class Method : uint8_t { RABITQ_PROD = 0, RABITQ_MSE = 1, TQ_PROD = 2, TQ_MSE = 3 };

std::string
method_name(Method m);

/// Accepts rabitq-prod, rabitq-mse, tq-prod, tq-mse.
Method
parse_method(const std::string& name);

std::string
rotation_name(RotationKind k);

RotationKind
parse_rotation(const std::string& name);

struct CodecConfig {
    Method method = Method::RABITQ_PROD;
    unsigned bits = 4;
    RotationKind rotation = RotationKind::DENSE;
    uint32_t rounds = FastRotation::DEFAULT_ROUNDS;
    RescaleStrategy strategy = RescaleStrategy::exhaustive();
    uint64_t seed = 0;  // rotation and sketch are derived from it on separate streams
    LloydMaxOptions lloyd;
    std::string cache_dir;
};

using EncodedVector = std::variant<RabitqCode, TqMseCode, TqProdCode>;

/// Rotation, sketch and codebook bundled for one method at one bit-width.
class Codec {
public:
    Codec(const CodecConfig& config, uint32_t input_dim);

    const CodecConfig&
    config() const {
        return config_;
    }

    const Rotation&
    rotation() const {
        return rotation_;
    }

    uint32_t
    input_dim() const {
        return rotation_.input_dim();
    }

    uint32_t
    code_dim() const {
        return rotation_.output_dim();
    }

    const ScalarCodebook*
    codebook() const {
        return codebook_.get();
    }

    const GaussianSketch*
    sketch() const {
        return sketch_ ? &*sketch_ : nullptr;
    }

    EncodedVector
    encode(std::span<const double> x) const;

    EncodedVector
    encode_rotated(std::span<const double> x_rotated) const;

    QueryContext
    prepare(std::span<const double> y) const;

    double
    estimate(const EncodedVector& code, const QueryContext& q) const;

    /// Reconstruction in the rotated basis.
    std::vector<double>
    reconstruct_rotated(const EncodedVector& code) const;

private:
    CodecConfig config_;
    Rotation rotation_;
    std::optional<GaussianSketch> sketch_;
    std::shared_ptr<const ScalarCodebook> codebook_;
};

}  // namespace rqkit
