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


#include "codec.hpp"

#include "error.hpp"

namespace rqkit {

std::string
method_name(Method m) {
    switch (m) {
        case Method::RABITQ_PROD:
            return "rabitq-prod";
        case Method::RABITQ_MSE:
            return "rabitq-mse";
        case Method::TQ_PROD:
            return "tq-prod";
        case Method::TQ_MSE:
            return "tq-mse";
    }
    return "unknown";
}

Method
parse_method(const std::string& name) {
    for (Method m : {Method::RABITQ_PROD, Method::RABITQ_MSE, Method::TQ_PROD, Method::TQ_MSE}) {
        if (method_name(m) == name) {
            return m;
        }
    }
    throw_invalid("unknown method '" + name + "' (expected rabitq-prod, rabitq-mse, tq-prod, tq-mse)");
}

std::string
rotation_name(RotationKind k) {
    return k == RotationKind::DENSE ? "dense" : "fast";
}

RotationKind
parse_rotation(const std::string& name) {
    if (name == "dense") {
        return RotationKind::DENSE;
    }
    if (name == "fast") {
        return RotationKind::FAST;
    }
    throw_invalid("unknown rotation '" + name + "' (expected dense or fast)");
}

Codec::Codec(const CodecConfig& config, uint32_t input_dim)
    : config_(config),
      rotation_(Rotation::sample(config.rotation, input_dim, config.seed, config.rounds)) {
    if (config_.bits < 1 || config_.bits > 8) {
        throw_invalid("bits must be in [1, 8], got " + std::to_string(config_.bits));
    }
    const uint32_t dim = rotation_.output_dim();
    if (config_.method == Method::TQ_MSE) {
        codebook_ = cached_codebook(dim, config_.bits, config_.lloyd, config_.cache_dir);
    } else if (config_.method == Method::TQ_PROD) {
        if (config_.bits > 1) {
            codebook_ = cached_codebook(dim, config_.bits - 1, config_.lloyd, config_.cache_dir);
        }
        sketch_ = GaussianSketch::sample(dim, config_.seed);
    }
}

EncodedVector
Codec::encode(std::span<const double> x) const {
    std::vector<double> xr(code_dim());
    rotation_.apply_into(x, xr);
    return encode_rotated(xr);
}

EncodedVector
Codec::encode_rotated(std::span<const double> xr) const {
    switch (config_.method) {
        case Method::RABITQ_PROD:
        case Method::RABITQ_MSE:
            return rabitq_quantize(xr, config_.bits, config_.strategy);
        case Method::TQ_MSE:
            return tq_quantize_mse(xr, *codebook_);
        case Method::TQ_PROD:
            return tq_quantize_prod(xr, config_.bits, codebook_.get(), *sketch_);
    }
    throw RqkitException(ErrorType::INTERNAL_ERROR, "unhandled method");
}

QueryContext
Codec::prepare(std::span<const double> y) const {
    return prepare_query(rotation_, y, sketch());
}

double
Codec::estimate(const EncodedVector& code, const QueryContext& q) const {
    switch (config_.method) {
        case Method::RABITQ_PROD:
            return rabitq_estimate_ip(std::get<RabitqCode>(code), q);
        case Method::RABITQ_MSE:
            return rabitq_estimate_ip_mse(std::get<RabitqCode>(code), q);
        case Method::TQ_MSE:
            return tq_estimate_ip_mse(std::get<TqMseCode>(code), *codebook_, q);
        case Method::TQ_PROD:
            return tq_estimate_ip_prod(std::get<TqProdCode>(code), codebook_.get(), *sketch_, q);
    }
    throw RqkitException(ErrorType::INTERNAL_ERROR, "unhandled method");
}

std::vector<double>
Codec::reconstruct_rotated(const EncodedVector& code) const {
    switch (config_.method) {
        case Method::RABITQ_PROD:
        case Method::RABITQ_MSE:
            return rabitq_reconstruct(std::get<RabitqCode>(code));
        case Method::TQ_MSE:
            return tq_reconstruct(std::get<TqMseCode>(code), *codebook_);
        case Method::TQ_PROD:
            return tq_reconstruct_prod(std::get<TqProdCode>(code), codebook_.get(), *sketch_);
    }
    throw RqkitException(ErrorType::INTERNAL_ERROR, "unhandled method");
}

}  // namespace rqkit
