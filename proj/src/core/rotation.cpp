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

#include "rotation.hpp"

#include <Eigen/QR>
#include <cmath>
#include <fstream>

#include "binary_io.hpp"
#include "error.hpp"
#include "random.hpp"

namespace rqkit {

namespace {

RowMatrix
gaussian_matrix(uint32_t dim, uint64_t seed) {
    Rng rng(seed);
    RowMatrix m(dim, dim);
    for (uint32_t r = 0; r < dim; ++r) {
        for (uint32_t c = 0; c < dim; ++c) {
            m(r, c) = rng.normal();
        }
    }
    return m;
}

void
check_dim(size_t got, size_t want, const char* what) {
    if (got != want) {
        throw_invalid(std::string(what) + ": dimension mismatch (got " + std::to_string(got) +
                      ", expected " + std::to_string(want) + ")");
    }
}

}  // namespace

uint32_t
next_power_of_two(uint32_t n) {
    uint32_t p = 1;
    while (p < n) {
        p <<= 1U;
    }
    return p;
}

void
fwht_inplace(std::span<double> data) {
    const size_t n = data.size();
    for (size_t h = 1; h < n; h *= 2) {
        for (size_t i = 0; i < n; i += h * 2) {
            for (size_t j = i; j < i + h; ++j) {
                double a = data[j];
                double b = data[j + h];
                data[j] = a + b;
                data[j + h] = a - b;
            }
        }
    }
}

// ---------------------------------------------------------------- dense

DenseRotation
DenseRotation::sample(uint32_t dim, uint64_t seed) {
    if (dim == 0) {
        throw_invalid("rotation dimension must be positive");
    }
    Eigen::MatrixXd g = gaussian_matrix(dim, mix_seed(seed, stream::ROTATION));
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    Eigen::MatrixXd q = qr.householderQ();
    const auto& packed = qr.matrixQR();
    for (uint32_t j = 0; j < dim; ++j) {
        if (packed(j, j) < 0.0) {
            q.col(j) = -q.col(j);
        }
    }
    DenseRotation rot;
    rot.matrix_ = q;
    rot.seed_ = seed;
    rot.seeded_ = true;
    return rot;
}

DenseRotation
DenseRotation::from_matrix(RowMatrix matrix) {
    if (matrix.rows() == 0 || matrix.rows() != matrix.cols()) {
        throw_invalid("rotation matrix must be square and non-empty");
    }
    DenseRotation rot;
    rot.matrix_ = std::move(matrix);
    return rot;
}

std::vector<double>
DenseRotation::apply(std::span<const double> x) const {
    std::vector<double> out(dim());
    apply_into(x, out);
    return out;
}

void
DenseRotation::apply_into(std::span<const double> x, std::span<double> out) const {
    check_dim(x.size(), dim(), "apply_rotation");
    check_dim(out.size(), dim(), "apply_rotation output");
    Eigen::Map<const Eigen::VectorXd> in(x.data(), static_cast<Eigen::Index>(x.size()));
    Eigen::Map<Eigen::VectorXd> dst(out.data(), static_cast<Eigen::Index>(out.size()));
    dst.noalias() = matrix_ * in;
}

std::vector<double>
DenseRotation::apply_inverse(std::span<const double> x) const {
    check_dim(x.size(), dim(), "apply_inverse_rotation");
    std::vector<double> out(dim());
    Eigen::Map<const Eigen::VectorXd> in(x.data(), static_cast<Eigen::Index>(x.size()));
    Eigen::Map<Eigen::VectorXd>(out.data(), static_cast<Eigen::Index>(out.size())).noalias() =
        matrix_.transpose() * in;
    return out;
}

// ---------------------------------------------------------------- fast

FastRotation
FastRotation::sample(uint32_t dim, uint64_t seed, uint32_t rounds) {
    if (dim == 0) {
        throw_invalid("rotation dimension must be positive");
    }
    if (rounds == 0) {
        throw_invalid("fast rotation needs at least one round");
    }
    const uint32_t padded = next_power_of_two(dim);
    Rng rng(mix_seed(seed, stream::ROTATION));
    std::vector<int8_t> signs(static_cast<size_t>(rounds) * padded);
    for (auto& s : signs) {
        s = static_cast<int8_t>(rng.sign());
    }
    FastRotation rot = from_signs(dim, rounds, std::move(signs));
    rot.seed_ = seed;
    rot.seeded_ = true;
    return rot;
}

FastRotation
FastRotation::from_signs(uint32_t dim, uint32_t rounds, std::vector<int8_t> signs) {
    if (dim == 0) {
        throw_invalid("rotation dimension must be positive");
    }
    if (rounds == 0) {
        throw_invalid("fast rotation needs at least one round");
    }
    const uint32_t padded = next_power_of_two(dim);
    if (signs.size() != static_cast<size_t>(rounds) * padded) {
        throw_invalid("sign flip table must hold rounds * padded_dim entries");
    }
    for (int8_t s : signs) {
        if (s != 1 && s != -1) {
            throw_invalid("sign flips must be +1 or -1");
        }
    }
    FastRotation rot;
    rot.dim_ = dim;
    rot.padded_dim_ = padded;
    rot.rounds_ = rounds;
    rot.signs_ = std::move(signs);
    return rot;
}

std::vector<double>
FastRotation::apply(std::span<const double> x) const {
    std::vector<double> out(padded_dim_);
    apply_into(x, out);
    return out;
}

void
FastRotation::apply_into(std::span<const double> x, std::span<double> out) const {
    check_dim(x.size(), dim_, "apply_fast_rotation");
    check_dim(out.size(), padded_dim_, "apply_fast_rotation output");
    std::copy(x.begin(), x.end(), out.begin());
    std::fill(out.begin() + dim_, out.end(), 0.0);
    const double scale = 1.0 / std::sqrt(static_cast<double>(padded_dim_));
    for (uint32_t r = 0; r < rounds_; ++r) {
        const int8_t* flips = signs_.data() + static_cast<size_t>(r) * padded_dim_;
        for (uint32_t i = 0; i < padded_dim_; ++i) {
            out[i] *= flips[i];
        }
        fwht_inplace(out);
        for (auto& v : out) {
            v *= scale;
        }
    }
}

// ---------------------------------------------------------------- sketch

GaussianSketch
GaussianSketch::sample(uint32_t dim, uint64_t seed) {
    if (dim == 0) {
        throw_invalid("sketch dimension must be positive");
    }
    GaussianSketch s;
    s.entries_ = gaussian_matrix(dim, mix_seed(seed, stream::SKETCH));
    s.seed_ = seed;
    return s;
}

GaussianSketch
GaussianSketch::from_matrix(RowMatrix matrix, uint64_t seed) {
    if (matrix.rows() == 0 || matrix.rows() != matrix.cols()) {
        throw_invalid("sketch matrix must be square and non-empty");
    }
    GaussianSketch s;
    s.entries_ = std::move(matrix);
    s.seed_ = seed;
    return s;
}

std::vector<double>
GaussianSketch::apply(std::span<const double> v) const {
    check_dim(v.size(), dim(), "sketch");
    std::vector<double> out(dim());
    Eigen::Map<const Eigen::VectorXd> in(v.data(), static_cast<Eigen::Index>(v.size()));
    Eigen::Map<Eigen::VectorXd>(out.data(), static_cast<Eigen::Index>(out.size())).noalias() =
        entries_ * in;
    return out;
}

std::vector<double>
GaussianSketch::apply_transpose(std::span<const double> v) const {
    check_dim(v.size(), dim(), "sketch transpose");
    std::vector<double> out(dim());
    Eigen::Map<const Eigen::VectorXd> in(v.data(), static_cast<Eigen::Index>(v.size()));
    Eigen::Map<Eigen::VectorXd>(out.data(), static_cast<Eigen::Index>(out.size())).noalias() =
        entries_.transpose() * in;
    return out;
}

// ---------------------------------------------------------------- rotation

Rotation
Rotation::sample(RotationKind kind, uint32_t dim, uint64_t seed, uint32_t rounds) {
    if (kind == RotationKind::DENSE) {
        return DenseRotation::sample(dim, seed);
    }
    return FastRotation::sample(dim, seed, rounds);
}

Rotation
Rotation::identity(uint32_t dim) {
    if (dim == 0) {
        throw_invalid("rotation dimension must be positive");
    }
    return DenseRotation::from_matrix(RowMatrix::Identity(dim, dim));
}

uint32_t
Rotation::input_dim() const {
    return std::visit([](const auto& r) { return r.dim(); }, impl_);
}

uint32_t
Rotation::output_dim() const {
    if (const auto* f = fast()) {
        return f->padded_dim();
    }
    return dense()->dim();
}

uint64_t
Rotation::seed() const {
    return std::visit([](const auto& r) { return r.seed(); }, impl_);
}

std::vector<double>
Rotation::apply(std::span<const double> x) const {
    return std::visit([&](const auto& r) { return r.apply(x); }, impl_);
}

void
Rotation::apply_into(std::span<const double> x, std::span<double> out) const {
    std::visit([&](const auto& r) { r.apply_into(x, out); }, impl_);
}

void
Rotation::save(std::ostream& out) const {
    bool seeded = std::visit([](const auto& r) { return r.seeded(); }, impl_);
    if (!seeded) {
        throw_invalid("only seeded rotations can be serialized");
    }
    ByteWriter w(out);
    w.magic("ROT1");
    w.u8(static_cast<uint8_t>(kind()));
    w.u32(input_dim());
    w.u64(seed());
    if (const auto* f = fast()) {
        w.u32(f->rounds());
    }
    w.check("rotation sidecar");
}

void
Rotation::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw_io("cannot open " + path + " for writing");
    }
    save(out);
}

Rotation
Rotation::load(std::istream& in) {
    ByteReader r(in);
    r.expect_magic("ROT1");
    uint8_t kind = r.u8("rotation kind");
    uint32_t dim = r.u32("rotation dim");
    uint64_t seed = r.u64("rotation seed");
    if (dim == 0) {
        throw_format("rotation sidecar has zero dimension");
    }
    if (kind == static_cast<uint8_t>(RotationKind::DENSE)) {
        return DenseRotation::sample(dim, seed);
    }
    if (kind == static_cast<uint8_t>(RotationKind::FAST)) {
        uint32_t rounds = r.u32("rotation rounds");
        if (rounds == 0) {
            throw_format("rotation sidecar has zero rounds");
        }
        return FastRotation::sample(dim, seed, rounds);
    }
    throw_format("unknown rotation kind " + std::to_string(kind) + " at byte offset 4");
}

Rotation
Rotation::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw_io("cannot open " + path);
    }
    return load(in);
}

}  // namespace rqkit
