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

#include <Eigen/Core>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace rqkit {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Random orthogonal transform, drawn as the Q factor of a seeded Gaussian
/// matrix with the diagonal of R forced positive (Haar distributed).
class DenseRotation {
public:
    static DenseRotation
    sample(uint32_t dim, uint64_t seed);

    /// Wraps an explicit matrix (identity in tests, mostly). Such a rotation has
    /// no seed and cannot be written to a sidecar file.
    static DenseRotation
    from_matrix(RowMatrix matrix);

    uint32_t
    dim() const {
        return static_cast<uint32_t>(matrix_.rows());
    }

    uint64_t
    seed() const {
        return seed_;
    }

    bool
    seeded() const {
        return seeded_;
    }

    const RowMatrix&
    matrix() const {
        return matrix_;
    }

    std::vector<double>
    apply(std::span<const double> x) const;

    void
    apply_into(std::span<const double> x, std::span<double> out) const;

    /// matrix^T * x
    std::vector<double>
    apply_inverse(std::span<const double> x) const;

private:
    RowMatrix matrix_;
    uint64_t seed_ = 0;
    bool seeded_ = false;
};

/// Randomized Hadamard transform: `rounds` alternations of a random sign flip
/// and an orthonormal Walsh-Hadamard transform over the zero-padded input.
class FastRotation {
public:
    static constexpr uint32_t DEFAULT_ROUNDS = 3;

    static FastRotation
    sample(uint32_t dim, uint64_t seed, uint32_t rounds = DEFAULT_ROUNDS);

    /// `signs` holds rounds * padded_dim entries in {-1,+1}.
    static FastRotation
    from_signs(uint32_t dim, uint32_t rounds, std::vector<int8_t> signs);

    uint32_t
    dim() const {
        return dim_;
    }

    uint32_t
    padded_dim() const {
        return padded_dim_;
    }

    uint32_t
    rounds() const {
        return rounds_;
    }

    uint64_t
    seed() const {
        return seed_;
    }

    bool
    seeded() const {
        return seeded_;
    }

    const std::vector<int8_t>&
    sign_flips() const {
        return signs_;
    }

    std::vector<double>
    apply(std::span<const double> x) const;

    void
    apply_into(std::span<const double> x, std::span<double> out) const;

private:
    uint32_t dim_ = 0;
    uint32_t padded_dim_ = 0;
    uint32_t rounds_ = 0;
    uint64_t seed_ = 0;
    bool seeded_ = false;
    std::vector<int8_t> signs_;
};

/// The D x D i.i.d. standard normal matrix used by the one-bit residual sketch.
class GaussianSketch {
public:
    static GaussianSketch
    sample(uint32_t dim, uint64_t seed);

    static GaussianSketch
    from_matrix(RowMatrix matrix, uint64_t seed);

    uint32_t
    dim() const {
        return static_cast<uint32_t>(entries_.rows());
    }

    uint64_t
    seed() const {
        return seed_;
    }

    const RowMatrix&
    entries() const {
        return entries_;
    }

    // S * v
    std::vector<double>
    apply(std::span<const double> v) const;

    // S^T * v
    std::vector<double>
    apply_transpose(std::span<const double> v) const;

private:
    RowMatrix entries_;
    uint64_t seed_ = 0;
};

enum class RotationKind : uint8_t { DENSE = 0, FAST = 1 };

/// Either rotation flavour behind one interface. `output_dim()` is the working
/// dimension of every downstream quantizer (the padded size on the fast path).
class Rotation {
public:
    Rotation(DenseRotation dense) : impl_(std::move(dense)) {  // NOLINT
    }
    Rotation(FastRotation fast) : impl_(std::move(fast)) {  // NOLINT
    }

    static Rotation
    sample(RotationKind kind, uint32_t dim, uint64_t seed,
           uint32_t rounds = FastRotation::DEFAULT_ROUNDS);

    static Rotation
    identity(uint32_t dim);

    RotationKind
    kind() const {
        return impl_.index() == 0 ? RotationKind::DENSE : RotationKind::FAST;
    }

    uint32_t
    input_dim() const;

    uint32_t
    output_dim() const;

    uint64_t
    seed() const;

    std::vector<double>
    apply(std::span<const double> x) const;

    void
    apply_into(std::span<const double> x, std::span<double> out) const;

    const DenseRotation*
    dense() const {
        return std::get_if<DenseRotation>(&impl_);
    }

    const FastRotation*
    fast() const {
        return std::get_if<FastRotation>(&impl_);
    }

    // "ROT1" sidecar: magic, kind u8, dim u32, seed u64, rounds u32 (fast only).
    void
    save(std::ostream& out) const;

    void
    save(const std::string& path) const;

    static Rotation
    load(std::istream& in);

    static Rotation
    load(const std::string& path);

private:
    std::variant<DenseRotation, FastRotation> impl_;
};

/// In-place unnormalized Walsh-Hadamard butterfly; length must be a power of two.
void
fwht_inplace(std::span<double> data);

uint32_t
next_power_of_two(uint32_t n);

}  // namespace rqkit
