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


#include <sstream>

#include "doctest.h"
#include "query.hpp"
#include "rotation.hpp"
#include "test_helpers.hpp"

using namespace rqkit;
using namespace rqkit::test;

namespace {

double
max_orthogonality_error(const RowMatrix& m) {
    const RowMatrix prod = m * m.transpose();
    return (prod - RowMatrix::Identity(m.rows(), m.cols())).cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("dense rotation in one dimension is a sign") {
    const auto r = DenseRotation::sample(1, 7);
    const double v = r.matrix()(0, 0);
    CHECK((v == 1.0 || v == -1.0));
}

TEST_CASE("dense rotation is orthogonal and deterministic") {
    const auto a = DenseRotation::sample(4, 42);
    const auto b = DenseRotation::sample(4, 42);
    CHECK(max_orthogonality_error(a.matrix()) <= 1e-5);
    CHECK(a.matrix() == b.matrix());
    CHECK(DenseRotation::sample(4, 43).matrix() != a.matrix());
    CHECK(max_orthogonality_error(DenseRotation::sample(200, 1).matrix()) <= 1e-5);
    CHECK(error_type_of([] { DenseRotation::sample(0, 1); }) == ErrorType::INVALID_ARGUMENT);
}

TEST_CASE("dense rotation applies matrix-vector product") {
    const auto id = Rotation::identity(3);
    const std::vector<double> x = {1, 2, 3};
    CHECK(id.apply(x) == x);

    const auto r = DenseRotation::sample(6, 9);
    std::vector<double> e1(6, 0.0);
    e1[0] = 1.0;
    const auto col = r.apply(e1);
    for (int i = 0; i < 6; ++i) {
        CHECK(col[i] == r.matrix()(i, 0));
    }
    Rng rng(1);
    auto v = random_vector(rng, 6);
    const double n = norm(v);
    for (auto& c : v) {
        c *= 5.0 / n;
    }
    CHECK(norm(r.apply(v)) == doctest::Approx(5.0).epsilon(1e-5));
    const auto back = r.apply_inverse(r.apply(v));
    for (int i = 0; i < 6; ++i) {
        CHECK(back[i] == doctest::Approx(v[i]).epsilon(1e-12));
    }
    CHECK(error_type_of([&] { r.apply(std::vector<double>(5, 1.0)); }) ==
          ErrorType::INVALID_ARGUMENT);
}

TEST_CASE("dense rotation preserves inner products") {
    const auto r = DenseRotation::sample(64, 3);
    Rng rng(2);
    for (int t = 0; t < 20; ++t) {
        const auto x = random_vector(rng, 64);
        const auto y = random_vector(rng, 64);
        CHECK(std::abs(dot(r.apply(x), r.apply(y)) - dot(x, y)) <= 1e-4 * norm(x) * norm(y));
    }
}

TEST_CASE("fast rotation hand example") {
    auto f = FastRotation::from_signs(4, 1, {1, 1, 1, 1});
    const auto out = f.apply(std::vector<double>{1, 0, 0, 0});
    REQUIRE(out.size() == 4);
    for (double v : out) {
        CHECK(v == doctest::Approx(0.5).epsilon(1e-15));
    }
}

TEST_CASE("fast rotation pads and preserves norm") {
    const auto f = FastRotation::sample(3, 5);
    CHECK(f.padded_dim() == 4);
    CHECK(f.rounds() == 3);
    const std::vector<double> x = {1.0, -2.0, 0.5};
    CHECK(norm(f.apply(x)) == doctest::Approx(norm(x)).epsilon(1e-5));
    const auto g = FastRotation::sample(200, 5);
    CHECK(g.padded_dim() == 256);
    Rng rng(4);
    const auto v = random_vector(rng, 200);
    CHECK(norm(g.apply(v)) == doctest::Approx(norm(v)).epsilon(1e-5));
    CHECK(g.apply(v) == FastRotation::sample(200, 5).apply(v));
    CHECK(error_type_of([] { FastRotation::sample(4, 1, 0); }) == ErrorType::INVALID_ARGUMENT);
    CHECK(error_type_of([&] { g.apply(std::vector<double>(100, 0.0)); }) ==
          ErrorType::INVALID_ARGUMENT);
}

TEST_CASE("gaussian sketch determinism and moments") {
    CHECK(GaussianSketch::sample(2, 1).entries() == GaussianSketch::sample(2, 1).entries());
    const auto s = GaussianSketch::sample(512, 3);
    const auto& e = s.entries();
    const double n = static_cast<double>(e.size());
    const double mean = e.sum() / n;
    const double var = (e.array() - mean).square().sum() / n;
    CHECK(std::abs(mean) <= 4.0 / std::sqrt(n));
    CHECK(var >= 0.98);
    CHECK(var <= 1.02);
    CHECK(error_type_of([] { GaussianSketch::sample(0, 1); }) == ErrorType::INVALID_ARGUMENT);
}

TEST_CASE("rotation sidecar round trip") {
    for (auto kind : {RotationKind::DENSE, RotationKind::FAST}) {
        const auto r = Rotation::sample(kind, 10, 77, 2);
        std::stringstream ss;
        r.save(ss);
        const std::string bytes = ss.str();
        CHECK(bytes.substr(0, 4) == "ROT1");
        CHECK(static_cast<uint8_t>(bytes[4]) == static_cast<uint8_t>(kind));
        CHECK(bytes.size() == (kind == RotationKind::DENSE ? 17U : 21U));
        const auto back = Rotation::load(ss);
        CHECK(back.kind() == kind);
        CHECK(back.input_dim() == 10);
        const std::vector<double> x = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
        CHECK(back.apply(x) == r.apply(x));
    }
    std::stringstream bad("ROT2xxxxxxxxxxxxx");
    CHECK(error_type_of([&] { Rotation::load(bad); }) == ErrorType::FORMAT_ERROR);
    std::stringstream shortfile(std::string("ROT1\0\4", 6));
    CHECK(error_type_of([&] { Rotation::load(shortfile); }) == ErrorType::FORMAT_ERROR);
}

TEST_CASE("prepare query") {
    const auto id = Rotation::identity(4);
    const auto q = prepare_query(id, std::vector<double>{1, 2, 3, 4});
    CHECK(q.y == std::vector<double>{1, 2, 3, 4});
    CHECK(q.coord_sum == 10.0);
    CHECK_FALSE(q.sketch_y.has_value());
    const auto z = prepare_query(id, std::vector<double>(4, 0.0));
    CHECK(z.coord_sum == 0.0);
    const auto s = GaussianSketch::from_matrix(RowMatrix::Identity(2, 2), 5);
    const auto q2 = prepare_query(Rotation::identity(2), std::vector<double>{1, -1}, &s);
    REQUIRE(q2.sketch_y.has_value());
    CHECK(*q2.sketch_y == std::vector<double>{1, -1});
    CHECK(q2.sketch_seed == 5);
    CHECK(error_type_of([&] { prepare_query(id, std::vector<double>{1, 2}); }) ==
          ErrorType::INVALID_ARGUMENT);
}
