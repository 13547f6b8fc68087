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


#include "dataset.hpp"

#include <cmath>
#include <fstream>

#include "binary_io.hpp"
#include "error.hpp"
#include "random.hpp"

namespace rqkit {

namespace {

std::ifstream
open_in(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw_io("cannot open " + path);
    }
    return in;
}

std::ofstream
open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw_io("cannot open " + path + " for writing");
    }
    return out;
}

void
check_shape(const Dataset& ds) {
    if (ds.n == 0 || ds.dim == 0 || ds.data.size() != ds.n * ds.dim) {
        throw_invalid("dataset must be non-empty with data.size() == n * dim");
    }
}

}  // namespace

std::string
distribution_name(Distribution d) {
    return d == Distribution::GAUSSIAN ? "gaussian" : "unit-sphere";
}

Distribution
parse_distribution(const std::string& name) {
    if (name == "gaussian") {
        return Distribution::GAUSSIAN;
    }
    if (name == "unit-sphere") {
        return Distribution::UNIT_SPHERE;
    }
    throw_invalid("unknown distribution '" + name + "' (expected gaussian or unit-sphere)");
}

std::vector<double>
Dataset::row_f64(size_t i) const {
    const auto r = row(i);
    return {r.begin(), r.end()};
}

Dataset
read_fvecs(const std::string& path) {
    std::ifstream in = open_in(path);
    ByteReader r(in);
    Dataset ds;
    ds.source = "fvecs:" + path;
    if (r.at_eof()) {
        throw_format(path + ": empty fvecs file at byte offset 0");
    }
    while (!r.at_eof()) {
        const uint64_t at = r.offset();
        const int32_t dim = r.i32("fvecs record dim");
        if (dim <= 0) {
            throw_format(path + ": non-positive record dim " + std::to_string(dim) +
                         " at byte offset " + std::to_string(at));
        }
        if (ds.n == 0) {
            ds.dim = static_cast<uint32_t>(dim);
        } else if (static_cast<uint32_t>(dim) != ds.dim) {
            throw_format(path + ": record dim " + std::to_string(dim) + " differs from " +
                         std::to_string(ds.dim) + " at byte offset " + std::to_string(at));
        }
        for (int32_t j = 0; j < dim; ++j) {
            ds.data.push_back(r.f32("fvecs value"));
        }
        ++ds.n;
    }
    return ds;
}

void
write_fvecs(const std::string& path, const Dataset& ds) {
    check_shape(ds);
    std::ofstream out = open_out(path);
    ByteWriter w(out);
    for (size_t i = 0; i < ds.n; ++i) {
        w.i32(static_cast<int32_t>(ds.dim));
        for (float v : ds.row(i)) {
            w.f32(v);
        }
    }
    w.check(path);
}

Dataset
read_matf(const std::string& path) {
    std::ifstream in = open_in(path);
    ByteReader r(in);
    r.expect_magic("MATF");
    Dataset ds;
    ds.source = "matf:" + path;
    ds.n = r.u64("MATF row count");
    ds.dim = r.u32("MATF dim");
    if (ds.n == 0 || ds.dim == 0) {
        throw_format(path + ": MATF header has zero rows or dim at byte offset 4");
    }
    ds.data.resize(ds.n * ds.dim);
    for (auto& v : ds.data) {
        v = r.f32("MATF value");
    }
    if (!r.at_eof()) {
        throw_format(path + ": trailing bytes at byte offset " + std::to_string(r.offset()));
    }
    return ds;
}

void
write_matf(const std::string& path, const Dataset& ds) {
    check_shape(ds);
    std::ofstream out = open_out(path);
    ByteWriter w(out);
    w.magic("MATF");
    w.u64(ds.n);
    w.u32(ds.dim);
    for (float v : ds.data) {
        w.f32(v);
    }
    w.check(path);
}

Dataset
load_dataset(const std::string& path) {
    std::ifstream in = open_in(path);
    char magic[4] = {};
    in.read(magic, 4);
    if (in.gcount() == 4 && std::string(magic, 4) == "MATF") {
        return read_matf(path);
    }
    return read_fvecs(path);
}

Dataset
generate_synthetic(size_t n, uint32_t dim, Distribution dist, uint64_t seed) {
    if (n == 0 || dim == 0) {
        throw_invalid("generate_synthetic: n and dim must be positive");
    }
    Rng rng(mix_seed(seed, stream::DATA));
    Dataset ds;
    ds.n = n;
    ds.dim = dim;
    ds.source = "synthetic:" + distribution_name(dist) + ":seed=" + std::to_string(seed);
    ds.data.resize(n * dim);
    std::vector<double> row(dim);
    for (size_t i = 0; i < n; ++i) {
        double sq = 0.0;
        for (auto& v : row) {
            v = rng.normal();
            sq += v * v;
        }
        const double scale = dist == Distribution::UNIT_SPHERE && sq > 0.0 ? 1.0 / std::sqrt(sq) : 1.0;
        for (uint32_t j = 0; j < dim; ++j) {
            ds.data[i * dim + j] = static_cast<float>(row[j] * scale);
        }
    }
    return ds;
}

}  // namespace rqkit
