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

#include "lloydmax.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <numbers>
#include <tuple>

#include "binary_io.hpp"
#include "error.hpp"

namespace rqkit {

namespace {

constexpr double HALF_PI = std::numbers::pi / 2.0;

// Antiderivatives of sin(theta)^order in theta.
double
antiderivative(double theta, int order) {
    switch (order) {
        case 0:
            return theta;
        case 1:
            return -std::cos(theta);
        default:
            return 0.5 * theta - 0.25 * std::sin(2.0 * theta);
    }
}

double
to_theta(double x) {
    return std::asin(std::clamp(x, -1.0, 1.0));
}

}  // namespace

double
marginal_density(uint32_t dim, double x) {
    if (dim < 2) {
        throw_invalid("marginal_density: dim must be >= 2");
    }
    if (!(std::abs(x) <= 1.0)) {
        throw_invalid("marginal_density: |x| must be <= 1");
    }
    const double d = static_cast<double>(dim);
    const double log_norm =
        std::lgamma(d / 2.0) - std::lgamma((d - 1.0) / 2.0) - 0.5 * std::log(std::numbers::pi);
    const double exponent = (d - 3.0) / 2.0;
    double ax = std::abs(x);
    if (exponent < 0.0) {
        ax = std::min(ax, 1.0 - MARGINAL_EDGE_EPS);
    }
    const double base = 1.0 - ax * ax;
    if (base <= 0.0) {
        return exponent == 0.0 ? std::exp(log_norm) : 0.0;
    }
    return std::exp(log_norm + exponent * std::log(base));
}

// ---------------------------------------------------------------- grid

MarginalGrid::MarginalGrid(uint32_t dim, uint32_t cells)
    : dim_(dim), cells_(cells), step_(std::numbers::pi / static_cast<double>(cells)) {
    if (dim < 2) {
        throw_invalid("MarginalGrid: dim must be >= 2");
    }
    if (cells < 2) {
        throw_invalid("MarginalGrid: need at least two cells");
    }
    weight_.resize(cells);
    const double power = static_cast<double>(dim) - 2.0;
    double total = 0.0;
    for (uint32_t j = 0; j < cells; ++j) {
        const double mid = -HALF_PI + (static_cast<double>(j) + 0.5) * step_;
        const double c = std::cos(mid);
        weight_[j] = power == 0.0 ? 1.0 : (c > 0.0 ? std::exp(power * std::log(c)) : 0.0);
        total += weight_[j] * step_;
    }
    for (auto& w : weight_) {
        w /= total;
    }
    mass_prefix_.assign(cells + 1, 0.0);
    moment_prefix_.assign(cells + 1, 0.0);
    second_prefix_.assign(cells + 1, 0.0);
    for (uint32_t j = 0; j < cells; ++j) {
        const double lo = -HALF_PI + static_cast<double>(j) * step_;
        const double hi = lo + step_;
        mass_prefix_[j + 1] = mass_prefix_[j] + weight_[j] * (antiderivative(hi, 0) - antiderivative(lo, 0));
        moment_prefix_[j + 1] =
            moment_prefix_[j] + weight_[j] * (antiderivative(hi, 1) - antiderivative(lo, 1));
        second_prefix_[j + 1] =
            second_prefix_[j] + weight_[j] * (antiderivative(hi, 2) - antiderivative(lo, 2));
    }
}

double
MarginalGrid::integrate(double a, double b, const std::vector<double>& prefix, int order) const {
    auto cumulative = [&](double x) {
        const double theta = to_theta(x);
        const double pos = (theta + HALF_PI) / step_;
        auto j = static_cast<int64_t>(std::floor(pos));
        j = std::clamp<int64_t>(j, 0, static_cast<int64_t>(cells_) - 1);
        const double lo = -HALF_PI + static_cast<double>(j) * step_;
        return prefix[static_cast<size_t>(j)] +
               weight_[static_cast<size_t>(j)] * (antiderivative(theta, order) - antiderivative(lo, order));
    };
    return cumulative(b) - cumulative(a);
}

double
MarginalGrid::mass(double a, double b) const {
    return integrate(a, b, mass_prefix_, 0);
}

double
MarginalGrid::moment(double a, double b) const {
    return integrate(a, b, moment_prefix_, 1);
}

double
MarginalGrid::second_moment(double a, double b) const {
    return integrate(a, b, second_prefix_, 2);
}

double
MarginalGrid::quantile(double p) const {
    p = std::clamp(p, 0.0, 1.0);
    auto it = std::upper_bound(mass_prefix_.begin(), mass_prefix_.end(), p);
    auto j = static_cast<size_t>(std::distance(mass_prefix_.begin(), it));
    j = j == 0 ? 0 : j - 1;
    if (j >= cells_) {
        return 1.0;
    }
    const double lo = -HALF_PI + static_cast<double>(j) * step_;
    double theta = lo;
    if (weight_[j] > 0.0) {
        theta += (p - mass_prefix_[j]) / weight_[j];
    }
    return std::sin(std::min(theta, lo + step_));
}

// ---------------------------------------------------------------- codebook

uint8_t
ScalarCodebook::encode(double v) const {
    auto it = std::upper_bound(boundaries.begin(), boundaries.end(), v);
    return static_cast<uint8_t>(std::distance(boundaries.begin(), it));
}

void
refresh_boundaries(ScalarCodebook& codebook) {
    codebook.boundaries.resize(codebook.centroids.size() - 1);
    for (size_t i = 0; i + 1 < codebook.centroids.size(); ++i) {
        codebook.boundaries[i] = 0.5 * (codebook.centroids[i] + codebook.centroids[i + 1]);
    }
}

ScalarCodebook
build_lloydmax_codebook(uint32_t dim, unsigned bits, const LloydMaxOptions& options) {
    if (dim < 2) {
        throw_invalid("codebook dimension must be >= 2");
    }
    if (bits < 1 || bits > 8) {
        throw_invalid("codebook bits must be in [1, 8]");
    }
    if (!(options.tol > 0.0)) {
        throw_invalid("codebook tolerance must be positive");
    }
    const MarginalGrid grid(dim, options.grid_cells);
    const size_t n = size_t{1} << bits;

    ScalarCodebook cb;
    cb.dim_context = dim;
    cb.bits = static_cast<uint8_t>(bits);
    cb.centroids.assign(n, 0.0);
    cb.boundaries.resize(n - 1);

    for (size_t i = 1; i < n; ++i) {
        cb.boundaries[i - 1] = grid.quantile(static_cast<double>(i) / static_cast<double>(n));
    }

    auto update_centroids = [&](std::vector<double>& out) {
        for (size_t i = 0; i < n; ++i) {
            const double lo = i == 0 ? -1.0 : cb.boundaries[i - 1];
            const double hi = i + 1 == n ? 1.0 : cb.boundaries[i];
            const double m = grid.mass(lo, hi);
            if (m > 0.0) {
                out[i] = grid.moment(lo, hi) / m;
            } else {
                out[i] = 0.5 * (lo + hi);
            }
        }
        for (size_t i = 0; i < n / 2; ++i) {
            const double sym = 0.5 * (out[n - 1 - i] - out[i]);
            out[i] = -sym;
            out[n - 1 - i] = sym;
        }
    };

    update_centroids(cb.centroids);
    std::vector<double> next(n);
    for (uint32_t iter = 1; iter <= options.max_iter; ++iter) {
        refresh_boundaries(cb);
        update_centroids(next);
        double movement = 0.0;
        for (size_t i = 0; i < n; ++i) {
            movement = std::max(movement, std::abs(next[i] - cb.centroids[i]));
        }
        cb.centroids.swap(next);
        cb.iterations = iter;
        cb.final_movement = movement;
        if (movement < options.tol) {
            cb.converged = true;
            break;
        }
    }
    refresh_boundaries(cb);
    return cb;
}

double
codebook_distortion(const ScalarCodebook& codebook, const MarginalGrid& grid) {
    const size_t n = codebook.centroids.size();
    double total = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const double lo = i == 0 ? -1.0 : codebook.boundaries[i - 1];
        const double hi = i + 1 == n ? 1.0 : codebook.boundaries[i];
        const double c = codebook.centroids[i];
        total += grid.second_moment(lo, hi) - 2.0 * c * grid.moment(lo, hi) + c * c * grid.mass(lo, hi);
    }
    return total;
}

void
save_codebook(std::ostream& out, const ScalarCodebook& codebook) {
    ByteWriter w(out);
    w.magic("LMCB");
    w.u32(codebook.dim_context);
    w.u8(codebook.bits);
    w.u32(static_cast<uint32_t>(codebook.centroids.size()));
    for (double c : codebook.centroids) {
        w.f64(c);
    }
    w.check("LMCB codebook");
}

ScalarCodebook
load_codebook(std::istream& in) {
    ByteReader r(in);
    r.expect_magic("LMCB");
    ScalarCodebook cb;
    cb.dim_context = r.u32("dim");
    cb.bits = r.u8("bits");
    const uint32_t count = r.u32("centroid count");
    if (cb.bits < 1 || cb.bits > 8 || count != (1U << cb.bits)) {
        throw_format("LMCB header: centroid count does not match bits");
    }
    cb.centroids.resize(count);
    for (auto& c : cb.centroids) {
        c = r.f64("centroid");
    }
    for (size_t i = 0; i + 1 < count; ++i) {
        if (!(cb.centroids[i] < cb.centroids[i + 1])) {
            throw_format("LMCB centroids are not strictly increasing");
        }
    }
    refresh_boundaries(cb);
    cb.converged = true;
    return cb;
}

std::string
codebook_cache_filename(uint32_t dim, unsigned bits, const LloydMaxOptions& options) {
    char buf[128];
    std::snprintf(buf, sizeof(buf), "lmcb_d%u_b%u_g%u_t%.3g.bin", dim, bits, options.grid_cells,
                  options.tol);
    return buf;
}

std::shared_ptr<const ScalarCodebook>
cached_codebook(uint32_t dim, unsigned bits, const LloydMaxOptions& options,
                const std::string& cache_dir) {
    struct Entry {
        std::once_flag once;
        std::shared_ptr<const ScalarCodebook> codebook;
    };
    using Key = std::tuple<uint32_t, unsigned, double, uint32_t, uint32_t, std::string>;
    static std::mutex mu;
    static std::map<Key, std::shared_ptr<Entry>> entries;

    std::shared_ptr<Entry> entry;
    {
        std::lock_guard<std::mutex> lock(mu);
        auto& slot =
            entries[Key{dim, bits, options.tol, options.max_iter, options.grid_cells, cache_dir}];
        if (!slot) {
            slot = std::make_shared<Entry>();
        }
        entry = slot;
    }
    std::call_once(entry->once, [&] {
        namespace fs = std::filesystem;
        fs::path path;
        if (!cache_dir.empty()) {
            path = fs::path(cache_dir) / codebook_cache_filename(dim, bits, options);
            std::ifstream in(path, std::ios::binary);
            if (in) {
                try {
                    auto cb = load_codebook(in);
                    if (cb.dim_context == dim && cb.bits == bits) {
                        entry->codebook = std::make_shared<const ScalarCodebook>(std::move(cb));
                        return;
                    }
                } catch (const RqkitException&) {
                    // Corrupt cache entries are rebuilt and overwritten.
                }
            }
        }
        auto cb = build_lloydmax_codebook(dim, bits, options);
        if (!cache_dir.empty() && cb.converged) {
            std::error_code ec;
            fs::create_directories(cache_dir, ec);
            // Write-then-rename so concurrent processes never see a partial file.
            fs::path tmp = path;
            tmp += ".tmp";
            {
                std::ofstream out(tmp, std::ios::binary);
                if (out) {
                    save_codebook(out, cb);
                }
            }
            fs::rename(tmp, path, ec);
        }
        entry->codebook = std::make_shared<const ScalarCodebook>(std::move(cb));
    });
    return entry->codebook;
}

}  // namespace rqkit
