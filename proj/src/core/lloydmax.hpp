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
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace rqkit {

// Densities are clamped at |x| = 1 - MARGINAL_EDGE_EPS, where the D = 2
// (arcsine) marginal diverges.
inline constexpr double MARGINAL_EDGE_EPS = 1e-12;

/// Density of one coordinate of a uniform point on the unit sphere in R^dim:
/// Gamma(dim/2) / (sqrt(pi) Gamma((dim-1)/2)) * (1 - x^2)^((dim-3)/2).
double
marginal_density(uint32_t dim, double x);

/// Piecewise-constant model of the coordinate marginal on a uniform grid over
/// the angle theta = asin(x), where the density cos(theta)^(dim-2) is bounded
/// for every dim >= 2. Cell masses are renormalized to sum to one. Integrals
/// over arbitrary [a, b] split partial cells exactly.
class MarginalGrid {
public:
    static constexpr uint32_t DEFAULT_CELLS = 1U << 16;

    explicit MarginalGrid(uint32_t dim, uint32_t cells = DEFAULT_CELLS);

    uint32_t
    dim() const {
        return dim_;
    }

    uint32_t
    cells() const {
        return cells_;
    }

    /// Probability mass on [a, b], a <= b within [-1, 1].
    double
    mass(double a, double b) const;

    /// First moment  integral of x f(x) over [a, b].
    double
    moment(double a, double b) const;

    /// Second moment over [a, b].
    double
    second_moment(double a, double b) const;

    /// Smallest x with CDF(x) >= p.
    double
    quantile(double p) const;

private:
    double
    integrate(double a, double b, const std::vector<double>& prefix, int order) const;

    uint32_t dim_;
    uint32_t cells_;
    double step_;                      // cell width in theta
    std::vector<double> weight_;       // normalized density per unit theta, per cell
    std::vector<double> mass_prefix_;  // cumulative integrals, size cells+1
    std::vector<double> moment_prefix_;
    std::vector<double> second_prefix_;
};

struct ScalarCodebook {
    uint32_t dim_context = 0;
    uint8_t bits = 0;
    std::vector<double> centroids;   // 2^bits, strictly increasing
    std::vector<double> boundaries;  // 2^bits - 1 midpoints
    bool converged = false;
    uint32_t iterations = 0;
    double final_movement = 0.0;

    size_t
    size() const {
        return centroids.size();
    }

    /// Nearest-centroid index; a value exactly on a boundary goes to the upper cell.
    uint8_t
    encode(double v) const;
};

struct LloydMaxOptions {
    double tol = 1e-7;
    uint32_t max_iter = 1000;
    uint32_t grid_cells = MarginalGrid::DEFAULT_CELLS;
};

/// Continuous 1-D k-means against the coordinate marginal. Starts from
/// equal-probability cells, alternates conditional means and midpoints, and
/// keeps the centroid table exactly symmetric.
ScalarCodebook
build_lloydmax_codebook(uint32_t dim, unsigned bits, const LloydMaxOptions& options = {});

/// Expected squared error of nearest-centroid coding under the marginal.
double
codebook_distortion(const ScalarCodebook& codebook, const MarginalGrid& grid);

/// Rebuilds boundaries from centroids.
void
refresh_boundaries(ScalarCodebook& codebook);

// "LMCB" cache file: magic, dim u32, bits u8, count u32, centroids f64.
void
save_codebook(std::ostream& out, const ScalarCodebook& codebook);

ScalarCodebook
load_codebook(std::istream& in);

/// Filename encodes every build parameter: lmcb_d<D>_b<B>_g<grid>_t<tol>.bin
std::string
codebook_cache_filename(uint32_t dim, unsigned bits, const LloydMaxOptions& options);

/// Process-wide build-once cache, optionally backed by `cache_dir` on disk
/// (empty string disables the disk layer). Only converged codebooks are
/// written to disk.
std::shared_ptr<const ScalarCodebook>
cached_codebook(uint32_t dim, unsigned bits, const LloydMaxOptions& options = {},
                const std::string& cache_dir = "");

}  // namespace rqkit
