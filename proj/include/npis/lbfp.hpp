#pragma once

// Weighted multivariate histogram and its linear blend frequency polygon
// (multilinear interpolation of bin-midpoint heights), with exact sampling.

#include <array>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

namespace npis {

inline constexpr std::size_t kMaxLbfpDim = 3;

/// Bin layout. Along each axis the midpoints are lower + (k + 0.5) h for
/// k = 0..counts-1; k = 0 and k = counts-1 are zero-height guard bins, so the
/// blend is defined (and falls to zero) up to the guard midpoints.
struct Grid {
    std::size_t dim = 1;
    double width = 1.0;
    std::array<double, kMaxLbfpDim> lower{};
    std::array<std::size_t, kMaxLbfpDim> counts{};

    /// Data bins of width h covering [-half_width, half_width]^dim, plus guards.
    static Grid covering(std::size_t dim, double half_width, double h);

    std::size_t total() const noexcept;
    std::size_t data_bins(std::size_t axis) const noexcept { return counts[axis] - 2; }
    double midpoint(std::size_t axis, std::size_t k) const noexcept {
        return lower[axis] + (static_cast<double>(k) + 0.5) * width;
    }
    /// Support of the blend: first to last guard midpoint.
    double support_lower(std::size_t axis) const noexcept { return midpoint(axis, 0); }
    double support_upper(std::size_t axis) const noexcept { return midpoint(axis, counts[axis] - 1); }
    double support_volume() const noexcept;
};

class LbfpDensity {
public:
    using CellIndex = std::array<std::size_t, kMaxLbfpDim>;

    /// Heights sum(weights in bin) / (M h^dim), normalized by (1/M) sum(weights).
    /// `points` is row-major, `grid.dim` values per point.
    static LbfpDensity build_weighted_histogram(std::span<const double> points, std::span<const double> weights,
                                                const Grid& grid);

    /// Arbitrary non-negative midpoint heights (guards included); the
    /// normalizer becomes the exact integral of the blend.
    static LbfpDensity from_heights(const Grid& grid, std::vector<double> heights);

    const Grid& grid() const noexcept { return grid_; }
    std::size_t dim() const noexcept { return grid_.dim; }
    const std::vector<double>& heights() const noexcept { return heights_; }
    double normalizer() const noexcept { return normalizer_; }

    /// Normalized density; zero outside the support box.
    double eval(std::span<const double> x) const;

    /// Exact integral over the cell whose lower corner is midpoint `cell`.
    double cell_mass(const CellIndex& cell) const;
    std::size_t cell_count() const noexcept { return cell_prefix_.size(); }
    /// Sum of all cell masses (1 up to rounding).
    double total_mass() const noexcept;

    /// Draw from |u|+1 uniforms: u[0] picks a cell by cumulative mass, the
    /// rest invert the per-axis conditionals inside the cell.
    void sample(std::span<const double> u, std::span<double> x) const;

    /// Sequential conditional inverse CDF over the whole support (|u|
    /// uniforms, axis j driven by u[j]). Continuous in u, so it keeps the
    /// structure of low-discrepancy inputs.
    void inverse_transform(std::span<const double> u, std::span<double> x) const;

    /// (1 - beta) * this + beta * uniform(support box), again an LBFP.
    LbfpDensity mixed_with_uniform(double beta) const;

    /// Plain-text dump: midpoint coordinates followed by the normalized height.
    void dump(std::ostream& out) const;

private:
    LbfpDensity(const Grid& grid, std::vector<double> heights, double normalizer);
    void prepare_sampling();
    std::size_t corner_offset(const CellIndex& cell) const noexcept;

    Grid grid_;
    std::vector<double> heights_;
    double normalizer_ = 1.0;
    std::array<std::size_t, kMaxLbfpDim> stride_{};
    std::vector<double> cell_prefix_;     // inclusive prefix of raw cell masses, row-major cells
    std::vector<double> axis0_marginal_;  // heights summed over axes 1.. (per axis-0 midpoint)
    std::vector<double> axis0_prefix_;    // inclusive prefix of axis-0 marginal cell masses
};

/// Solves int_0^t (a0 (1-s) + a1 s) ds = u (a0 + a1) / 2 for t in [0,1].
double invert_linear_segment(double a0, double a1, double u) noexcept;

} // namespace npis
