#include "npis/lbfp.hpp"

#include "npis/error.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace npis {

Grid Grid::covering(std::size_t dim, double half_width, double h) {
    require(dim >= 1 && dim <= kMaxLbfpDim, ErrorCode::invalid_argument, "LBFP dimension must be 1, 2 or 3");
    require(half_width > 0.0 && h > 0.0, ErrorCode::invalid_argument, "grid half-width and bin width must be positive");
    const double ratio = 2.0 * half_width / h;
    const auto bins = static_cast<std::size_t>(std::max(1.0, std::ceil(ratio - 1e-9)));
    Grid g;
    g.dim = dim;
    g.width = h;
    for (std::size_t a = 0; a < dim; ++a) {
        g.lower[a] = -0.5 * static_cast<double>(bins) * h - h;
        g.counts[a] = bins + 2;
    }
    return g;
}

std::size_t Grid::total() const noexcept {
    std::size_t n = 1;
    for (std::size_t a = 0; a < dim; ++a) n *= counts[a];
    return n;
}

double Grid::support_volume() const noexcept {
    double v = 1.0;
    for (std::size_t a = 0; a < dim; ++a) v *= static_cast<double>(counts[a] - 1) * width;
    return v;
}

double invert_linear_segment(double a0, double a1, double u) noexcept {
    const double mass = a0 + a1;
    if (!(mass > 0.0)) return u;
    const double denom = a0 + std::sqrt(std::max(a0 * a0 + (a1 * a1 - a0 * a0) * u, 0.0));
    if (!(denom > 0.0)) return 0.0;
    return std::clamp(u * mass / denom, 0.0, 1.0);
}

namespace {

// Exact blend integral: each axis gives weight h, halved at the two end midpoints.
double blend_integral(const Grid& grid, const std::vector<double>& heights,
                      const std::array<std::size_t, kMaxLbfpDim>& stride) {
    double total = 0.0;
    for (std::size_t idx = 0; idx < heights.size(); ++idx) {
        if (heights[idx] == 0.0) continue;
        double w = 1.0;
        std::size_t rest = idx;
        for (std::size_t a = 0; a < grid.dim; ++a) {
            const std::size_t k = rest / stride[a];
            rest %= stride[a];
            w *= (k == 0 || k + 1 == grid.counts[a]) ? 0.5 * grid.width : grid.width;
        }
        total += w * heights[idx];
    }
    return total;
}

// Trapezoid weight of the collapsed axes after `first` for a flat index.
double tail_weight(const Grid& grid, const std::array<std::size_t, kMaxLbfpDim>& stride, std::size_t first,
                   std::size_t idx) {
    double w = 1.0;
    std::size_t rest = idx;
    for (std::size_t a = first; a < grid.dim; ++a) {
        const std::size_t k = rest / stride[a];
        rest %= stride[a];
        if (k == 0 || k + 1 == grid.counts[a]) w *= 0.5;
    }
    return w;
}

std::array<std::size_t, kMaxLbfpDim> strides_of(const Grid& grid) {
    std::array<std::size_t, kMaxLbfpDim> stride{};
    std::size_t s = 1;
    for (std::size_t a = grid.dim; a-- > 0;) {
        stride[a] = s;
        s *= grid.counts[a];
    }
    return stride;
}

// Picks the segment containing `target` in an inclusive prefix array and the
// residual fraction inside it.
std::pair<std::size_t, double> locate(const std::vector<double>& prefix, double u) {
    const double total = prefix.back();
    const double target = u * total;
    auto it = std::upper_bound(prefix.begin(), prefix.end(), target);
    std::size_t c;
    if (it == prefix.end()) {
        c = prefix.size() - 1;
        while (c > 0 && prefix[c] == prefix[c - 1]) --c;
    } else {
        c = static_cast<std::size_t>(it - prefix.begin());
    }
    const double before = c > 0 ? prefix[c - 1] : 0.0;
    const double mass = prefix[c] - before;
    const double frac = mass > 0.0 ? std::clamp((target - before) / mass, 0.0, 1.0) : 0.5;
    return {c, frac};
}

} // namespace

LbfpDensity::LbfpDensity(const Grid& grid, std::vector<double> heights, double normalizer)
    : grid_(grid), heights_(std::move(heights)), normalizer_(normalizer), stride_(strides_of(grid)) {
    prepare_sampling();
}

LbfpDensity LbfpDensity::build_weighted_histogram(std::span<const double> points, std::span<const double> weights,
                                                  const Grid& grid) {
    const std::size_t dim = grid.dim;
    const std::size_t m = weights.size();
    if (m == 0 || points.size() != m * dim)
        fail(ErrorCode::dimension_mismatch, "points and weights do not describe the same samples");

    const auto stride = strides_of(grid);
    std::vector<double> heights(grid.total(), 0.0);
    double weight_sum = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
        const double w = weights[j];
        if (!(w >= 0.0) || !std::isfinite(w)) fail(ErrorCode::invalid_argument, "histogram weights must be finite and non-negative");
        if (w == 0.0) continue;
        std::size_t idx = 0;
        for (std::size_t a = 0; a < dim; ++a) {
            const double x = points[j * dim + a];
            const double s = (x - grid.lower[a]) / grid.width;
            const double top = static_cast<double>(grid.counts[a] - 1);
            if (!(s >= 1.0 - 1e-12 && s <= top + 1e-12)) fail(ErrorCode::domain, "histogram point lies outside the grid box");
            const auto k = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(s, 1.0)), 1, grid.counts[a] - 2);
            idx += k * stride[a];
        }
        heights[idx] += w;
        weight_sum += w;
    }
    if (!(weight_sum > 0.0)) fail(ErrorCode::empty_estimate, "all histogram weights are zero");

    const double md = static_cast<double>(m);
    const double bin_volume = std::pow(grid.width, static_cast<double>(dim));
    for (double& h : heights) h /= md * bin_volume;
    return LbfpDensity(grid, std::move(heights), weight_sum / md);
}

LbfpDensity LbfpDensity::from_heights(const Grid& grid, std::vector<double> heights) {
    if (heights.size() != grid.total()) fail(ErrorCode::dimension_mismatch, "height array does not match the grid");
    for (double h : heights)
        if (!(h >= 0.0) || !std::isfinite(h)) fail(ErrorCode::invalid_argument, "heights must be finite and non-negative");
    const double integral = blend_integral(grid, heights, strides_of(grid));
    if (!(integral > 0.0)) fail(ErrorCode::empty_estimate, "density has zero mass");
    return LbfpDensity(grid, std::move(heights), integral);
}

std::size_t LbfpDensity::corner_offset(const CellIndex& cell) const noexcept {
    std::size_t idx = 0;
    for (std::size_t a = 0; a < grid_.dim; ++a) idx += cell[a] * stride_[a];
    return idx;
}

void LbfpDensity::prepare_sampling() {
    const std::size_t dim = grid_.dim;
    const std::size_t corners = std::size_t{1} << dim;
    const double volume = std::pow(grid_.width, static_cast<double>(dim));

    std::array<std::size_t, kMaxLbfpDim> cells{};
    std::size_t n_cells = 1;
    for (std::size_t a = 0; a < dim; ++a) {
        cells[a] = grid_.counts[a] - 1;
        n_cells *= cells[a];
    }

    cell_prefix_.resize(n_cells);
    double running = 0.0;
    CellIndex cell{};
    for (std::size_t flat = 0; flat < n_cells; ++flat) {
        std::size_t rest = flat;
        for (std::size_t a = dim; a-- > 0;) {
            cell[a] = rest % cells[a];
            rest /= cells[a];
        }
        const std::size_t base = corner_offset(cell);
        double sum = 0.0;
        for (std::size_t c = 0; c < corners; ++c) {
            std::size_t off = base;
            for (std::size_t a = 0; a < dim; ++a)
                if ((c >> a) & 1u) off += stride_[a];
            sum += heights_[off];
        }
        running += volume * sum / static_cast<double>(corners);
        cell_prefix_[flat] = running;
    }

    axis0_marginal_.assign(grid_.counts[0], 0.0);
    for (std::size_t idx = 0; idx < heights_.size(); ++idx)
        axis0_marginal_[idx / stride_[0]] += tail_weight(grid_, stride_, 1, idx % stride_[0]) * heights_[idx];
    axis0_prefix_.resize(grid_.counts[0] - 1);
    running = 0.0;
    for (std::size_t k = 0; k + 1 < grid_.counts[0]; ++k) {
        running += 0.5 * (axis0_marginal_[k] + axis0_marginal_[k + 1]);
        axis0_prefix_[k] = running;
    }
}

double LbfpDensity::eval(std::span<const double> x) const {
    const std::size_t dim = grid_.dim;
    std::array<double, kMaxLbfpDim> t{};
    CellIndex cell{};
    for (std::size_t a = 0; a < dim; ++a) {
        const double s = (x[a] - grid_.support_lower(a)) / grid_.width;
        const auto n_cells = static_cast<double>(grid_.counts[a] - 1);
        if (!(s >= 0.0 && s <= n_cells)) return 0.0;
        const double c = std::min(std::floor(s), n_cells - 1.0);
        cell[a] = static_cast<std::size_t>(c);
        t[a] = s - c;
    }
    const std::size_t base = corner_offset(cell);
    double value = 0.0;
    for (std::size_t c = 0; c < (std::size_t{1} << dim); ++c) {
        double w = 1.0;
        std::size_t off = base;
        for (std::size_t a = 0; a < dim; ++a) {
            if ((c >> a) & 1u) {
                w *= t[a];
                off += stride_[a];
            } else {
                w *= 1.0 - t[a];
            }
        }
        value += w * heights_[off];
    }
    return value / normalizer_;
}

double LbfpDensity::cell_mass(const CellIndex& cell) const {
    const std::size_t dim = grid_.dim;
    for (std::size_t a = 0; a < dim; ++a)
        if (cell[a] + 1 >= grid_.counts[a]) fail(ErrorCode::invalid_argument, "cell index out of range");
    const std::size_t base = corner_offset(cell);
    const std::size_t corners = std::size_t{1} << dim;
    double sum = 0.0;
    for (std::size_t c = 0; c < corners; ++c) {
        std::size_t off = base;
        for (std::size_t a = 0; a < dim; ++a)
            if ((c >> a) & 1u) off += stride_[a];
        sum += heights_[off];
    }
    return std::pow(grid_.width, static_cast<double>(dim)) * sum / static_cast<double>(corners) / normalizer_;
}

double LbfpDensity::total_mass() const noexcept { return cell_prefix_.back() / normalizer_; }

void LbfpDensity::sample(std::span<const double> u, std::span<double> x) const {
    const std::size_t dim = grid_.dim;
    if (u.size() < dim + 1) fail(ErrorCode::dimension_mismatch, "LBFP sampling needs dim + 1 uniforms");

    const auto [flat, unused] = locate(cell_prefix_, u[0]);
    (void)unused;
    CellIndex cell{};
    std::size_t rest = flat;
    for (std::size_t a = dim; a-- > 0;) {
        const std::size_t n = grid_.counts[a] - 1;
        cell[a] = rest % n;
        rest /= n;
    }

    // Corner weights with axis `a` on bit (dim - 1 - a): axis 0 is the top bit,
    // so collapsing axis 0 halves the array from the top.
    std::array<double, std::size_t{1} << kMaxLbfpDim> w{};
    const std::size_t base = corner_offset(cell);
    std::size_t size = std::size_t{1} << dim;
    for (std::size_t c = 0; c < size; ++c) {
        std::size_t off = base;
        for (std::size_t a = 0; a < dim; ++a)
            if ((c >> (dim - 1 - a)) & 1u) off += stride_[a];
        w[c] = heights_[off];
    }
    for (std::size_t a = 0; a < dim; ++a) {
        const std::size_t half = size / 2;
        double a0 = 0.0, a1 = 0.0;
        for (std::size_t i = 0; i < half; ++i) {
            a0 += w[i];
            a1 += w[i + half];
        }
        const double t = invert_linear_segment(a0, a1, u[a + 1]);
        x[a] = grid_.midpoint(a, cell[a]) + t * grid_.width;
        for (std::size_t i = 0; i < half; ++i) w[i] = (1.0 - t) * w[i] + t * w[i + half];
        size = half;
    }
}

void LbfpDensity::inverse_transform(std::span<const double> u, std::span<double> x) const {
    const std::size_t dim = grid_.dim;
    if (u.size() < dim) fail(ErrorCode::dimension_mismatch, "LBFP inverse transform needs dim uniforms");

    auto [c0, f0] = locate(axis0_prefix_, u[0]);
    double t = invert_linear_segment(axis0_marginal_[c0], axis0_marginal_[c0 + 1], f0);
    x[0] = grid_.midpoint(0, c0) + t * grid_.width;
    if (dim == 1) return;

    // Collapse axis 0 at the drawn position and repeat on the remaining axes.
    thread_local std::vector<double> slice;
    thread_local std::vector<double> marginal;
    thread_local std::vector<double> prefix;
    const std::size_t inner0 = stride_[0];
    slice.resize(inner0);
    const double* lo = heights_.data() + c0 * inner0;
    const double* hi = lo + inner0;
    for (std::size_t i = 0; i < inner0; ++i) slice[i] = (1.0 - t) * lo[i] + t * hi[i];

    for (std::size_t a = 1; a < dim; ++a) {
        const std::size_t n = grid_.counts[a];
        const std::size_t inner = stride_[a];
        marginal.assign(n, 0.0);
        for (std::size_t k = 0; k < n; ++k)
            for (std::size_t i = 0; i < inner; ++i)
                marginal[k] += tail_weight(grid_, stride_, a + 1, i) * slice[k * inner + i];
        prefix.resize(n - 1);
        double running = 0.0;
        for (std::size_t k = 0; k + 1 < n; ++k) {
            running += 0.5 * (marginal[k] + marginal[k + 1]);
            prefix[k] = running;
        }
        if (!(running > 0.0)) {
            // Measure-zero event: the previous draw landed where the density vanishes.
            x[a] = grid_.support_lower(a) + u[a] * (grid_.support_upper(a) - grid_.support_lower(a));
            return;
        }
        auto [c, f] = locate(prefix, u[a]);
        t = invert_linear_segment(marginal[c], marginal[c + 1], f);
        x[a] = grid_.midpoint(a, c) + t * grid_.width;
        if (a + 1 < dim) {
            const double* l = slice.data() + c * inner;
            const double* h = l + inner;
            for (std::size_t i = 0; i < inner; ++i) slice[i] = (1.0 - t) * l[i] + t * h[i];
            slice.resize(inner);
        }
    }
}

LbfpDensity LbfpDensity::mixed_with_uniform(double beta) const {
    if (!(beta >= 0.0 && beta < 1.0)) fail(ErrorCode::invalid_argument, "mixture weight must lie in [0,1)");
    if (beta == 0.0) return *this;
    // Adding a constant to every midpoint (guards included) adds a constant
    // on the whole support.
    const double level = beta * normalizer_ / grid_.support_volume();
    std::vector<double> mixed(heights_.size());
    const double integral = blend_integral(grid_, heights_, stride_);
    const double scale = (1.0 - beta) * normalizer_ / integral;
    for (std::size_t i = 0; i < mixed.size(); ++i) mixed[i] = scale * heights_[i] + level;
    return LbfpDensity(grid_, std::move(mixed), normalizer_);
}

void LbfpDensity::dump(std::ostream& out) const {
    const std::size_t dim = grid_.dim;
    for (std::size_t idx = 0; idx < heights_.size(); ++idx) {
        std::size_t rest = idx;
        for (std::size_t a = 0; a < dim; ++a) {
            const std::size_t k = rest / stride_[a];
            rest %= stride_[a];
            out << grid_.midpoint(a, k) << ' ';
        }
        out << heights_[idx] / normalizer_ << '\n';
    }
}

} // namespace npis
