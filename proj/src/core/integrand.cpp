#include "npis/integrand.hpp"

#include "npis/error.hpp"
#include "npis/models.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace npis {

Integrand integrand_of(const Scenario& scenario) {
    return Integrand{scenario.dimension(), [&scenario](std::span<const double> x) { return scenario(x); }};
}

Subspace::Subspace(std::vector<std::size_t> indices) : indices_(std::move(indices)) {
    require(!indices_.empty(), ErrorCode::invalid_argument, "subspace must not be empty");
    std::vector<std::size_t> sorted = indices_;
    std::sort(sorted.begin(), sorted.end());
    require(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end(), ErrorCode::invalid_argument,
            "subspace indices must be distinct");
}

Subspace Subspace::leading(std::size_t k) {
    std::vector<std::size_t> idx(k);
    std::iota(idx.begin(), idx.end(), 0);
    return Subspace(std::move(idx));
}

bool Subspace::contains(std::size_t coordinate) const noexcept {
    return std::find(indices_.begin(), indices_.end(), coordinate) != indices_.end();
}

void Subspace::check(std::size_t dimension) const {
    for (std::size_t i : indices_)
        if (i >= dimension) fail(ErrorCode::dimension_mismatch, "subspace index exceeds the integrand dimension");
}

IsEstimate summarize(std::span<const double> terms) {
    IsEstimate e;
    e.n = terms.size();
    if (terms.empty()) return e;
    const double n = static_cast<double>(terms.size());
    // Shifted by the first term so constant terms give exactly zero spread.
    const double t0 = terms[0];
    double shift = 0.0;
    for (double t : terms) shift += t - t0;
    shift /= n;
    double ss = 0.0;
    for (double t : terms) ss += (t - t0 - shift) * (t - t0 - shift);
    e.mean = t0 + shift;
    e.std_error = terms.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
    return e;
}

double log_std_normal(std::span<const double> x) noexcept {
    constexpr double half_log_2pi = 0.91893853320467274178;
    double s = 0.0;
    for (double v : x) s += v * v;
    return -0.5 * s - half_log_2pi * static_cast<double>(x.size());
}

} // namespace npis
