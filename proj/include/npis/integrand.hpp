#pragma once

// Types shared by the estimators: the integrand against N(0, I_d), the
// coordinate subset u, and the single-run estimate.

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace npis {

class Scenario;

/// phi : R^d -> [0, inf), integrated against the standard normal density.
struct Integrand {
    std::size_t dimension = 0;
    std::function<double(std::span<const double>)> phi;

    double operator()(std::span<const double> x) const { return phi(x); }
};

/// Wraps a scenario by reference; the scenario must outlive the result.
Integrand integrand_of(const Scenario& scenario);

/// Ordered, distinct 0-based coordinate indices; 1 to 3 of them for the
/// nonparametric proposal.
class Subspace {
public:
    explicit Subspace(std::vector<std::size_t> indices);
    /// {0, ..., k-1}: the leading components under PCA.
    static Subspace leading(std::size_t k);

    std::size_t size() const noexcept { return indices_.size(); }
    std::size_t operator[](std::size_t i) const { return indices_[i]; }
    const std::vector<std::size_t>& indices() const noexcept { return indices_; }
    bool contains(std::size_t coordinate) const noexcept;
    /// Throws unless every index is below `dimension`.
    void check(std::size_t dimension) const;

private:
    std::vector<std::size_t> indices_;
};

struct IsEstimate {
    double mean = 0.0;
    /// Sample standard deviation of the terms over sqrt(n).
    double std_error = 0.0;
    std::size_t n = 0;
};

/// Mean and standard error of a list of terms.
IsEstimate summarize(std::span<const double> terms);

/// log of the standard normal density of the listed coordinates.
double log_std_normal(std::span<const double> x) noexcept;

} // namespace npis
