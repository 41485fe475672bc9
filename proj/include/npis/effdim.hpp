#pragma once

// Monte Carlo estimates of cumulated ANOVA variances Gamma_u and the
// truncation-sense effective dimension.

#include "npis/integrand.hpp"
#include "npis/rng_qmc.hpp"

#include <cstddef>
#include <iosfwd>
#include <vector>

namespace npis {

struct GammaEstimate {
    /// (1/l) sum phi(x) phi(x_u, y_{-u}) - I-hat^2
    double value = 0.0;
    /// Standard error of the product average.
    double std_error = 0.0;
    /// I-hat and sigma-hat^2 = (1/l) sum phi(x)^2 - I-hat^2 from the same sample.
    double mean = 0.0;
    double variance = 0.0;
};

/// The stream must have dimension 2d: x from coordinates 0..d-1, y from d..2d-1.
GammaEstimate estimate_gamma(const Integrand& phi, const Subspace& u, std::size_t l, PointStream& stream);

struct EdReport {
    double gamma = 0.9;
    std::size_t l = 0;
    std::vector<double> gamma_hat; // raw Gamma-hat for prefixes k = 1..K
    std::vector<double> gamma_se;
    double sigma2 = 0.0;
    double mean = 0.0;
    std::size_t ed = 0;

    /// CSV profile: k,gamma_hat,se,fraction
    void write_csv(std::ostream& out) const;
};

/// Prefix profile with common random numbers. ED is the smallest k with
/// max(Gamma-hat_k, 0) >= gamma sigma-hat^2, or d if none qualifies.
/// `max_prefix` > 0 stops the profile early (ED is then capped at it).
EdReport effective_dimension(const Integrand& phi, double gamma, std::size_t l, PointStream& stream,
                             std::size_t max_prefix = 0);

} // namespace npis
