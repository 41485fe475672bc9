#pragma once

// Least-squares importance sampling: Gaussian mean shift on the subspace u,
// fitted by Levenberg-Marquardt on the empirical second moment.

#include "npis/integrand.hpp"
#include "npis/rng_qmc.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace npis {

/// N(mu, I) on u, N(0, I) elsewhere.
struct DriftProposal {
    Subspace u;
    std::vector<double> mu;
};

/// p(x_u) / q_mu(x_u) = exp(-mu.x_u + mu.mu/2).
double drift_weight(std::span<const double> mu, std::span<const double> xu) noexcept;

/// Fitting sample restricted to the points with phi > 0 (others contribute
/// nothing to the objective).
struct FitSample {
    std::size_t u_size = 0;
    std::size_t total = 0;
    std::vector<double> xu;  // row-major, u_size per kept point
    std::vector<double> phi; // phi at the kept points
};

/// S-hat(mu) = (1/M) sum phi_j^2 p(x_u^j) / q_mu(x_u^j).
double lsis_objective(const FitSample& sample, std::span<const double> mu);

struct LsisFitOptions {
    int iterations = 10;
    double initial_damping = 1e-3;
};

struct LsisFit {
    DriftProposal proposal;
    double objective_start = 0.0;
    double objective_end = 0.0;
};

/// Levenberg-Marquardt from mu = 0 on residuals phi_j sqrt(p/q_mu); only
/// decreasing steps are accepted.
LsisFit lsis_fit(const FitSample& sample, const Subspace& u, const LsisFitOptions& options = {});

/// Draws M points from N(0, I_d) (pseudo stream of dimension d) and fits.
/// Throws TrialFailure when phi vanishes at every point.
LsisFit lsis_fit(const Integrand& phi, const Subspace& u, std::size_t m, PointStream& stream,
                 const LsisFitOptions& options = {});

/// IS estimate with x_u ~ N(mu, I): stream coordinates 0..|u|-1 drive x_u.
IsEstimate lsis_estimate(const Integrand& phi, const DriftProposal& proposal, std::size_t n, PointStream& stream,
                         std::vector<double>* terms = nullptr);

/// Empirical second moment of phi w minus the squared estimate.
double second_moment_diag(const Integrand& phi, const DriftProposal& proposal, std::size_t n, PointStream& stream);

/// Fit from derive_seed(seed, 1), estimate from derive_seed(seed, 2) or
/// shifted Sobol from derive_seed(seed, 3).
IsEstimate lsis_run(const Integrand& phi, const Subspace& u, std::size_t n, std::size_t m, SamplerKind stage2,
                    std::uint64_t seed);

} // namespace npis
