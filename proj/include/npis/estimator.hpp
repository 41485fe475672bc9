#pragma once

// Two-stage nonparametric partial importance sampling (NPIS) and its
// randomized-QMC variant.

#include "npis/integrand.hpp"
#include "npis/lbfp.hpp"
#include "npis/rng_qmc.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace npis {

/// Half-width of the trial box: the (1 + (1-eps)^(1/M))/2 normal quantile,
/// so that M standard normals leave it with probability eps.
double rho_m(std::size_t m, double eps);

/// Uniform on [-rho, rho]^|u| for the coordinates in u, standard normal on
/// the rest.
class TrialDistribution {
public:
    TrialDistribution(Subspace u, std::size_t dimension, double rho);

    const Subspace& subspace() const noexcept { return u_; }
    std::size_t dimension() const noexcept { return dimension_; }
    double rho() const noexcept { return rho_; }

    /// Maps d uniforms to a trial point.
    void sample(std::span<const double> uniforms, std::span<double> x) const;
    double density(std::span<const double> x) const;

private:
    Subspace u_;
    std::size_t dimension_;
    double rho_;
};

/// h = m_h (|u| H2 2^|u| / (4 H1 3^|u|))^(1/(4+|u|)) M^(-1/(4+|u|)) with
/// H1 = (98/2880) sum sigma_i^-4 over u and H2 = rho^|u| exp(sum mu_i^2)
/// over the complement. No clamping.
double bin_width_from_moments(std::span<const double> variances_u, std::span<const double> means_rest, double rho,
                              std::size_t m, double m_h);

/// Bin width from weighted trial points (row-major, d per point): weighted
/// variances on u, weighted means off u, weights w / sum(w). The result is
/// clamped so the grid over [-rho, rho]^|u| has between 4 and 2^18 bins.
double select_bin_width(std::span<const double> points, std::span<const double> weights, const Subspace& u,
                        std::size_t dimension, double rho, std::size_t m, double m_h);

/// Clamp used by select_bin_width.
double clamp_bin_width(double h, std::size_t u_size, double rho);

/// M = max(256, ceil(N/4)).
std::size_t default_trial_size(std::size_t n);

struct NpisConfig {
    std::size_t n = 1024;
    std::size_t m = 0; // 0: default_trial_size(n)
    double eps = 1e-4;
    double beta = 0.05;
    double hmult = 1.0;
    SamplerKind stage2 = SamplerKind::pseudo;

    std::size_t trial_size() const noexcept;
    void validate() const;
};

struct ProposalEstimate {
    Subspace u;
    std::size_t dimension = 0;
    double rho = 0.0;
    double h = 0.0;
    double beta = 0.0;
    /// (1/M) sum omega_j, itself an unbiased estimate of the integral.
    double normalizer = 0.0;
    std::size_t trial_size = 0;
    std::size_t positive = 0;
    LbfpDensity density; // q-hat
    LbfpDensity mixture; // (1-beta) q-hat + beta uniform(support box)
};

/// Stage 1 with a pseudo-random d-dimensional stream. Throws TrialFailure
/// when every weight is zero.
ProposalEstimate stage1(const Integrand& phi, const Subspace& u, const NpisConfig& config, PointStream& stream);

/// Stage 2: x_u by conditional inversion of the mixture from the first |u|
/// stream coordinates, x_{-u} by the normal transform of the rest.
/// `terms`, if given, receives phi p / q-tilde per sample.
IsEstimate stage2(const Integrand& phi, const ProposalEstimate& proposal, std::size_t n, PointStream& stream,
                  std::vector<double>* terms = nullptr);

/// Both stages, stage 1 from derive_seed(seed, 1) and stage 2 from
/// derive_seed(seed, 2) (pseudo) or derive_seed(seed, 3) (shifted Sobol).
IsEstimate npis_run(const Integrand& phi, const Subspace& u, const NpisConfig& config, std::uint64_t seed);

/// QNPIS defaults: shifted-Sobol stage 2, M = 1024, m_h = 3.
NpisConfig qnpis_config(std::size_t n, double beta = 0.05, double hmult = 3.0);

IsEstimate qnpis(const Integrand& phi, const Subspace& u, const NpisConfig& config, std::uint64_t seed);

} // namespace npis
