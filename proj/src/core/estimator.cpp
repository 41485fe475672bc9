#include "npis/estimator.hpp"

#include "npis/error.hpp"

#include <algorithm>
#include <cmath>

namespace npis {

double rho_m(std::size_t m, double eps) {
    require(m >= 1, ErrorCode::invalid_argument, "trial size must be at least 1");
    require(eps > 0.0 && eps < 1.0, ErrorCode::domain, "tail mass must lie in (0,1)");
    // Upper tail 1 - level = -expm1(log1p(-eps)/M)/2, kept in the tail for accuracy.
    const double tail = -std::expm1(std::log1p(-eps) / static_cast<double>(m)) / 2.0;
    return -inv_normal(tail);
}

TrialDistribution::TrialDistribution(Subspace u, std::size_t dimension, double rho)
    : u_(std::move(u)), dimension_(dimension), rho_(rho) {
    u_.check(dimension);
    require(rho > 0.0, ErrorCode::invalid_argument, "trial box half-width must be positive");
}

void TrialDistribution::sample(std::span<const double> uniforms, std::span<double> x) const {
    if (uniforms.size() < dimension_ || x.size() < dimension_)
        fail(ErrorCode::dimension_mismatch, "trial sampling needs d uniforms");
    for (std::size_t j = 0; j < dimension_; ++j)
        x[j] = u_.contains(j) ? -rho_ + 2.0 * rho_ * uniforms[j] : uniform_to_normal(uniforms[j]);
}

double TrialDistribution::density(std::span<const double> x) const {
    double log_rest = 0.0;
    for (std::size_t j = 0; j < dimension_; ++j) {
        if (u_.contains(j)) {
            if (std::fabs(x[j]) > rho_) return 0.0;
        } else {
            log_rest += log_std_normal(x.subspan(j, 1));
        }
    }
    return std::exp(log_rest) / std::pow(2.0 * rho_, static_cast<double>(u_.size()));
}

double bin_width_from_moments(std::span<const double> variances_u, std::span<const double> means_rest, double rho,
                              std::size_t m, double m_h) {
    const auto k = static_cast<double>(variances_u.size());
    require(!variances_u.empty(), ErrorCode::invalid_argument, "subspace must not be empty");
    require(m >= 1 && rho > 0.0 && m_h > 0.0, ErrorCode::invalid_argument, "bin width inputs must be positive");
    double h1 = 0.0;
    for (double v : variances_u) {
        if (!(v > 0.0)) fail(ErrorCode::degenerate_proposal, "zero weighted variance on the subspace");
        h1 += 1.0 / (v * v);
    }
    h1 *= 98.0 / 2880.0;
    double mu2 = 0.0;
    for (double mu : means_rest) mu2 += mu * mu;
    const double h2 = std::pow(rho, k) * std::exp(mu2);
    const double base = k * h2 * std::pow(2.0, k) / (4.0 * h1 * std::pow(3.0, k));
    return m_h * std::pow(base, 1.0 / (4.0 + k)) * std::pow(static_cast<double>(m), -1.0 / (4.0 + k));
}

double clamp_bin_width(double h, std::size_t u_size, double rho) {
    const double k = static_cast<double>(u_size);
    const double min_bins = std::ceil(std::pow(4.0, 1.0 / k) - 1e-12);
    const double max_bins = std::floor(std::pow(2.0, 18.0 / k) + 1e-9);
    return std::clamp(h, 2.0 * rho / max_bins, 2.0 * rho / min_bins);
}

double select_bin_width(std::span<const double> points, std::span<const double> weights, const Subspace& u,
                        std::size_t dimension, double rho, std::size_t m, double m_h) {
    u.check(dimension);
    if (points.size() != weights.size() * dimension)
        fail(ErrorCode::dimension_mismatch, "points and weights do not describe the same samples");
    double total = 0.0;
    for (double w : weights) total += w;
    if (!(total > 0.0)) fail(ErrorCode::empty_estimate, "all trial weights are zero");

    std::vector<double> mean(dimension, 0.0);
    for (std::size_t j = 0; j < weights.size(); ++j)
        for (std::size_t i = 0; i < dimension; ++i) mean[i] += weights[j] / total * points[j * dimension + i];

    std::vector<double> var_u(u.size(), 0.0);
    for (std::size_t j = 0; j < weights.size(); ++j)
        for (std::size_t a = 0; a < u.size(); ++a) {
            const double dev = points[j * dimension + u[a]] - mean[u[a]];
            var_u[a] += weights[j] / total * dev * dev;
        }
    std::vector<double> mean_rest;
    for (std::size_t i = 0; i < dimension; ++i)
        if (!u.contains(i)) mean_rest.push_back(mean[i]);

    return clamp_bin_width(bin_width_from_moments(var_u, mean_rest, rho, m, m_h), u.size(), rho);
}

std::size_t default_trial_size(std::size_t n) { return std::max<std::size_t>(256, (n + 3) / 4); }

std::size_t NpisConfig::trial_size() const noexcept { return m > 0 ? m : default_trial_size(n); }

void NpisConfig::validate() const {
    require(n >= 1, ErrorCode::invalid_argument, "N must be positive");
    require(trial_size() >= 2, ErrorCode::invalid_argument, "M must be at least 2");
    require(eps > 0.0 && eps < 1.0, ErrorCode::invalid_argument, "eps must lie in (0,1)");
    require(beta >= 0.0 && beta < 1.0, ErrorCode::invalid_argument, "beta must lie in [0,1)");
    require(hmult > 0.0, ErrorCode::invalid_argument, "bin-width multiplier must be positive");
}

ProposalEstimate stage1(const Integrand& phi, const Subspace& u, const NpisConfig& config, PointStream& stream) {
    config.validate();
    const std::size_t d = phi.dimension;
    u.check(d);
    if (u.size() > kMaxLbfpDim) fail(ErrorCode::invalid_argument, "subspace size must be 1, 2 or 3");
    if (stream.dimension() != d) fail(ErrorCode::dimension_mismatch, "stage-1 stream dimension must equal d");

    const std::size_t m = config.trial_size();
    const double rho = rho_m(m, config.eps);
    const TrialDistribution trial(u, d, rho);
    const double box_volume = std::pow(2.0 * rho, static_cast<double>(u.size()));

    std::vector<double> points(m * d);
    std::vector<double> weights(m);
    std::vector<double> uniforms(d);
    std::vector<double> xu(u.size());
    std::size_t positive = 0;
    for (std::size_t j = 0; j < m; ++j) {
        std::span<double> x(points.data() + j * d, d);
        stream.next(uniforms);
        trial.sample(uniforms, x);
        const double f = phi(x);
        if (!(f >= 0.0) || !std::isfinite(f)) fail(ErrorCode::domain, "integrand must be finite and non-negative");
        if (f > 0.0) {
            for (std::size_t a = 0; a < u.size(); ++a) xu[a] = x[u[a]];
            weights[j] = f * std::exp(log_std_normal(xu)) * box_volume;
            ++positive;
        }
    }
    if (positive == 0) throw TrialFailure("no trial sample produced a positive payout");

    const double h = select_bin_width(points, weights, u, d, rho, m, config.hmult);
    std::vector<double> points_u(m * u.size());
    for (std::size_t j = 0; j < m; ++j)
        for (std::size_t a = 0; a < u.size(); ++a) points_u[j * u.size() + a] = points[j * d + u[a]];

    LbfpDensity density = LbfpDensity::build_weighted_histogram(points_u, weights, Grid::covering(u.size(), rho, h));
    LbfpDensity mixture = density.mixed_with_uniform(config.beta);
    const double normalizer = density.normalizer();
    return ProposalEstimate{u, d, rho, h, config.beta, normalizer, m, positive, std::move(density), std::move(mixture)};
}

IsEstimate stage2(const Integrand& phi, const ProposalEstimate& proposal, std::size_t n, PointStream& stream,
                  std::vector<double>* terms) {
    const std::size_t d = phi.dimension;
    if (d != proposal.dimension || stream.dimension() != d)
        fail(ErrorCode::dimension_mismatch, "stage-2 stream and proposal must match the integrand dimension");
    require(n >= 1, ErrorCode::invalid_argument, "N must be positive");
    const Subspace& u = proposal.u;
    const std::size_t k = u.size();

    // Stream coordinate for each integrand coordinate: u first, then the rest in order.
    std::vector<std::size_t> source(d);
    {
        std::size_t next = k;
        for (std::size_t j = 0; j < d; ++j) source[j] = u.contains(j) ? 0 : next++;
        for (std::size_t a = 0; a < k; ++a) source[u[a]] = a;
    }

    std::vector<double> uniforms(d), x(d), xu(k);
    std::vector<double> local;
    std::vector<double>& out = terms ? *terms : local;
    out.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        stream.next(uniforms);
        proposal.mixture.inverse_transform(std::span<const double>(uniforms.data(), k), xu);
        for (std::size_t j = 0; j < d; ++j) x[j] = u.contains(j) ? 0.0 : uniform_to_normal(uniforms[source[j]]);
        for (std::size_t a = 0; a < k; ++a) x[u[a]] = xu[a];
        const double f = phi(x);
        if (f == 0.0) continue;
        const double q = proposal.mixture.eval(xu);
        // q = 0 only on the measure-zero rim of a zero-height region.
        if (q > 0.0) out[i] = f * std::exp(log_std_normal(xu)) / q;
    }
    return summarize(out);
}

IsEstimate npis_run(const Integrand& phi, const Subspace& u, const NpisConfig& config, std::uint64_t seed) {
    PointStream trial = PointStream::pseudo(phi.dimension, derive_seed(seed, 1));
    const ProposalEstimate proposal = stage1(phi, u, config, trial);
    const std::uint64_t tag = config.stage2 == SamplerKind::pseudo ? 2 : 3;
    PointStream main = PointStream::make(config.stage2, phi.dimension, derive_seed(seed, tag));
    return stage2(phi, proposal, config.n, main);
}

NpisConfig qnpis_config(std::size_t n, double beta, double hmult) {
    NpisConfig c;
    c.n = n;
    c.m = 1024;
    c.beta = beta;
    c.hmult = hmult;
    c.stage2 = SamplerKind::shifted_sobol;
    return c;
}

IsEstimate qnpis(const Integrand& phi, const Subspace& u, const NpisConfig& config, std::uint64_t seed) {
    NpisConfig c = config;
    c.stage2 = SamplerKind::shifted_sobol;
    return npis_run(phi, u, c, seed);
}

} // namespace npis
