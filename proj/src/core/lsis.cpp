#include "npis/lsis.hpp"

#include "npis/error.hpp"

#include <cmath>

namespace npis {

double drift_weight(std::span<const double> mu, std::span<const double> xu) noexcept {
    double e = 0.0;
    for (std::size_t a = 0; a < mu.size(); ++a) e += -mu[a] * xu[a] + 0.5 * mu[a] * mu[a];
    return std::exp(e);
}

double lsis_objective(const FitSample& sample, std::span<const double> mu) {
    const std::size_t k = sample.u_size;
    double s = 0.0;
    for (std::size_t j = 0; j < sample.phi.size(); ++j) {
        const double f = sample.phi[j];
        s += f * f * drift_weight(mu, std::span<const double>(sample.xu.data() + j * k, k));
    }
    return s / static_cast<double>(sample.total);
}

namespace {

// Solves a small dense system in place by Gaussian elimination with partial pivoting.
bool solve(std::vector<double>& a, std::vector<double>& b, std::size_t n) {
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t p = c;
        for (std::size_t r = c + 1; r < n; ++r)
            if (std::fabs(a[r * n + c]) > std::fabs(a[p * n + c])) p = r;
        if (!(std::fabs(a[p * n + c]) > 0.0)) return false;
        if (p != c) {
            for (std::size_t j = 0; j < n; ++j) std::swap(a[c * n + j], a[p * n + j]);
            std::swap(b[c], b[p]);
        }
        for (std::size_t r = c + 1; r < n; ++r) {
            const double f = a[r * n + c] / a[c * n + c];
            for (std::size_t j = c; j < n; ++j) a[r * n + j] -= f * a[c * n + j];
            b[r] -= f * b[c];
        }
    }
    for (std::size_t c = n; c-- > 0;) {
        double s = b[c];
        for (std::size_t j = c + 1; j < n; ++j) s -= a[c * n + j] * b[j];
        b[c] = s / a[c * n + c];
    }
    return true;
}

} // namespace

LsisFit lsis_fit(const FitSample& sample, const Subspace& u, const LsisFitOptions& options) {
    const std::size_t k = u.size();
    if (sample.u_size != k) fail(ErrorCode::dimension_mismatch, "fit sample does not match the subspace");
    if (k > 3) fail(ErrorCode::invalid_argument, "subspace size must be 1, 2 or 3");
    if (sample.phi.empty()) throw TrialFailure("no fitting sample produced a positive payout");

    std::vector<double> mu(k, 0.0), trial(k), jtj(k * k), jtr(k), r(sample.phi.size());
    double lambda = options.initial_damping;
    const double start = lsis_objective(sample, mu);
    double current = start;

    // Residuals r_j = phi_j exp((-mu.x_j + mu.mu/2)/2), dr_j/dmu = r_j (mu - x_j)/2.
    for (int it = 0; it < options.iterations; ++it) {
        std::fill(jtj.begin(), jtj.end(), 0.0);
        std::fill(jtr.begin(), jtr.end(), 0.0);
        for (std::size_t j = 0; j < sample.phi.size(); ++j) {
            const double* x = sample.xu.data() + j * k;
            const double rj = sample.phi[j] * std::sqrt(drift_weight(mu, std::span<const double>(x, k)));
            double g[3];
            for (std::size_t a = 0; a < k; ++a) g[a] = rj * (mu[a] - x[a]) / 2.0;
            for (std::size_t a = 0; a < k; ++a) {
                jtr[a] += g[a] * rj;
                for (std::size_t b = 0; b < k; ++b) jtj[a * k + b] += g[a] * g[b];
            }
        }
        std::vector<double> a = jtj;
        std::vector<double> step(k);
        double diag_max = 0.0;
        for (std::size_t i = 0; i < k; ++i) diag_max = std::max(diag_max, jtj[i * k + i]);
        for (std::size_t i = 0; i < k; ++i) {
            a[i * k + i] += lambda * jtj[i * k + i] + 1e-12 * diag_max;
            step[i] = -jtr[i];
        }
        if (!(diag_max > 0.0) || !solve(a, step, k)) break;
        for (std::size_t i = 0; i < k; ++i) trial[i] = mu[i] + step[i];
        const double value = lsis_objective(sample, trial);
        if (std::isfinite(value) && value < current) {
            mu = trial;
            current = value;
            lambda /= 10.0;
        } else {
            lambda *= 10.0;
        }
    }
    return LsisFit{DriftProposal{u, mu}, start, current};
}

LsisFit lsis_fit(const Integrand& phi, const Subspace& u, std::size_t m, PointStream& stream,
                 const LsisFitOptions& options) {
    const std::size_t d = phi.dimension;
    u.check(d);
    if (u.size() > 3) fail(ErrorCode::invalid_argument, "subspace size must be 1, 2 or 3");
    require(m >= 2, ErrorCode::invalid_argument, "M must be at least 2");
    if (stream.dimension() != d) fail(ErrorCode::dimension_mismatch, "fitting stream dimension must equal d");

    FitSample sample;
    sample.u_size = u.size();
    sample.total = m;
    std::vector<double> uniforms(d), x(d);
    for (std::size_t j = 0; j < m; ++j) {
        stream.next(uniforms);
        uniforms_to_normals(uniforms, x);
        const double f = phi(x);
        if (!(f >= 0.0) || !std::isfinite(f)) fail(ErrorCode::domain, "integrand must be finite and non-negative");
        if (f > 0.0) {
            for (std::size_t a = 0; a < u.size(); ++a) sample.xu.push_back(x[u[a]]);
            sample.phi.push_back(f);
        }
    }
    return lsis_fit(sample, u, options);
}

IsEstimate lsis_estimate(const Integrand& phi, const DriftProposal& proposal, std::size_t n, PointStream& stream,
                         std::vector<double>* terms) {
    const std::size_t d = phi.dimension;
    const Subspace& u = proposal.u;
    u.check(d);
    if (stream.dimension() != d) fail(ErrorCode::dimension_mismatch, "stream dimension must equal d");
    require(n >= 1, ErrorCode::invalid_argument, "N must be positive");
    const std::size_t k = u.size();

    std::vector<double> uniforms(d), z(d), x(d), xu(k);
    std::vector<double> local;
    std::vector<double>& out = terms ? *terms : local;
    out.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        stream.next(uniforms);
        uniforms_to_normals(uniforms, z);
        std::size_t next = k;
        for (std::size_t j = 0; j < d; ++j)
            if (!u.contains(j)) x[j] = z[next++];
        for (std::size_t a = 0; a < k; ++a) {
            xu[a] = proposal.mu[a] + z[a];
            x[u[a]] = xu[a];
        }
        const double f = phi(x);
        if (f > 0.0) out[i] = f * drift_weight(proposal.mu, xu);
    }
    return summarize(out);
}

double second_moment_diag(const Integrand& phi, const DriftProposal& proposal, std::size_t n, PointStream& stream) {
    std::vector<double> terms;
    const IsEstimate e = lsis_estimate(phi, proposal, n, stream, &terms);
    double m2 = 0.0;
    for (double t : terms) m2 += t * t;
    return m2 / static_cast<double>(terms.size()) - e.mean * e.mean;
}

IsEstimate lsis_run(const Integrand& phi, const Subspace& u, std::size_t n, std::size_t m, SamplerKind stage2,
                    std::uint64_t seed) {
    PointStream fit_stream = PointStream::pseudo(phi.dimension, derive_seed(seed, 1));
    const LsisFit fit = lsis_fit(phi, u, m, fit_stream);
    const std::uint64_t tag = stage2 == SamplerKind::pseudo ? 2 : 3;
    PointStream main = PointStream::make(stage2, phi.dimension, derive_seed(seed, tag));
    return lsis_estimate(phi, fit.proposal, n, main);
}

} // namespace npis
