#include "npis/error.hpp"
#include "npis/harness.hpp"
#include "npis/lsis.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

using namespace npis;

namespace {

LsisFit fit(const Integrand& phi, const Subspace& u, std::size_t m, std::uint64_t seed) {
    PointStream st = PointStream::pseudo(phi.dimension, seed);
    return lsis_fit(phi, u, m, st);
}

} // namespace

TEST_CASE("symmetric integrand keeps the drift near zero") {
    const Integrand phi{2, [](std::span<const double> x) { return x[0] * x[0]; }};
    const LsisFit f = fit(phi, Subspace({0}), 4096, 11);
    CHECK(std::fabs(f.proposal.mu[0]) < 0.15);
}

TEST_CASE("exponential integrand gets its zero-variance drift") {
    const Integrand phi{2, [](std::span<const double> x) { return std::exp(1.5 * x[0]); }};
    const LsisFit f = fit(phi, Subspace({0}), 4096, 12);
    CHECK(f.proposal.mu[0] == doctest::Approx(1.5).epsilon(0.07));
    CHECK(f.objective_end <= f.objective_start);

    // At the exact drift every term equals the integral e^{9/8}.
    PointStream st = PointStream::pseudo(2, 13);
    const DriftProposal exact{Subspace({0}), {1.5}};
    std::vector<double> terms;
    const IsEstimate e = lsis_estimate(phi, exact, 1000, st, &terms);
    for (double t : terms) CHECK(t == doctest::Approx(std::exp(1.125)).epsilon(1e-12));
    CHECK(e.std_error < 1e-10);
}

TEST_CASE("asian drift is positive and minimizes the sample objective") {
    PreparedScenario prepared(*builtin_scenario("asian"));
    const Integrand phi = prepared.integrand_for(Method::lsis);
    PointStream st = PointStream::pseudo(phi.dimension, 21);
    const std::size_t m = 4096;
    std::vector<double> z(phi.dimension), u(phi.dimension);
    FitSample sample;
    sample.u_size = 1;
    sample.total = m;
    for (std::size_t j = 0; j < m; ++j) {
        st.next(u);
        uniforms_to_normals(u, z);
        const double v = phi(z);
        if (v > 0.0) {
            sample.xu.push_back(z[0]);
            sample.phi.push_back(v);
        }
    }
    const LsisFit f = lsis_fit(sample, Subspace({0}));
    CHECK(f.proposal.mu[0] > 0.0);
    CHECK(f.objective_end < f.objective_start);
    double best = 1e300;
    for (double mu = -1.0; mu <= 3.0; mu += 0.001) {
        const double v[] = {mu};
        best = std::min(best, lsis_objective(sample, v));
    }
    CHECK(f.objective_end <= best * (1.0 + 1e-3));
    const double zero[] = {0.0};
    CHECK(f.objective_start == doctest::Approx(lsis_objective(sample, zero)));
}

TEST_CASE("drift weight is the density ratio") {
    const double mu[] = {0.3, -1.1};
    const double x[] = {0.7, 0.2};
    const auto log_q = -0.5 * ((x[0] - mu[0]) * (x[0] - mu[0]) + (x[1] - mu[1]) * (x[1] - mu[1]));
    const auto log_p = -0.5 * (x[0] * x[0] + x[1] * x[1]);
    CHECK(drift_weight(mu, x) == doctest::Approx(std::exp(log_p - log_q)).epsilon(1e-14));
    const double zero[] = {0.0, 0.0};
    CHECK(drift_weight(zero, x) == 1.0);
}

TEST_CASE("zero drift reduces to crude Monte Carlo") {
    const Integrand phi{3, [](std::span<const double> x) { return std::max(x[0] + x[1] - x[2], 0.0); }};
    PointStream a = PointStream::pseudo(3, 8);
    PointStream b = PointStream::pseudo(3, 8);
    const IsEstimate e = lsis_estimate(phi, DriftProposal{Subspace({0}), {0.0}}, 5000, a);
    std::vector<double> u(3), z(3);
    double sum = 0.0;
    for (int i = 0; i < 5000; ++i) {
        b.next(u);
        uniforms_to_normals(u, z);
        sum += phi(z);
    }
    CHECK(e.mean == doctest::Approx(sum / 5000.0).epsilon(1e-12));
}

TEST_CASE("second moment of the weights") {
    const Integrand one{1, [](std::span<const double>) { return 1.0; }};
    PointStream a = PointStream::pseudo(1, 1);
    CHECK(second_moment_diag(one, DriftProposal{Subspace({0}), {0.0}}, 1000, a) == doctest::Approx(0.0));
    // Var of exp(-mu X + mu^2/2), X ~ N(mu, 1), is e^{mu^2} - 1.
    PointStream b = PointStream::pseudo(1, 2);
    const double v = second_moment_diag(one, DriftProposal{Subspace({0}), {1.0}}, 1000000, b);
    CHECK(v == doctest::Approx(std::exp(1.0) - 1.0).epsilon(0.03));
}

TEST_CASE("fit failures and limits") {
    const Integrand zero{2, [](std::span<const double>) { return 0.0; }};
    PointStream st = PointStream::pseudo(2, 3);
    CHECK_THROWS_AS(lsis_fit(zero, Subspace({0}), 256, st), TrialFailure);
    const Integrand flat{5, [](std::span<const double>) { return 1.0; }};
    PointStream st5 = PointStream::pseudo(5, 3);
    CHECK_THROWS_AS(lsis_fit(flat, Subspace({0, 1, 2, 3}), 256, st5), Error);
    CHECK_THROWS_AS(lsis_fit(flat, Subspace({7}), 256, st5), Error);
}

TEST_CASE("end-to-end runs are reproducible and unbiased") {
    const Integrand phi{2, [](std::span<const double> x) { return std::exp(x[0]); }};
    const IsEstimate a = lsis_run(phi, Subspace({0}), 2048, 512, SamplerKind::pseudo, 77);
    const IsEstimate b = lsis_run(phi, Subspace({0}), 2048, 512, SamplerKind::pseudo, 77);
    CHECK(a.mean == b.mean);
    CHECK(std::fabs(a.mean - std::exp(0.5)) < 4.0 * a.std_error + 1e-12);
    const IsEstimate q = lsis_run(phi, Subspace({0}), 2048, 512, SamplerKind::shifted_sobol, 77);
    CHECK(q.mean == doctest::Approx(std::exp(0.5)).epsilon(1e-3));
}
