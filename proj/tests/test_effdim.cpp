#include "npis/effdim.hpp"
#include "npis/error.hpp"
#include "npis/harness.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>
#include <string>

using namespace npis;

namespace {

constexpr std::size_t kL = 1u << 14;

EdReport ed_of(const Integrand& phi, std::uint64_t seed, std::size_t max_prefix = 0) {
    PointStream st = PointStream::pseudo(2 * phi.dimension, seed);
    return effective_dimension(phi, 0.9, kL, st, max_prefix);
}

EdReport ed_of(const ScenarioSpec& spec, ConstructionKind kind, std::uint64_t seed) {
    const Scenario s = spec.build(kind);
    return ed_of(integrand_of(s), seed);
}

ScenarioSpec builtin(const char* name) { return *builtin_scenario(name); }

} // namespace

TEST_CASE("single coordinate carries all the variance") {
    const Integrand phi{3, [](std::span<const double> x) { return x[0]; }};
    PointStream st = PointStream::pseudo(6, 1);
    const GammaEstimate g = estimate_gamma(phi, Subspace({0}), kL, st);
    CHECK(g.value == doctest::Approx(1.0).epsilon(0.06));
    CHECK(g.variance == doctest::Approx(1.0).epsilon(0.06));
    CHECK(g.std_error > 0.0);
    PointStream st2 = PointStream::pseudo(6, 2);
    const GammaEstimate g2 = estimate_gamma(phi, Subspace({1, 2}), kL, st2);
    CHECK(std::fabs(g2.value) < 4.0 * g2.std_error + 0.02);
}

TEST_CASE("additive function splits evenly") {
    const Integrand phi{4, [](std::span<const double> x) { return x[0] + x[1] + x[2] + x[3]; }};
    PointStream st = PointStream::pseudo(8, 3);
    const GammaEstimate g = estimate_gamma(phi, Subspace({0, 1}), kL, st);
    CHECK(g.value / g.variance == doctest::Approx(0.5).epsilon(0.1));
    const EdReport r = ed_of(phi, 4);
    CHECK(r.ed == 4);
    CHECK(r.gamma_hat.size() == 4);
    CHECK(r.gamma_hat[3] == doctest::Approx(r.sigma2).epsilon(1e-12));
}

TEST_CASE("stream dimension must be twice the integrand dimension") {
    const Integrand phi{3, [](std::span<const double> x) { return x[0]; }};
    PointStream st = PointStream::pseudo(3, 1);
    CHECK_THROWS_AS(estimate_gamma(phi, Subspace({0}), 128, st), Error);
    PointStream st6 = PointStream::pseudo(6, 1);
    CHECK_THROWS_AS(effective_dimension(phi, 1.5, 128, st6), Error);
}

TEST_CASE("asian under PCA is one-dimensional") {
    const Scenario s = builtin("asian").build(ConstructionKind::pca);
    const Integrand phi = integrand_of(s);
    PointStream st = PointStream::pseudo(2 * phi.dimension, 5);
    const GammaEstimate g = estimate_gamma(phi, Subspace({0}), kL, st);
    CHECK(g.value / g.variance >= 0.9);
    CHECK(ed_of(builtin("asian"), ConstructionKind::pca, 6).ed == 1);
}

TEST_CASE("random-walk construction has a larger effective dimension than PCA") {
    const EdReport walk = ed_of(builtin("asian"), ConstructionKind::random_walk, 7);
    const EdReport pca = ed_of(builtin("asian"), ConstructionKind::pca, 7);
    CHECK(walk.ed > pca.ed);
    CHECK(walk.ed <= 16);
}

TEST_CASE("effective dimensions of the builtin scenarios") {
    CHECK(ed_of(builtin("straddle"), ConstructionKind::pca, 8).ed == 1);
    CHECK(ed_of(builtin("cir-cap"), ConstructionKind::pca, 9).ed == 1);
    CHECK(ed_of(builtin("basket-avg"), ConstructionKind::pca, 10).ed == 1);
    for (std::size_t s = 2; s <= 4; ++s) {
        ScenarioSpec spec = builtin("basket-max");
        spec.set("assets", std::to_string(s));
        CHECK(ed_of(spec, ConstructionKind::pca, 11 + s).ed == s);
    }
}

TEST_CASE("profile bounds, monotonicity and truncation") {
    const EdReport r = ed_of(builtin("asian"), ConstructionKind::random_walk, 21);
    CHECK(r.ed >= 1);
    CHECK(r.ed <= 16);
    CHECK(r.gamma_hat.size() == 16);
    for (std::size_t k = 1; k < r.gamma_hat.size(); ++k)
        CHECK(r.gamma_hat[k] >= r.gamma_hat[k - 1] - 3.0 * (r.gamma_se[k] + r.gamma_se[k - 1]));
    CHECK(r.gamma_hat.back() == doctest::Approx(r.sigma2).epsilon(1e-12));

    const Scenario s = builtin("asian").build(ConstructionKind::random_walk);
    const EdReport t = ed_of(integrand_of(s), 21, 3);
    CHECK(t.gamma_hat.size() == 3);
    CHECK(t.ed <= 3);

    std::ostringstream os;
    r.write_csv(os);
    std::istringstream in(os.str());
    std::string line;
    int lines = 0;
    while (std::getline(in, line)) ++lines;
    CHECK(lines == 17);
}

TEST_CASE("common random numbers make the profile reproducible") {
    const Integrand phi{2, [](std::span<const double> x) { return std::exp(x[0]) + x[1] * x[1]; }};
    const EdReport a = ed_of(phi, 99), b = ed_of(phi, 99);
    CHECK(a.gamma_hat == b.gamma_hat);
    CHECK(a.ed == b.ed);
}
