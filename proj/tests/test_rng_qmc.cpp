#include "npis/error.hpp"
#include "npis/rng_qmc.hpp"

#include <doctest.h>

#include <boost/math/distributions/normal.hpp>
#include <boost/random/sobol.hpp>

#include <array>
#include <cmath>
#include <vector>

using namespace npis;

namespace {

// chi2(0.999, 19), from scipy.stats.chi2.ppf
constexpr double kChi2Crit19 = 43.82019596451753;

} // namespace

TEST_CASE("mt19937 reference word and 53-bit uniforms") {
    Mt53 a(5489);
    CHECK(a.next_word() == 3499211612u);

    std::mt19937 ref(5489);
    const std::uint32_t hi = ref() >> 5, lo = ref() >> 6;
    Mt53 b(5489);
    CHECK(b.next() == (hi * 67108864.0 + lo) / 9007199254740992.0);
}

TEST_CASE("pseudo streams are reproducible") {
    PointStream s = PointStream::pseudo(5, 42), t = PointStream::pseudo(5, 42);
    std::vector<double> x(5), y(5);
    for (int i = 0; i < 1000; ++i) {
        s.next(x);
        t.next(y);
        REQUIRE(x == y);
        for (double v : x) REQUIRE((v >= 0.0 && v < 1.0));
    }
    CHECK(s.cursor() == 1000);
}

TEST_CASE("pseudo uniforms pass a 20-bin chi-square test") {
    PointStream s = PointStream::pseudo(1, 7);
    std::array<double, 20> counts{};
    double u;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        s.next(std::span<double>(&u, 1));
        counts[static_cast<std::size_t>(u * 20.0)] += 1.0;
    }
    double chi2 = 0.0;
    for (double c : counts) chi2 += (c - n / 20.0) * (c - n / 20.0) / (n / 20.0);
    CHECK(chi2 < kChi2Crit19);
}

TEST_CASE("derived seeds separate streams") {
    CHECK(derive_seed(1, 1) != derive_seed(1, 2));
    CHECK(derive_seed(1, 1) != derive_seed(2, 1));
    CHECK(derive_seed(3, 9) == derive_seed(3, 9));
}

TEST_CASE("sobol first dimension by hand") {
    SobolSequence s(1);
    double x;
    const double expected[] = {0.0, 0.5, 0.75, 0.25, 0.375, 0.875, 0.625, 0.125};
    for (double e : expected) {
        s.next(std::span<double>(&x, 1));
        CHECK(x == e);
    }
}

TEST_CASE("sobol matches boost sobol_engine after the origin") {
    const std::size_t d = 64;
    SobolSequence s(d);
    boost::random::sobol_engine<std::uint32_t, 32> ref(d);
    std::vector<double> x(d);
    s.next(x);
    for (double v : x) CHECK(v == 0.0);
    for (int i = 1; i <= 4096; ++i) {
        s.next(x);
        for (std::size_t j = 0; j < d; ++j) REQUIRE(x[j] == ref() / 4294967296.0);
    }
}

TEST_CASE("sobol values match scipy's unscrambled generator") {
    // scipy.stats.qmc.Sobol(d=64, scramble=False, bits=32).random(1024)
    SobolSequence s(64);
    std::vector<double> x(64);
    for (int i = 0; i <= 37; ++i) s.next(x);
    const double p37[] = {0.921875, 0.640625, 0.578125, 0.921875, 0.765625, 0.296875, 0.171875, 0.796875};
    for (int j = 0; j < 8; ++j) CHECK(x[j] == p37[j]);
    for (int i = 38; i <= 1000; ++i) s.next(x);
    CHECK(x[63] == 0.4462890625);
}

TEST_CASE("sobol dimension limit") {
    CHECK(SobolSequence::max_dimension() >= 64);
    CHECK_THROWS_AS(SobolSequence(SobolSequence::max_dimension() + 1), Error);
    try {
        SobolSequence big(SobolSequence::max_dimension() + 1);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::dimension_unsupported);
    }
}

TEST_CASE("random shift modulo one") {
    PointStream s = PointStream::shifted_sobol(1, std::vector<double>{0.5});
    double x;
    const double expected[] = {0.5, 0.0, 0.25, 0.75};
    for (double e : expected) {
        s.next(std::span<double>(&x, 1));
        CHECK(x == e);
    }
    // y = 0.7 is not a Sobol point; check the arithmetic through a 0.2 shift of 0.5.
    PointStream t = PointStream::shifted_sobol(1, std::vector<double>{0.7});
    t.next(std::span<double>(&x, 1));
    t.next(std::span<double>(&x, 1));
    CHECK(x == doctest::Approx(0.2).epsilon(1e-15));
}

TEST_CASE("zero shift reproduces the raw sequence") {
    PointStream s = PointStream::shifted_sobol(8, std::vector<double>(8, 0.0));
    SobolSequence raw(8);
    std::vector<double> a(8), b(8);
    for (int i = 0; i < 256; ++i) {
        s.next(a);
        raw.next(b);
        REQUIRE(a == b);
    }
}

TEST_CASE("shifted sobol stream is reproducible and centred") {
    PointStream s = PointStream::shifted_sobol(16, 99), t = PointStream::shifted_sobol(16, 99);
    CHECK(s.shift() == t.shift());
    for (double v : s.shift()) CHECK((v >= 0.0 && v < 1.0));
    std::vector<double> x(16), mean(16, 0.0);
    for (int i = 0; i < 4096; ++i) {
        s.next(x);
        for (std::size_t j = 0; j < 16; ++j) {
            REQUIRE((x[j] >= 0.0 && x[j] < 1.0));
            mean[j] += x[j] / 4096.0;
        }
    }
    for (double m : mean) CHECK(std::fabs(m - 0.5) < 0.01);
    CHECK(PointStream::shifted_sobol(16, 100).shift() != s.shift());
}

TEST_CASE("inv_normal basics") {
    CHECK(inv_normal(0.5) == 0.0);
    CHECK(std::fabs(inv_normal(0.975) - 1.959964) < 1e-5);
    for (double u : {0.01, 0.3, 0.49}) CHECK(std::fabs(inv_normal(1.0 - u) + inv_normal(u)) < 1e-9);
    CHECK_THROWS_AS(inv_normal(0.0), Error);
    CHECK_THROWS_AS(inv_normal(1.0), Error);
    CHECK(uniform_to_normal(0.0) == inv_normal(kUniformFloor));
}

TEST_CASE("inv_normal accuracy and monotonicity") {
    const boost::math::normal_distribution<double> normal;
    std::vector<double> grid;
    for (int e = -100; e <= -1; ++e) grid.push_back(std::pow(10.0, e / 10.0));
    for (int i = 1; i < 20000; ++i) grid.push_back(i / 20000.0);
    for (int e = -100; e <= -1; ++e) grid.push_back(1.0 - std::pow(10.0, e / 10.0));
    std::sort(grid.begin(), grid.end());
    double worst = 0.0, prev = -1e300;
    for (double u : grid) {
        const double z = inv_normal(u);
        worst = std::max(worst, std::fabs(z - boost::math::quantile(normal, u)));
        REQUIRE(z >= prev);
        prev = z;
    }
    CHECK(worst < 3e-9);
}

TEST_CASE("normal transform moments") {
    PointStream s = PointStream::pseudo(1, 2024);
    double u, sum = 0.0, sum2 = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        s.next(std::span<double>(&u, 1));
        const double z = uniform_to_normal(u);
        sum += z;
        sum2 += z * z;
    }
    const double mean = sum / n;
    CHECK(std::fabs(mean) < 0.02);
    CHECK(std::fabs(sum2 / n - mean * mean - 1.0) < 0.02);
}
