#include "npis/error.hpp"
#include "npis/harness.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

using namespace npis;

namespace {

std::size_t fields(const std::string& line) { return 1 + std::count(line.begin(), line.end(), ','); }

std::string csv(const RunReport& r, bool timing) {
    std::ostringstream os;
    write_csv_row(os, r, CsvOptions{timing});
    return os.str();
}

ErrorCode code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an error");
    return ErrorCode::invalid_argument;
}

} // namespace

TEST_CASE("method names") {
    for (Method m : {Method::mc, Method::qmc, Method::lsis, Method::npis, Method::qlsis, Method::qnpis})
        CHECK(parse_method(to_string(m)) == m);
    CHECK_FALSE(parse_method("is").has_value());
    CHECK(with_sobol(Method::mc) == Method::qmc);
    CHECK(with_sobol(Method::lsis) == Method::qlsis);
    CHECK(with_sobol(Method::npis) == Method::qnpis);
    CHECK(with_sobol(Method::qnpis) == Method::qnpis);
    CHECK(uses_sobol(Method::qlsis));
    CHECK_FALSE(uses_sobol(Method::npis));
}

TEST_CASE("builtin scenarios") {
    const std::pair<const char*, std::size_t> expected[] = {{"straddle", 1},  {"asian", 16},    {"asian-ko", 16},
                                                            {"asian-straddle", 16}, {"basket-avg", 16},
                                                            {"basket-max", 2}, {"cir-cap", 16}};
    for (const auto& [name, d] : expected) {
        const auto spec = builtin_scenario(name);
        REQUIRE(spec.has_value());
        CHECK(spec->name == name);
        CHECK(spec->dimension() == d);
        const Scenario s = spec->build(ConstructionKind::pca);
        CHECK(s.dimension() == d);
    }
    CHECK_FALSE(builtin_scenario("lookback").has_value());
    const auto ko = builtin_scenario("asian-ko");
    CHECK(ko->strike == 140.0);
    CHECK(ko->knock_out == 170.0);
}

TEST_CASE("scenario files and overrides") {
    std::istringstream in("# deep out of the money\nstrike = 175\n\nscenario=asian\nvol=0.25 # comment\n");
    const ScenarioSpec s = parse_scenario(in);
    CHECK(s.payout == PayoutKind::asian_call);
    CHECK(s.strike == 175.0);
    CHECK(s.vol == 0.25);
    CHECK(s.steps == 16);

    ScenarioSpec k = *builtin_scenario("asian-ko");
    k.set("knock_out", "none");
    CHECK_FALSE(k.knock_out.has_value());
    k.set("construction", "random-walk");
    CHECK(k.construction == "random-walk");

    CHECK(code_of([] { ScenarioSpec x; x.set("colour", "red"); }) == ErrorCode::config);
    CHECK(code_of([] { ScenarioSpec x; x.set("strike", "abc"); }) == ErrorCode::config);
    CHECK(code_of([] { ScenarioSpec x; x.set("steps", "-3"); }) == ErrorCode::config);
    std::istringstream bad("strike 100\n");
    CHECK(code_of([&] { parse_scenario(bad); }) == ErrorCode::config);

    const std::string path = "npis_test_scenario.cfg";
    {
        std::ofstream f(path);
        f << "scenario = basket-max\nassets = 3\n";
    }
    const ScenarioSpec fromfile = load_scenario(path);
    std::remove(path.c_str());
    CHECK(fromfile.payout == PayoutKind::basket_max);
    CHECK(fromfile.dimension() == 3);
    CHECK(load_scenario("cir-cap").payout == PayoutKind::cir_cap);
    CHECK(code_of([] { load_scenario("no-such-scenario"); }) == ErrorCode::config);
}

TEST_CASE("method defaults") {
    MethodOptions o;
    o.n = 4096;
    CHECK(resolve_trial_size(Method::npis, o) == 1024);
    CHECK(resolve_trial_size(Method::lsis, o) == 1024);
    CHECK(resolve_trial_size(Method::qnpis, o) == 1024);
    o.n = 1024;
    CHECK(resolve_trial_size(Method::npis, o) == 256);
    CHECK(resolve_trial_size(Method::qlsis, o) == 1024);
    o.m = 77;
    CHECK(resolve_trial_size(Method::npis, o) == 77);

    MethodOptions h;
    CHECK(resolve_hmult(Method::npis, h, PayoutKind::asian_call) == 1.0);
    CHECK(resolve_hmult(Method::qnpis, h, PayoutKind::asian_call) == 3.0);
    CHECK(resolve_hmult(Method::qnpis, h, PayoutKind::straddle) == 2.0);
    CHECK(resolve_hmult(Method::qnpis, h, PayoutKind::asian_straddle) == 2.0);
    h.hmult = 1.5;
    CHECK(resolve_hmult(Method::qnpis, h, PayoutKind::straddle) == 1.5);

    PreparedScenario asian(*builtin_scenario("asian"));
    CHECK(asian.auto_u_size() == 1);
    PreparedScenario basket(*builtin_scenario("basket-max"));
    CHECK(basket.auto_u_size() == 2);
    MethodOptions u;
    u.u_size = 3;
    CHECK(resolve_u_size(asian, u) == 3);

    MethodOptions bad;
    bad.n = 0;
    CHECK_THROWS_AS(bad.validate(), Error);
    bad = {};
    bad.beta = 1.0;
    CHECK_THROWS_AS(bad.validate(), Error);
    bad = {};
    bad.u_size = 4;
    CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("crude MC against itself") {
    PreparedScenario p(*builtin_scenario("straddle"));
    MethodOptions o;
    o.n = 512;
    RunReport mc = run_benchmark(p, Method::mc, o, 20, 1, 2);
    mc.compare_to(mc);
    REQUIRE(mc.vr.has_value());
    CHECK(*mc.vr == doctest::Approx(1.0));
    REQUIRE(mc.rce.has_value());
    CHECK(*mc.rce == doctest::Approx(1.0));
    CHECK(mc.estimates.size() == 20);
    CHECK(mc.failures == 0);
    CHECK(mc.scenario == "straddle");
}

TEST_CASE("results do not depend on the worker count") {
    PreparedScenario p(*builtin_scenario("asian"));
    MethodOptions o;
    o.n = 256;
    for (Method m : {Method::mc, Method::qmc, Method::lsis, Method::npis, Method::qlsis, Method::qnpis}) {
        const RunReport a = run_benchmark(p, m, o, 6, 100, 1);
        const RunReport b = run_benchmark(p, m, o, 6, 100, 3);
        CHECK(a.estimates == b.estimates);
        CHECK(csv(a, false) == csv(b, false));
    }
}

TEST_CASE("csv layout") {
    std::ostringstream head;
    write_csv_header(head);
    CHECK(head.str() == "scenario,method,N,R,mean,var,time_s,VR,RCE,failures\n");

    RunReport r;
    r.scenario = "asian";
    r.method = Method::npis;
    r.n = 1024;
    r.runs = 10;
    r.mean = 6.0;
    r.variance = 0.25;
    r.time_s = 0.5;
    r.vr = 20.0;
    r.rce = 4.0;
    CHECK(csv(r, true) == "asian,npis,1024,10,6,0.25,0.500000,20,4,0\n");
    CHECK(csv(r, false) == "asian,npis,1024,10,6,0.25,-,20,-,0\n");
    CHECK(fields(csv(r, true)) == 10);

    r.failures = 2;
    CHECK_FALSE(r.suppressed());
    r.failures = 3;
    CHECK(r.suppressed());
    r.vr.reset();
    r.rce.reset();
    CHECK(csv(r, true) == "asian,npis,1024,10,-,-,0.500000,-,-,3\n");
}

TEST_CASE("frequent trial failures suppress the moments") {
    ScenarioSpec s = *builtin_scenario("asian");
    s.strike = 1000.0;
    PreparedScenario p(s);
    MethodOptions o;
    o.n = 64;
    o.m = 16;
    RunReport r = run_benchmark(p, Method::lsis, o, 5, 1, 1);
    CHECK(r.failures == 5);
    CHECK(r.suppressed());
    const RunReport mc = run_benchmark(p, Method::mc, o, 5, 1, 1);
    r.compare_to(mc);
    CHECK_FALSE(r.vr.has_value());
    CHECK(csv(r, false).find(",-,-,-,-,-,5") != std::string::npos);
}

TEST_CASE("zero volatility prices exactly") {
    ScenarioSpec s = *builtin_scenario("straddle");
    s.vol = 0.0;
    PreparedScenario p(s);
    MethodOptions o;
    o.n = 256;
    const RunResult r = run_once(p, Method::mc, o, 3);
    CHECK(r.estimate == doctest::Approx(100.0 * (1.0 - std::exp(-0.05))).epsilon(1e-12));
    CHECK(r.std_error == 0.0);
    CHECK_FALSE(r.failed);
}

TEST_CASE("equal-time protocol") {
    PreparedScenario p(*builtin_scenario("straddle"));
    MethodOptions o;
    const EqualTimeResult r = equal_time_benchmark(p, {Method::npis}, o, 0.01, 3, 1);
    REQUIRE(r.reports.size() == 2);
    CHECK(r.reports[0].method == Method::mc);
    CHECK(r.reports[1].method == Method::npis);
    for (std::size_t n : r.calibrated_n) CHECK(n >= 64);
    CHECK(r.reports[0].vr.has_value());
    CHECK(code_of([&] { equal_time_benchmark(p, {Method::npis}, o, 1e-9, 3, 1); }) == ErrorCode::calibration);
    CHECK(code_of([&] { equal_time_benchmark(p, {Method::npis}, o, 0.01, 1, 1); }) == ErrorCode::config);
}

TEST_CASE("proposal dump") {
    PreparedScenario p(*builtin_scenario("straddle"));
    MethodOptions o;
    std::ostringstream os;
    dump_proposal(p, o, 1, os);
    std::istringstream in(os.str());
    double x, q, mass = 0.0;
    int rows = 0;
    while (in >> x >> q) {
        ++rows;
        mass += q;
        CHECK(q >= 0.0);
    }
    CHECK(rows >= 6);
    CHECK(mass > 0.0);
}
