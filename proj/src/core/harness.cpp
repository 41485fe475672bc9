#include "npis/harness.hpp"

#include "npis/error.hpp"
#include "npis/estimator.hpp"
#include "npis/lsis.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <istream>
#include <mutex>
#include <ostream>
#include <thread>
#include <utility>

namespace npis {

const char* to_string(Method method) noexcept {
    switch (method) {
    case Method::mc: return "mc";
    case Method::qmc: return "qmc";
    case Method::lsis: return "lsis";
    case Method::npis: return "npis";
    case Method::qlsis: return "qlsis";
    case Method::qnpis: return "qnpis";
    }
    return "unknown";
}

std::optional<Method> parse_method(std::string_view name) noexcept {
    for (Method m : {Method::mc, Method::qmc, Method::lsis, Method::npis, Method::qlsis, Method::qnpis})
        if (name == to_string(m)) return m;
    return std::nullopt;
}

bool uses_sobol(Method method) noexcept {
    return method == Method::qmc || method == Method::qlsis || method == Method::qnpis;
}

Method with_sobol(Method method) noexcept {
    switch (method) {
    case Method::mc: return Method::qmc;
    case Method::lsis: return Method::qlsis;
    case Method::npis: return Method::qnpis;
    default: return method;
    }
}

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

double parse_double(std::string_view key, std::string_view value) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (ec != std::errc() || ptr != value.data() + value.size() || !std::isfinite(v))
        fail(ErrorCode::config, "invalid number for '" + std::string(key) + "': " + std::string(value));
    return v;
}

std::size_t parse_size(std::string_view key, std::string_view value) {
    std::size_t v = 0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (ec != std::errc() || ptr != value.data() + value.size() || v == 0)
        fail(ErrorCode::config, "invalid positive integer for '" + std::string(key) + "': " + std::string(value));
    return v;
}

std::optional<PayoutKind> parse_payout(std::string_view name) {
    for (PayoutKind k : {PayoutKind::straddle, PayoutKind::asian_call, PayoutKind::asian_knockout,
                         PayoutKind::asian_straddle, PayoutKind::basket_average, PayoutKind::basket_max,
                         PayoutKind::cir_cap})
        if (name == to_string(k)) return k;
    return std::nullopt;
}

bool is_basket(PayoutKind k) { return k == PayoutKind::basket_average || k == PayoutKind::basket_max; }

} // namespace

void ScenarioSpec::set(std::string_view key, std::string_view raw) {
    const std::string_view value = trim(raw);
    if (key == "scenario") {
        auto base = builtin_scenario(value);
        if (!base) fail(ErrorCode::config, "unknown scenario '" + std::string(value) + "'");
        *this = *base;
    } else if (key == "name") {
        name = std::string(value);
    } else if (key == "payout") {
        auto p = parse_payout(value);
        if (!p) fail(ErrorCode::config, "unknown payout '" + std::string(value) + "'");
        payout = *p;
    } else if (key == "spot") {
        spot = parse_double(key, value);
    } else if (key == "vol") {
        vol = parse_double(key, value);
    } else if (key == "rate") {
        rate = parse_double(key, value);
    } else if (key == "maturity") {
        maturity = parse_double(key, value);
    } else if (key == "steps") {
        steps = parse_size(key, value);
    } else if (key == "assets") {
        assets = parse_size(key, value);
    } else if (key == "correlation") {
        correlation = parse_double(key, value);
    } else if (key == "strike") {
        strike = parse_double(key, value);
    } else if (key == "knock_out") {
        if (value == "none")
            knock_out.reset();
        else
            knock_out = parse_double(key, value);
    } else if (key == "r0") {
        r0 = parse_double(key, value);
    } else if (key == "kappa") {
        kappa = parse_double(key, value);
    } else if (key == "theta") {
        theta = parse_double(key, value);
    } else if (key == "cir_vol") {
        cir_vol = parse_double(key, value);
    } else if (key == "construction") {
        if (value != "auto" && value != "pca" && value != "random-walk")
            fail(ErrorCode::config, "construction must be auto, pca or random-walk");
        construction = std::string(value);
    } else {
        fail(ErrorCode::config, "unknown scenario key '" + std::string(key) + "'");
    }
}

std::size_t ScenarioSpec::dimension() const noexcept { return is_basket(payout) ? assets : steps; }

Scenario ScenarioSpec::build(ConstructionKind kind) const {
    try {
        const BsModel bs{spot, vol, rate, maturity};
        Payout p{payout, strike, knock_out};
        if (payout == PayoutKind::cir_cap)
            return Scenario::cir(CirModel{r0, kappa, theta, cir_vol, TimeGrid{steps, maturity}}, p, kind);
        if (is_basket(payout)) return Scenario::basket(bs, assets, correlation, p, kind);
        return Scenario::single_asset(bs, TimeGrid{steps, maturity}, p, kind);
    } catch (const Error& e) {
        if (e.code() == ErrorCode::config) throw;
        fail(ErrorCode::config, std::string("invalid scenario: ") + e.what());
    }
}

std::optional<ScenarioSpec> builtin_scenario(std::string_view name) {
    ScenarioSpec s;
    s.name = std::string(name);
    if (name == "straddle") {
        s.payout = PayoutKind::straddle;
        s.steps = 1;
    } else if (name == "asian") {
        s.payout = PayoutKind::asian_call;
        s.steps = 16;
    } else if (name == "asian-ko") {
        s.payout = PayoutKind::asian_knockout;
        s.steps = 16;
        s.strike = 140.0;
        s.knock_out = 170.0;
    } else if (name == "asian-straddle") {
        s.payout = PayoutKind::asian_straddle;
        s.steps = 16;
    } else if (name == "basket-avg") {
        s.payout = PayoutKind::basket_average;
        s.assets = 16;
    } else if (name == "basket-max") {
        s.payout = PayoutKind::basket_max;
        s.assets = 2;
        s.strike = 200.0;
    } else if (name == "cir-cap") {
        s.payout = PayoutKind::cir_cap;
        s.steps = 16;
        s.strike = 0.07;
    } else {
        return std::nullopt;
    }
    return s;
}

ScenarioSpec parse_scenario(std::istream& in) {
    std::vector<std::pair<std::string, std::string>> entries;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view v = line;
        if (const auto hash = v.find('#'); hash != std::string_view::npos) v = v.substr(0, hash);
        v = trim(v);
        if (v.empty()) continue;
        const auto eq = v.find('=');
        if (eq == std::string_view::npos)
            fail(ErrorCode::config, "line " + std::to_string(line_no) + ": expected key=value");
        entries.emplace_back(std::string(trim(v.substr(0, eq))), std::string(trim(v.substr(eq + 1))));
    }
    ScenarioSpec spec;
    // The base scenario applies first wherever it appears.
    std::stable_partition(entries.begin(), entries.end(), [](const auto& e) { return e.first == "scenario"; });
    for (const auto& [k, v] : entries) spec.set(k, v);
    return spec;
}

ScenarioSpec load_scenario(const std::string& name_or_path) {
    if (auto builtin = builtin_scenario(name_or_path)) return *builtin;
    std::ifstream in(name_or_path);
    if (!in) fail(ErrorCode::config, "cannot open scenario '" + name_or_path + "'");
    return parse_scenario(in);
}

void MethodOptions::validate() const {
    if (n < 1) fail(ErrorCode::config, "N must be positive");
    if (m == 1) fail(ErrorCode::config, "M must be at least 2");
    if (!(beta >= 0.0 && beta < 1.0)) fail(ErrorCode::config, "beta must lie in [0,1)");
    if (!(hmult >= 0.0)) fail(ErrorCode::config, "bin-width multiplier must be positive");
    if (!(eps > 0.0 && eps < 1.0)) fail(ErrorCode::config, "eps must lie in (0,1)");
    if (u_size > 3) fail(ErrorCode::config, "u-size must be 1, 2 or 3");
}

bool RunReport::suppressed() const noexcept { return failures * 5 > runs; }

void RunReport::compare_to(const RunReport& mc) {
    vr.reset();
    rce.reset();
    if (suppressed() || mc.suppressed() || !(variance > 0.0) || !(mc.variance >= 0.0)) return;
    vr = mc.variance / variance;
    if (time_s > 0.0 && mc.time_s > 0.0) rce = *vr * mc.time_s / time_s;
}

PreparedScenario::PreparedScenario(ScenarioSpec spec) : spec_(std::move(spec)) {
    const ConstructionKind walk_kind =
        spec_.construction == "pca" ? ConstructionKind::pca : ConstructionKind::random_walk;
    const ConstructionKind is_kind =
        spec_.construction == "random-walk" ? ConstructionKind::random_walk : ConstructionKind::pca;
    walk_ = std::make_unique<Scenario>(spec_.build(walk_kind));
    pca_ = std::make_unique<Scenario>(spec_.build(is_kind));
    walk_phi_ = integrand_of(*walk_);
    pca_phi_ = integrand_of(*pca_);
}

const Scenario& PreparedScenario::scenario_for(Method method) const noexcept {
    return method == Method::mc ? *walk_ : *pca_;
}

const Integrand& PreparedScenario::integrand_for(Method method) const noexcept {
    return method == Method::mc ? walk_phi_ : pca_phi_;
}

std::size_t PreparedScenario::auto_u_size() const {
    if (!u_size_) {
        PointStream stream = PointStream::pseudo(2 * pca_phi_.dimension, derive_seed(0x5eed, 9));
        const EdReport r = effective_dimension(pca_phi_, 0.9, std::size_t{1} << 14, stream, 3);
        u_size_ = std::clamp<std::size_t>(r.ed, 1, 3);
    }
    return *u_size_;
}

std::size_t resolve_trial_size(Method method, const MethodOptions& options) {
    if (options.m > 0) return options.m;
    if (method == Method::qlsis || method == Method::qnpis) return 1024;
    return default_trial_size(options.n);
}

double resolve_hmult(Method method, const MethodOptions& options, PayoutKind payout) {
    if (options.hmult > 0.0) return options.hmult;
    if (method != Method::qnpis) return 1.0;
    const bool bimodal = payout == PayoutKind::straddle || payout == PayoutKind::asian_straddle;
    return bimodal ? 2.0 : 3.0;
}

std::size_t resolve_u_size(const PreparedScenario& prepared, const MethodOptions& options) {
    const std::size_t d = prepared.spec().dimension();
    const std::size_t k = options.u_size > 0 ? options.u_size : prepared.auto_u_size();
    return std::min(k, d);
}

RunResult run_once(const PreparedScenario& prepared, Method method, const MethodOptions& options,
                   std::uint64_t seed) {
    options.validate();
    const Integrand& phi = prepared.integrand_for(method);
    const std::size_t d = phi.dimension;
    const SamplerKind sampler = uses_sobol(method) ? SamplerKind::shifted_sobol : SamplerKind::pseudo;
    RunResult result;

    const bool crude = method == Method::mc || method == Method::qmc;
    const std::size_t k = crude ? 0 : resolve_u_size(prepared, options);
    result.u_size = k;
    if (!crude) result.m = resolve_trial_size(method, options);

    const auto start = std::chrono::steady_clock::now();
    try {
        IsEstimate e;
        if (crude) {
            PointStream stream = PointStream::make(sampler, d, derive_seed(seed, sampler == SamplerKind::pseudo ? 2 : 3));
            std::vector<double> uniforms(d), z(d), terms(options.n);
            for (std::size_t i = 0; i < options.n; ++i) {
                stream.next(uniforms);
                uniforms_to_normals(uniforms, z);
                terms[i] = phi(z);
            }
            e = summarize(terms);
        } else if (method == Method::lsis || method == Method::qlsis) {
            e = lsis_run(phi, Subspace::leading(k), options.n, result.m, sampler, seed);
        } else {
            NpisConfig c;
            c.n = options.n;
            c.m = result.m;
            c.eps = options.eps;
            c.beta = options.beta;
            c.hmult = resolve_hmult(method, options, prepared.spec().payout);
            c.stage2 = sampler;
            e = npis_run(phi, Subspace::leading(k), c, seed);
        }
        result.estimate = e.mean;
        result.std_error = e.std_error;
    } catch (const TrialFailure&) {
        result.failed = true;
    }
    result.time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

namespace {

std::vector<RunResult> run_many(const PreparedScenario& prepared, Method method, const MethodOptions& options,
                                std::size_t runs, std::uint64_t base_seed, std::size_t threads) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min(threads, runs);
    if (method != Method::mc && method != Method::qmc) (void)resolve_u_size(prepared, options);

    std::vector<RunResult> results(runs);
    if (threads <= 1) {
        for (std::size_t r = 0; r < runs; ++r) results[r] = run_once(prepared, method, options, base_seed + r);
        return results;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t)
        pool.emplace_back([&] {
            for (std::size_t r; (r = next.fetch_add(1)) < runs;) {
                try {
                    results[r] = run_once(prepared, method, options, base_seed + r);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error) error = std::current_exception();
                }
            }
        });
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
    return results;
}

RunReport reduce(const PreparedScenario& prepared, Method method, const MethodOptions& options,
                 const std::vector<RunResult>& results) {
    RunReport report;
    report.scenario = prepared.spec().name;
    report.method = method;
    report.n = options.n;
    report.runs = results.size();
    double time = 0.0;
    for (const RunResult& r : results) {
        time += r.time_s;
        if (r.failed)
            ++report.failures;
        else
            report.estimates.push_back(r.estimate);
    }
    report.time_s = results.empty() ? 0.0 : time / static_cast<double>(results.size());
    const std::size_t ok = report.estimates.size();
    if (ok > 0) {
        double mean = 0.0;
        for (double v : report.estimates) mean += v;
        mean /= static_cast<double>(ok);
        double ss = 0.0;
        for (double v : report.estimates) ss += (v - mean) * (v - mean);
        report.mean = mean;
        report.variance = ok > 1 ? ss / static_cast<double>(ok - 1) : 0.0;
    }
    return report;
}

} // namespace

RunReport run_benchmark(const PreparedScenario& prepared, Method method, const MethodOptions& options,
                        std::size_t runs, std::uint64_t base_seed, std::size_t threads) {
    if (runs < 2) fail(ErrorCode::config, "a benchmark needs at least two runs");
    return reduce(prepared, method, options, run_many(prepared, method, options, runs, base_seed, threads));
}

namespace {

// Median wall time, robust against a slow outlier.
double run_time(const PreparedScenario& prepared, Method method, const MethodOptions& options, std::uint64_t seed,
                int reps) {
    std::vector<double> t;
    for (int i = 0; i < reps; ++i)
        t.push_back(run_once(prepared, method, options, seed + static_cast<std::uint64_t>(i)).time_s);
    std::sort(t.begin(), t.end());
    return t[t.size() / 2];
}

} // namespace

std::size_t calibrate_n(const PreparedScenario& prepared, Method method, const MethodOptions& options,
                        double budget_s, std::uint64_t seed) {
    if (!(budget_s > 0.0)) fail(ErrorCode::config, "time budget must be positive");
    if (method != Method::mc && method != Method::qmc) (void)resolve_u_size(prepared, options);
    MethodOptions o = options;
    o.n = 64;
    double t = run_time(prepared, method, o, seed, 3);
    if (t > budget_s)
        fail(ErrorCode::calibration, std::string("method ") + to_string(method) + " exceeds the budget at N = 64");
    while (t < budget_s / 4.0 && o.n < (std::size_t{1} << 28)) {
        o.n *= 2;
        t = run_time(prepared, method, o, seed, 3);
    }
    for (int it = 0; it < 8; ++it) {
        if (std::fabs(t - budget_s) <= 0.05 * budget_s) break;
        const double scaled = static_cast<double>(o.n) * budget_s / std::max(t, 1e-9);
        o.n = std::max<std::size_t>(64, static_cast<std::size_t>(std::llround(scaled)));
        t = run_time(prepared, method, o, seed, 5);
    }
    return o.n;
}

EqualTimeResult equal_time_benchmark(const PreparedScenario& prepared, const std::vector<Method>& methods,
                                     const MethodOptions& options, double budget_s, std::size_t runs,
                                     std::uint64_t base_seed) {
    if (runs < 2) fail(ErrorCode::config, "a benchmark needs at least two runs");
    std::vector<Method> order = methods;
    if (std::find(order.begin(), order.end(), Method::mc) == order.end()) order.insert(order.begin(), Method::mc);

    EqualTimeResult out;
    // Calibration seeds sit far from the protocol seeds.
    const std::uint64_t calibration_seed = base_seed + (std::uint64_t{1} << 40);
    for (Method m : order) {
        MethodOptions o = options;
        o.n = calibrate_n(prepared, m, options, budget_s, calibration_seed);
        out.calibrated_n.push_back(o.n);
        out.reports.push_back(reduce(prepared, m, o, run_many(prepared, m, o, runs, base_seed, 1)));
    }
    const RunReport mc = out.reports[static_cast<std::size_t>(
        std::find(order.begin(), order.end(), Method::mc) - order.begin())];
    for (RunReport& r : out.reports) r.compare_to(mc);
    return out;
}

namespace {

std::string number(double v, const char* fmt = "%.10g") {
    char buf[64];
    std::snprintf(buf, sizeof buf, fmt, v);
    return buf;
}

} // namespace

void write_csv_header(std::ostream& out) { out << "scenario,method,N,R,mean,var,time_s,VR,RCE,failures\n"; }

void write_csv_row(std::ostream& out, const RunReport& report, const CsvOptions& options) {
    const bool hidden = report.suppressed();
    out << report.scenario << ',' << to_string(report.method) << ',' << report.n << ',' << report.runs << ','
        << (hidden ? "-" : number(report.mean)) << ',' << (hidden ? "-" : number(report.variance)) << ','
        << (options.timing ? number(report.time_s, "%.6f") : "-") << ','
        << (report.vr ? number(*report.vr, "%.6g") : "-") << ','
        << (options.timing && report.rce ? number(*report.rce, "%.6g") : "-") << ',' << report.failures << '\n';
}

void dump_proposal(const PreparedScenario& prepared, const MethodOptions& options, std::uint64_t seed,
                   std::ostream& out) {
    const Integrand& phi = prepared.integrand_for(Method::npis);
    NpisConfig c;
    c.n = options.n;
    c.m = resolve_trial_size(Method::npis, options);
    c.eps = options.eps;
    c.beta = options.beta;
    c.hmult = resolve_hmult(Method::npis, options, prepared.spec().payout);
    PointStream stream = PointStream::pseudo(phi.dimension, derive_seed(seed, 1));
    const ProposalEstimate p = stage1(phi, Subspace::leading(resolve_u_size(prepared, options)), c, stream);
    p.density.dump(out);
}

} // namespace npis
