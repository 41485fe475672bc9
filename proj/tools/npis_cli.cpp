// Command-line front end; links only the C interface.

#include "npis/npis.h"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace {

constexpr int kExitConfig = 3;

struct Common {
    std::string scenario = "straddle";
    std::string method = "npis";
    std::string sampler;
    std::size_t n = 1024;
    std::size_t m = 0;
    double beta = 0.05;
    double hmult = 0.0;
    double eps = 1e-4;
    std::size_t u_size = 0;
    std::size_t threads = 0;
    std::uint64_t seed = 1;
    std::string out;
    std::vector<std::string> sets;
    bool no_timing = false;
};

void add_common(CLI::App* app, Common& c, bool with_method) {
    app->add_option("--scenario", c.scenario, "built-in scenario name or key=value file");
    if (with_method) {
        app->add_option("--method", c.method, "mc, qmc, lsis, npis, qlsis or qnpis");
        app->add_option("--sampler", c.sampler, "mc or qmc (qmc selects the Sobol variant of --method)")
            ->check(CLI::IsMember({"mc", "qmc"}));
    }
    app->add_option("--N", c.n, "stage-2 sample size");
    app->add_option("--M", c.m, "trial / fitting sample size (0: default)");
    app->add_option("--beta", c.beta, "defensive mixture weight");
    app->add_option("--hmult", c.hmult, "bin-width multiplier (0: default)");
    app->add_option("--eps", c.eps, "trial-box tail mass");
    app->add_option("--u-size", c.u_size, "subspace size (0: from the effective dimension)");
    app->add_option("--threads", c.threads, "worker threads (0: all cores)");
    app->add_option("--seed", c.seed, "base seed");
    app->add_option("--out", c.out, "output file (default: stdout)");
    app->add_option("--set", c.sets, "scenario override key=value (repeatable)");
}

int fail_with(npis_status status) {
    std::cerr << "error: " << npis_last_error() << '\n';
    if (status == NPIS_ERR_TRIAL_FAILURE) return 2;
    if (status == NPIS_ERR_CONFIG || status == NPIS_ERR_INVALID_ARGUMENT) return kExitConfig;
    return 1;
}

struct Session {
    npis_scenario* scenario = nullptr;
    npis_options options{};
    ~Session() { npis_scenario_free(scenario); }
};

npis_status open(const Common& c, Session& s, bool with_method) {
    npis_status st = npis_scenario_load(c.scenario.c_str(), &s.scenario);
    if (st != NPIS_OK) return st;
    for (const std::string& kv : c.sets) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) {
            std::cerr << "error: --set expects key=value, got '" << kv << "'\n";
            return NPIS_ERR_CONFIG;
        }
        st = npis_scenario_set(s.scenario, kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str());
        if (st != NPIS_OK) return st;
    }
    npis_options_init(&s.options);
    if (with_method) {
        st = npis_method_parse(c.method.c_str(), &s.options.method);
        if (st != NPIS_OK) return st;
        if (c.sampler == "qmc") {
            switch (s.options.method) {
            case NPIS_METHOD_MC: s.options.method = NPIS_METHOD_QMC; break;
            case NPIS_METHOD_LSIS: s.options.method = NPIS_METHOD_QLSIS; break;
            case NPIS_METHOD_NPIS: s.options.method = NPIS_METHOD_QNPIS; break;
            default: break;
            }
        }
    }
    s.options.n = c.n;
    s.options.m = c.m;
    s.options.beta = c.beta;
    s.options.hmult = c.hmult;
    s.options.eps = c.eps;
    s.options.u_size = c.u_size;
    s.options.threads = c.threads;
    return NPIS_OK;
}

std::string csv_row(const npis_scenario* scenario, const npis_report& r, bool timing) {
    const std::size_t len = npis_format_report_csv(scenario, &r, timing ? 1 : 0, nullptr, 0);
    std::string line(len + 1, '\0');
    npis_format_report_csv(scenario, &r, timing ? 1 : 0, line.data(), line.size());
    line.resize(len);
    return line;
}

int emit(const std::string& text, const std::string& path) {
    if (path.empty()) {
        std::cout << text;
        return 0;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) {
        std::cerr << "error: cannot write '" << path << "'\n";
        return kExitConfig;
    }
    f << text;
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Nonparametric partial importance sampling for option pricing"};
    app.require_subcommand(1);

    Common price_opts, bench_opts, et_opts, ed_opts;
    std::string dump_path;
    auto* price = app.add_subcommand("price", "single-run price with a within-run standard error");
    add_common(price, price_opts, true);
    price->add_option("--dump-density", dump_path, "write the stage-1 LBFP proposal to this file");

    std::size_t runs = 200;
    auto* bench = app.add_subcommand("benchmark", "multi-run protocol with VR/RCE against crude MC");
    add_common(bench, bench_opts, true);
    bench->add_option("--runs", runs, "independent runs");
    bench->add_flag("--no-timing", bench_opts.no_timing, "write time_s and RCE as '-'");

    double budget = 0.5;
    std::size_t et_runs = 30;
    std::string methods = "mc,lsis,npis";
    auto* et = app.add_subcommand("equal-time", "methods compared at a fixed wall-time budget per run");
    add_common(et, et_opts, false);
    et->add_option("--budget", budget, "seconds per run");
    et->add_option("--runs", et_runs, "independent runs per method");
    et->add_option("--methods", methods, "comma-separated methods");

    double gamma = 0.9;
    std::size_t l = 16384;
    auto* ed = app.add_subcommand("effdim", "effective dimension and the Gamma profile");
    add_common(ed, ed_opts, false);
    ed->add_option("--gamma", gamma, "variance threshold");
    ed->add_option("--l", l, "sample pairs");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    Session s;
    if (price->parsed()) {
        if (const auto st = open(price_opts, s, true); st != NPIS_OK) return fail_with(st);
        npis_price_result r{};
        if (const auto st = npis_price(s.scenario, &s.options, price_opts.seed, &r); st != NPIS_OK) return fail_with(st);
        if (!dump_path.empty())
            if (const auto st = npis_dump_proposal(s.scenario, &s.options, price_opts.seed, dump_path.c_str());
                st != NPIS_OK)
                return fail_with(st);
        char buf[256];
        std::snprintf(buf, sizeof buf, "method=%s N=%zu estimate=%.10g se=%.6g time_s=%.6f\n",
                      npis_method_name(s.options.method), r.n, r.estimate, r.std_error, r.time_s);
        return emit(buf, price_opts.out);
    }

    if (bench->parsed()) {
        if (const auto st = open(bench_opts, s, true); st != NPIS_OK) return fail_with(st);
        npis_report report{}, reference{};
        if (const auto st = npis_benchmark(s.scenario, &s.options, runs, bench_opts.seed, &report, &reference);
            st != NPIS_OK)
            return fail_with(st);
        std::string text = npis_csv_header();
        if (s.options.method != NPIS_METHOD_MC) text += csv_row(s.scenario, reference, !bench_opts.no_timing);
        text += csv_row(s.scenario, report, !bench_opts.no_timing);
        return emit(text, bench_opts.out);
    }

    if (et->parsed()) {
        if (const auto st = open(et_opts, s, false); st != NPIS_OK) return fail_with(st);
        std::vector<npis_method> list;
        std::stringstream ss(methods);
        for (std::string name; std::getline(ss, name, ',');) {
            npis_method m;
            if (const auto st = npis_method_parse(name.c_str(), &m); st != NPIS_OK) return fail_with(st);
            list.push_back(m);
        }
        std::vector<npis_report> reports(list.size() + 1);
        std::vector<std::size_t> calibrated(list.size() + 1);
        std::size_t written = 0;
        if (const auto st = npis_equal_time(s.scenario, &s.options, list.data(), list.size(), budget, et_runs,
                                            et_opts.seed, reports.data(), calibrated.data(), &written);
            st != NPIS_OK)
            return fail_with(st);
        std::string text = npis_csv_header();
        for (std::size_t i = 0; i < written; ++i) text += csv_row(s.scenario, reports[i], true);
        return emit(text, et_opts.out);
    }

    if (const auto st = open(ed_opts, s, false); st != NPIS_OK) return fail_with(st);
    npis_ed_report* report = nullptr;
    if (const auto st = npis_effdim(s.scenario, gamma, l, ed_opts.seed, &report); st != NPIS_OK) return fail_with(st);
    std::string text = "k,gamma_hat,se,fraction\n";
    const double sigma2 = npis_ed_sigma2(report);
    char buf[160];
    for (std::size_t k = 0; k < npis_ed_profile_size(report); ++k) {
        const double g = npis_ed_gamma_hat(report, k);
        std::snprintf(buf, sizeof buf, "%zu,%.10g,%.6g,%.6f\n", k + 1, g, npis_ed_gamma_se(report, k),
                      sigma2 > 0.0 ? g / sigma2 : 0.0);
        text += buf;
    }
    std::snprintf(buf, sizeof buf, "# ED=%zu sigma2=%.10g\n", npis_ed_value(report), sigma2);
    text += buf;
    npis_ed_report_free(report);
    return emit(text, ed_opts.out);
}
