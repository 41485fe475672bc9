#include "npis/npis.h"

#include "npis/error.hpp"
#include "npis/harness.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <new>
#include <sstream>
#include <string>

struct npis_scenario {
    npis::ScenarioSpec spec;
    std::unique_ptr<npis::PreparedScenario> prepared;

    const npis::PreparedScenario& get() {
        if (!prepared) prepared = std::make_unique<npis::PreparedScenario>(spec);
        return *prepared;
    }
};

struct npis_ed_report {
    npis::EdReport report;
};

namespace {

thread_local std::string last_error;

npis_status status_of(npis::ErrorCode code) {
    using npis::ErrorCode;
    switch (code) {
    case ErrorCode::trial_failure: return NPIS_ERR_TRIAL_FAILURE;
    case ErrorCode::config: return NPIS_ERR_CONFIG;
    case ErrorCode::domain:
    case ErrorCode::empty_estimate:
    case ErrorCode::degenerate_proposal:
    case ErrorCode::non_convergence: return NPIS_ERR_DOMAIN;
    case ErrorCode::calibration: return NPIS_ERR_CALIBRATION;
    default: return NPIS_ERR_INVALID_ARGUMENT;
    }
}

template <class F>
npis_status guarded(F&& f) {
    last_error.clear();
    try {
        f();
        return NPIS_OK;
    } catch (const npis::Error& e) {
        last_error = e.what();
        return status_of(e.code());
    } catch (const std::bad_alloc&) {
        last_error = "out of memory";
    } catch (const std::exception& e) {
        last_error = e.what();
    } catch (...) {
        last_error = "unknown error";
    }
    return NPIS_ERR_INTERNAL;
}

void need(const void* p, const char* what) {
    if (!p) npis::fail(npis::ErrorCode::invalid_argument, std::string(what) + " must not be null");
}

npis::Method method_of(npis_method m) {
    if (m < NPIS_METHOD_MC || m > NPIS_METHOD_QNPIS) npis::fail(npis::ErrorCode::invalid_argument, "unknown method");
    return static_cast<npis::Method>(m);
}

npis::MethodOptions options_of(const npis_options& o) {
    npis::MethodOptions m;
    m.n = o.n;
    m.m = o.m;
    m.beta = o.beta;
    m.hmult = o.hmult;
    m.eps = o.eps;
    m.u_size = o.u_size;
    m.validate();
    return m;
}

npis_report report_of(const npis::RunReport& r) {
    npis_report out{};
    out.method = static_cast<npis_method>(r.method);
    out.n = r.n;
    out.runs = r.runs;
    out.failures = r.failures;
    out.suppressed = r.suppressed() ? 1 : 0;
    out.mean = r.mean;
    out.variance = r.variance;
    out.time_s = r.time_s;
    out.has_vr = r.vr.has_value();
    out.vr = r.vr.value_or(0.0);
    out.has_rce = r.rce.has_value();
    out.rce = r.rce.value_or(0.0);
    return out;
}

npis::RunReport report_from(const npis_scenario* s, const npis_report& r) {
    npis::RunReport out;
    out.scenario = s ? s->spec.name : std::string();
    out.method = method_of(r.method);
    out.n = r.n;
    out.runs = r.runs;
    out.failures = r.failures;
    out.mean = r.mean;
    out.variance = r.variance;
    out.time_s = r.time_s;
    if (r.has_vr) out.vr = r.vr;
    if (r.has_rce) out.rce = r.rce;
    return out;
}

} // namespace

extern "C" {

void npis_options_init(npis_options* options) {
    if (!options) return;
    options->method = NPIS_METHOD_NPIS;
    options->n = 1024;
    options->m = 0;
    options->beta = 0.05;
    options->hmult = 0.0;
    options->eps = 1e-4;
    options->u_size = 0;
    options->threads = 0;
}

const char* npis_method_name(npis_method method) {
    if (method < NPIS_METHOD_MC || method > NPIS_METHOD_QNPIS) return "unknown";
    return npis::to_string(static_cast<npis::Method>(method));
}

npis_status npis_method_parse(const char* name, npis_method* out) {
    return guarded([&] {
        need(name, "name");
        need(out, "out");
        const auto m = npis::parse_method(name);
        if (!m) npis::fail(npis::ErrorCode::config, std::string("unknown method '") + name + "'");
        *out = static_cast<npis_method>(*m);
    });
}

npis_status npis_scenario_load(const char* name_or_path, npis_scenario** out) {
    return guarded([&] {
        need(name_or_path, "scenario");
        need(out, "out");
        *out = nullptr;
        auto s = std::make_unique<npis_scenario>();
        s->spec = npis::load_scenario(name_or_path);
        s->spec.build(npis::ConstructionKind::random_walk); // validates parameters early
        *out = s.release();
    });
}

npis_status npis_scenario_set(npis_scenario* scenario, const char* key, const char* value) {
    return guarded([&] {
        need(scenario, "scenario");
        need(key, "key");
        need(value, "value");
        npis::ScenarioSpec next = scenario->spec;
        next.set(key, value);
        next.build(npis::ConstructionKind::random_walk);
        scenario->spec = std::move(next);
        scenario->prepared.reset();
    });
}

size_t npis_scenario_dimension(const npis_scenario* scenario) { return scenario ? scenario->spec.dimension() : 0; }

void npis_scenario_free(npis_scenario* scenario) { delete scenario; }

npis_status npis_price(npis_scenario* scenario, const npis_options* options, uint64_t seed, npis_price_result* out) {
    return guarded([&] {
        need(scenario, "scenario");
        need(options, "options");
        need(out, "out");
        const npis::MethodOptions o = options_of(*options);
        const npis::RunResult r = npis::run_once(scenario->get(), method_of(options->method), o, seed);
        if (r.failed) throw npis::TrialFailure("trial stage produced no positive payout");
        *out = npis_price_result{r.estimate, r.std_error, r.time_s, o.n, r.m, r.u_size};
    });
}

npis_status npis_benchmark(npis_scenario* scenario, const npis_options* options, size_t runs, uint64_t seed,
                           npis_report* out, npis_report* reference) {
    return guarded([&] {
        need(scenario, "scenario");
        need(options, "options");
        need(out, "out");
        const npis::MethodOptions o = options_of(*options);
        const npis::Method method = method_of(options->method);
        npis::RunReport r = npis::run_benchmark(scenario->get(), method, o, runs, seed, options->threads);
        if (reference) {
            npis::RunReport mc = method == npis::Method::mc
                                     ? r
                                     : npis::run_benchmark(scenario->get(), npis::Method::mc, o, runs, seed,
                                                           options->threads);
            mc.compare_to(mc);
            r.compare_to(mc);
            *reference = report_of(mc);
        }
        *out = report_of(r);
    });
}

npis_status npis_equal_time(npis_scenario* scenario, const npis_options* options, const npis_method* methods,
                            size_t count, double budget_s, size_t runs, uint64_t seed, npis_report* out,
                            size_t* calibrated_n, size_t* written) {
    return guarded([&] {
        need(scenario, "scenario");
        need(options, "options");
        need(methods, "methods");
        need(out, "out");
        need(written, "written");
        std::vector<npis::Method> list;
        for (size_t i = 0; i < count; ++i) list.push_back(method_of(methods[i]));
        const auto result =
            npis::equal_time_benchmark(scenario->get(), list, options_of(*options), budget_s, runs, seed);
        for (size_t i = 0; i < result.reports.size(); ++i) {
            out[i] = report_of(result.reports[i]);
            if (calibrated_n) calibrated_n[i] = result.calibrated_n[i];
        }
        *written = result.reports.size();
    });
}

const char* npis_csv_header(void) { return "scenario,method,N,R,mean,var,time_s,VR,RCE,failures\n"; }

size_t npis_format_report_csv(const npis_scenario* scenario, const npis_report* report, int timing, char* buffer,
                              size_t size) {
    std::string line;
    const npis_status st = guarded([&] {
        need(report, "report");
        std::ostringstream os;
        npis::write_csv_row(os, report_from(scenario, *report), npis::CsvOptions{timing != 0});
        line = os.str();
    });
    if (st != NPIS_OK) return 0;
    if (buffer && size > 0) {
        const size_t n = std::min(size - 1, line.size());
        std::memcpy(buffer, line.data(), n);
        buffer[n] = '\0';
    }
    return line.size();
}

npis_status npis_effdim(npis_scenario* scenario, double gamma, size_t l, uint64_t seed, npis_ed_report** out) {
    return guarded([&] {
        need(scenario, "scenario");
        need(out, "out");
        *out = nullptr;
        const npis::Integrand& phi = scenario->get().integrand_for(npis::Method::npis);
        npis::PointStream stream = npis::PointStream::pseudo(2 * phi.dimension, seed);
        auto r = std::make_unique<npis_ed_report>();
        r->report = npis::effective_dimension(phi, gamma, l, stream);
        *out = r.release();
    });
}

size_t npis_ed_value(const npis_ed_report* report) { return report ? report->report.ed : 0; }

size_t npis_ed_profile_size(const npis_ed_report* report) { return report ? report->report.gamma_hat.size() : 0; }

double npis_ed_gamma_hat(const npis_ed_report* report, size_t k) {
    return report && k < report->report.gamma_hat.size() ? report->report.gamma_hat[k] : 0.0;
}

double npis_ed_gamma_se(const npis_ed_report* report, size_t k) {
    return report && k < report->report.gamma_se.size() ? report->report.gamma_se[k] : 0.0;
}

double npis_ed_sigma2(const npis_ed_report* report) { return report ? report->report.sigma2 : 0.0; }

void npis_ed_report_free(npis_ed_report* report) { delete report; }

npis_status npis_dump_proposal(npis_scenario* scenario, const npis_options* options, uint64_t seed,
                               const char* path) {
    return guarded([&] {
        need(scenario, "scenario");
        need(options, "options");
        need(path, "path");
        std::ofstream out(path);
        if (!out) npis::fail(npis::ErrorCode::config, std::string("cannot write '") + path + "'");
        npis::dump_proposal(scenario->get(), options_of(*options), seed, out);
    });
}

const char* npis_last_error(void) { return last_error.c_str(); }

} // extern "C"
