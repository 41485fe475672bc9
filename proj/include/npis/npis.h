#ifndef NPIS_NPIS_H
#define NPIS_NPIS_H

/* C interface to the NPIS pricing engine. All handles are opaque; every
 * function returns a status code and leaves a message for npis_last_error()
 * on failure. */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(NPIS_BUILDING_LIBRARY)
#    define NPIS_API __declspec(dllexport)
#  else
#    define NPIS_API __declspec(dllimport)
#  endif
#else
#  define NPIS_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum npis_status {
    NPIS_OK = 0,
    NPIS_ERR_INVALID_ARGUMENT = 1,
    NPIS_ERR_TRIAL_FAILURE = 2,
    NPIS_ERR_CONFIG = 3,
    NPIS_ERR_DOMAIN = 4,
    NPIS_ERR_CALIBRATION = 5,
    NPIS_ERR_INTERNAL = 6
} npis_status;

typedef enum npis_method {
    NPIS_METHOD_MC = 0,
    NPIS_METHOD_QMC = 1,
    NPIS_METHOD_LSIS = 2,
    NPIS_METHOD_NPIS = 3,
    NPIS_METHOD_QLSIS = 4,
    NPIS_METHOD_QNPIS = 5
} npis_method;

typedef struct npis_scenario npis_scenario;
typedef struct npis_ed_report npis_ed_report;

typedef struct npis_options {
    npis_method method;
    size_t n;
    size_t m;        /* 0: method default */
    double beta;
    double hmult;    /* 0: method default */
    double eps;
    size_t u_size;   /* 0: from the effective dimension */
    size_t threads;  /* 0: hardware concurrency */
} npis_options;

typedef struct npis_price_result {
    double estimate;
    double std_error;
    double time_s;
    size_t n;
    size_t m;
    size_t u_size;
} npis_price_result;

typedef struct npis_report {
    npis_method method;
    size_t n;
    size_t runs;
    size_t failures;
    int suppressed;   /* more than 20% failed runs */
    double mean;
    double variance;
    double time_s;
    int has_vr;
    double vr;
    int has_rce;
    double rce;
} npis_report;

NPIS_API void npis_options_init(npis_options* options);

NPIS_API const char* npis_method_name(npis_method method);
NPIS_API npis_status npis_method_parse(const char* name, npis_method* out);

/* Built-in scenario name or path to a key=value file. */
NPIS_API npis_status npis_scenario_load(const char* name_or_path, npis_scenario** out);
NPIS_API npis_status npis_scenario_set(npis_scenario* scenario, const char* key, const char* value);
NPIS_API size_t npis_scenario_dimension(const npis_scenario* scenario);
NPIS_API void npis_scenario_free(npis_scenario* scenario);

NPIS_API npis_status npis_price(npis_scenario* scenario, const npis_options* options, uint64_t seed,
                                npis_price_result* out);

/* Runs seeds seed..seed+runs-1. When `reference` is non-null a crude-MC
 * benchmark under the same protocol is written there and VR/RCE filled. */
NPIS_API npis_status npis_benchmark(npis_scenario* scenario, const npis_options* options, size_t runs, uint64_t seed,
                                    npis_report* out, npis_report* reference);

/* Equal-time comparison of `count` methods; crude MC is added when absent.
 * `out` must hold count + 1 reports; *written receives the number used and
 * calibrated_n (optional, same length) the calibrated sample sizes. */
NPIS_API npis_status npis_equal_time(npis_scenario* scenario, const npis_options* options,
                                     const npis_method* methods, size_t count, double budget_s, size_t runs,
                                     uint64_t seed, npis_report* out, size_t* calibrated_n, size_t* written);

/* CSV line (no header) for a report; `timing` = 0 hides the wall-clock columns.
 * Writes at most `size` bytes including the terminator and returns the full length. */
NPIS_API size_t npis_format_report_csv(const npis_scenario* scenario, const npis_report* report, int timing,
                                       char* buffer, size_t size);
NPIS_API const char* npis_csv_header(void);

NPIS_API npis_status npis_effdim(npis_scenario* scenario, double gamma, size_t l, uint64_t seed,
                                 npis_ed_report** out);
NPIS_API size_t npis_ed_value(const npis_ed_report* report);
NPIS_API size_t npis_ed_profile_size(const npis_ed_report* report);
NPIS_API double npis_ed_gamma_hat(const npis_ed_report* report, size_t k);
NPIS_API double npis_ed_gamma_se(const npis_ed_report* report, size_t k);
NPIS_API double npis_ed_sigma2(const npis_ed_report* report);
NPIS_API void npis_ed_report_free(npis_ed_report* report);

/* Stage-1 proposal written as "coordinates height" lines to `path`. */
NPIS_API npis_status npis_dump_proposal(npis_scenario* scenario, const npis_options* options, uint64_t seed,
                                        const char* path);

/* Message for the last failing call on this thread ("" if none). */
NPIS_API const char* npis_last_error(void);

#ifdef __cplusplus
}
#endif

#endif
