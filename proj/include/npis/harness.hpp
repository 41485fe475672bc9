#pragma once

// Scenario configuration, the multi-run benchmark protocol, VR/RCE
// against crude MC, equal-time calibration, and CSV output.

#include "npis/effdim.hpp"
#include "npis/integrand.hpp"
#include "npis/models.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace npis {

enum class Method { mc, qmc, lsis, npis, qlsis, qnpis };

const char* to_string(Method method) noexcept;
std::optional<Method> parse_method(std::string_view name) noexcept;
bool uses_sobol(Method method) noexcept;
/// mc -> qmc, lsis -> qlsis, npis -> qnpis; QMC methods map to themselves.
Method with_sobol(Method method) noexcept;

/// Flat description of a pricing problem. Keys in config files and --set
/// overrides match the field names below.
struct ScenarioSpec {
    std::string name = "straddle";
    PayoutKind payout = PayoutKind::straddle;
    double spot = 100.0;
    double vol = 0.3;
    double rate = 0.05;
    double maturity = 1.0;
    std::size_t steps = 1;
    std::size_t assets = 2;
    double correlation = 0.3;
    double strike = 100.0;
    std::optional<double> knock_out;
    double r0 = 0.07;
    double kappa = 0.2;
    double theta = 0.075;
    double cir_vol = 0.02;
    /// "auto" (random walk for mc, PCA otherwise), "pca" or "random-walk".
    std::string construction = "auto";

    /// Throws Error(config) for unknown keys or unparsable values.
    void set(std::string_view key, std::string_view value);
    Scenario build(ConstructionKind kind) const;
    std::size_t dimension() const noexcept;
};

/// straddle | asian | asian-ko | asian-straddle | basket-avg | basket-max | cir-cap
std::optional<ScenarioSpec> builtin_scenario(std::string_view name);

/// Built-in scenario name, or a key=value file ('#' comments; an optional
/// "scenario" key selects the built-in defaults the remaining keys override).
ScenarioSpec load_scenario(const std::string& name_or_path);
ScenarioSpec parse_scenario(std::istream& in);

struct MethodOptions {
    std::size_t n = 1024;
    std::size_t m = 0;      // 0: method default
    double beta = 0.05;
    double hmult = 0.0;     // 0: method default
    double eps = 1e-4;
    std::size_t u_size = 0; // 0: effective dimension clamped to [1, 3]

    void validate() const;
};

struct RunResult {
    double estimate = 0.0;
    double std_error = 0.0;
    double time_s = 0.0;
    bool failed = false;
    std::size_t m = 0;
    std::size_t u_size = 0;
};

struct RunReport {
    std::string scenario;
    Method method = Method::mc;
    std::size_t n = 0;
    std::size_t runs = 0;
    std::size_t failures = 0;
    double mean = 0.0;
    double variance = 0.0; // across successful runs, divisor R - 1
    double time_s = 0.0;   // mean wall time per run
    std::optional<double> vr;
    std::optional<double> rce;
    std::vector<double> estimates;

    /// More than 20% of runs failed: moments are not reported.
    bool suppressed() const noexcept;
    /// Fills VR and RCE against a crude-MC report.
    void compare_to(const RunReport& mc);
};

/// Scenario with both constructions built and the automatic |u| cached.
class PreparedScenario {
public:
    explicit PreparedScenario(ScenarioSpec spec);

    const ScenarioSpec& spec() const noexcept { return spec_; }
    /// Scenario used by `method` (random walk for mc under "auto").
    const Scenario& scenario_for(Method method) const noexcept;
    const Integrand& integrand_for(Method method) const noexcept;
    /// ED at gamma = 0.9, l = 2^14 (fixed seed) on the IS construction, clamped to [1, 3].
    std::size_t auto_u_size() const;

private:
    ScenarioSpec spec_;
    std::unique_ptr<Scenario> walk_;
    std::unique_ptr<Scenario> pca_;
    Integrand walk_phi_;
    Integrand pca_phi_;
    mutable std::optional<std::size_t> u_size_;
};

/// Effective parameters for one method: M, m_h and |u| after defaults.
std::size_t resolve_trial_size(Method method, const MethodOptions& options);
double resolve_hmult(Method method, const MethodOptions& options, PayoutKind payout);
std::size_t resolve_u_size(const PreparedScenario& prepared, const MethodOptions& options);

/// One full pipeline (fit/stage 1 and estimation) timed by wall clock.
/// TrialFailure sets `failed`; other errors propagate.
RunResult run_once(const PreparedScenario& prepared, Method method, const MethodOptions& options,
                   std::uint64_t seed);

/// Runs with seeds base_seed + 0..runs-1 on `threads` workers (0: hardware
/// concurrency); results are reduced in run order.
RunReport run_benchmark(const PreparedScenario& prepared, Method method, const MethodOptions& options,
                        std::size_t runs, std::uint64_t base_seed, std::size_t threads = 0);

struct EqualTimeResult {
    std::vector<RunReport> reports; // crude MC first when it was not requested
    std::vector<std::size_t> calibrated_n;
};

/// Calibrates N per method so the median run time is within 5% of the budget,
/// then runs the protocol sequentially. VR/RCE are relative to crude MC at
/// the same budget. Throws Error(calibration) when N = 2^6 already exceeds it.
EqualTimeResult equal_time_benchmark(const PreparedScenario& prepared, const std::vector<Method>& methods,
                                     const MethodOptions& options, double budget_s, std::size_t runs,
                                     std::uint64_t base_seed);

/// N for which one run of `method` takes about `budget_s` seconds.
std::size_t calibrate_n(const PreparedScenario& prepared, Method method, const MethodOptions& options,
                        double budget_s, std::uint64_t seed);

struct CsvOptions {
    /// Write time_s and RCE as "-" so repeated invocations are byte-identical.
    bool timing = true;
};

void write_csv_header(std::ostream& out);
void write_csv_row(std::ostream& out, const RunReport& report, const CsvOptions& options = {});

/// Stage 1 of NPIS for the scenario and a plain-text dump of the proposal.
void dump_proposal(const PreparedScenario& prepared, const MethodOptions& options, std::uint64_t seed,
                   std::ostream& out);

} // namespace npis
