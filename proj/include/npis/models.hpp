#pragma once

// Market models and payouts composing the integrand phi(x) = discount * C(S(x)).

#include "npis/paths.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <string>

namespace npis {

struct BsModel {
    double spot = 100.0;
    double vol = 0.3;
    double rate = 0.05;
    double maturity = 1.0;

    void validate() const;
};

struct CirModel {
    double r0 = 0.07;
    double kappa = 0.2;
    double theta = 0.075;
    double vol = 0.02;
    TimeGrid grid{16, 1.0};

    void validate() const;
};

enum class PayoutKind { straddle, asian_call, asian_knockout, asian_straddle, basket_average, basket_max, cir_cap };

const char* to_string(PayoutKind kind) noexcept;

struct Payout {
    PayoutKind kind = PayoutKind::straddle;
    double strike = 100.0;
    std::optional<double> knock_out;

    void validate() const;
};

/// Exact lognormal map S(t_k) = S0 exp[(r - sigma^2/2) t_k + sigma W(t_k)].
void bs_path(const BsModel& model, const TimeGrid& grid, std::span<const double> w, std::span<double> s);

/// Terminal values S_i(T) = S0 exp[(r - sigma^2/2) T + sigma sqrt(T) Z_i].
void bs_terminal(const BsModel& model, std::span<const double> z, std::span<double> s);

/// Full-truncation Euler: r_{k+1} = r_k + kappa (theta - r_k) dt + sigma sqrt(max(r_k,0)) sqrt(dt) z_k.
/// Writes r_{t_0} .. r_{t_{d-1}}; the last innovation is not used.
void cir_path(const CirModel& model, std::span<const double> z, std::span<double> rates);

/// Undiscounted cashflow for asset payouts; for cir-cap the path-dependent
/// discounting is included and `dt` must be the grid step.
double evaluate_payout(const Payout& payout, std::span<const double> values, double dt = 0.0);

enum class ModelKind { black_scholes, basket, cir };

/// A pricing problem defined as an integral of phi against N(0, I_d).
class Scenario {
public:
    static Scenario single_asset(const BsModel& model, const TimeGrid& grid, const Payout& payout,
                                 ConstructionKind construction);
    static Scenario basket(const BsModel& model, std::size_t assets, double rho, const Payout& payout,
                           ConstructionKind construction);
    static Scenario cir(const CirModel& model, const Payout& payout, ConstructionKind construction);

    std::size_t dimension() const noexcept { return construction_.dimension(); }
    ModelKind model_kind() const noexcept { return model_kind_; }
    const Construction& construction() const noexcept { return construction_; }
    const Payout& payout() const noexcept { return payout_; }
    const BsModel& bs_model() const noexcept { return bs_; }
    const CirModel& cir_model() const noexcept { return cir_; }

    /// phi(x). Pure; concurrently callable.
    double operator()(std::span<const double> x) const;

private:
    Scenario(ModelKind kind, Construction construction, const Payout& payout);

    ModelKind model_kind_;
    Construction construction_;
    Payout payout_;
    BsModel bs_;
    CirModel cir_;
    TimeGrid grid_;
    double discount_ = 1.0;
};

} // namespace npis
