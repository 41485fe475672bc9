#include "npis/models.hpp"

#include "npis/error.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace npis {

void BsModel::validate() const {
    require(spot > 0.0, ErrorCode::invalid_argument, "spot must be positive");
    require(vol >= 0.0, ErrorCode::invalid_argument, "volatility must be non-negative");
    require(maturity > 0.0, ErrorCode::invalid_argument, "maturity must be positive");
}

void CirModel::validate() const {
    require(r0 > 0.0, ErrorCode::invalid_argument, "CIR r0 must be positive");
    require(kappa >= 0.0, ErrorCode::invalid_argument, "CIR kappa must be non-negative");
    require(theta > 0.0, ErrorCode::invalid_argument, "CIR theta must be positive");
    require(vol >= 0.0, ErrorCode::invalid_argument, "CIR sigma must be non-negative");
    grid.validate();
}

const char* to_string(PayoutKind kind) noexcept {
    switch (kind) {
    case PayoutKind::straddle: return "straddle";
    case PayoutKind::asian_call: return "asian-call";
    case PayoutKind::asian_knockout: return "asian-knockout";
    case PayoutKind::asian_straddle: return "asian-straddle";
    case PayoutKind::basket_average: return "basket-average";
    case PayoutKind::basket_max: return "basket-max";
    case PayoutKind::cir_cap: return "cir-cap";
    }
    return "unknown";
}

void Payout::validate() const {
    require(strike > 0.0, ErrorCode::invalid_argument, "strike must be positive");
    if (kind == PayoutKind::asian_knockout) {
        require(knock_out.has_value(), ErrorCode::invalid_argument, "asian-knockout needs a knock-out level");
        require(*knock_out > strike, ErrorCode::invalid_argument, "knock-out level must exceed the strike");
    }
}

void bs_path(const BsModel& model, const TimeGrid& grid, std::span<const double> w, std::span<double> s) {
    const double drift = model.rate - 0.5 * model.vol * model.vol;
    for (std::size_t k = 0; k < grid.steps; ++k)
        s[k] = model.spot * std::exp(drift * grid.time(k + 1) + model.vol * w[k]);
}

void bs_terminal(const BsModel& model, std::span<const double> z, std::span<double> s) {
    const double drift = (model.rate - 0.5 * model.vol * model.vol) * model.maturity;
    const double diffusion = model.vol * std::sqrt(model.maturity);
    for (std::size_t i = 0; i < z.size(); ++i) s[i] = model.spot * std::exp(drift + diffusion * z[i]);
}

void cir_path(const CirModel& model, std::span<const double> z, std::span<double> rates) {
    const std::size_t d = model.grid.steps;
    if (z.size() != d) fail(ErrorCode::dimension_mismatch, "CIR innovations must have one entry per step");
    const double dt = model.grid.dt();
    const double sqrt_dt = std::sqrt(dt);
    double r = model.r0;
    rates[0] = r;
    for (std::size_t k = 0; k + 1 < d; ++k) {
        r = r + model.kappa * (model.theta - r) * dt + model.vol * std::sqrt(std::max(r, 0.0)) * sqrt_dt * z[k];
        rates[k + 1] = r;
    }
}

namespace {

double average(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

} // namespace

double evaluate_payout(const Payout& payout, std::span<const double> values, double dt) {
    if (values.empty()) fail(ErrorCode::invalid_argument, "payout needs at least one value");
    const double k = payout.strike;
    switch (payout.kind) {
    case PayoutKind::straddle: return std::fabs(values.back() - k);
    case PayoutKind::asian_call:
    case PayoutKind::basket_average: return std::max(average(values) - k, 0.0);
    case PayoutKind::asian_knockout: {
        const double a = average(values);
        return a < *payout.knock_out ? std::max(a - k, 0.0) : 0.0;
    }
    case PayoutKind::asian_straddle: return std::fabs(average(values) - k);
    case PayoutKind::basket_max: return std::max(*std::max_element(values.begin(), values.end()) - k, 0.0);
    case PayoutKind::cir_cap: {
        if (!(dt > 0.0)) fail(ErrorCode::invalid_argument, "cir-cap payout needs the grid step");
        double integrated = 0.0;
        double total = 0.0;
        for (double r : values) {
            integrated += r;
            if (r > k) total += std::exp(-dt * integrated) * (r - k);
        }
        return total;
    }
    }
    fail(ErrorCode::invalid_argument, "unknown payout kind");
}

Scenario::Scenario(ModelKind kind, Construction construction, const Payout& payout)
    : model_kind_(kind), construction_(std::move(construction)), payout_(payout) {
    payout_.validate();
}

Scenario Scenario::single_asset(const BsModel& model, const TimeGrid& grid, const Payout& payout,
                                ConstructionKind construction) {
    model.validate();
    grid.validate();
    if (payout.kind == PayoutKind::basket_average || payout.kind == PayoutKind::basket_max ||
        payout.kind == PayoutKind::cir_cap)
        fail(ErrorCode::invalid_argument, std::string("payout ") + to_string(payout.kind) +
                                              " does not apply to a single-asset path");
    if (std::fabs(grid.horizon - model.maturity) > 1e-12)
        fail(ErrorCode::invalid_argument, "time grid horizon must equal the model maturity");
    Construction c = construction == ConstructionKind::pca ? Construction::pca(grid) : Construction::random_walk(grid);
    Scenario s(ModelKind::black_scholes, std::move(c), payout);
    s.bs_ = model;
    s.grid_ = grid;
    s.discount_ = std::exp(-model.rate * model.maturity);
    return s;
}

Scenario Scenario::basket(const BsModel& model, std::size_t assets, double rho, const Payout& payout,
                          ConstructionKind construction) {
    model.validate();
    if (payout.kind != PayoutKind::basket_average && payout.kind != PayoutKind::basket_max)
        fail(ErrorCode::invalid_argument, std::string("payout ") + to_string(payout.kind) +
                                              " does not apply to a multi-asset basket");
    Scenario s(ModelKind::basket, Construction::correlated(assets, rho, construction), payout);
    s.bs_ = model;
    s.grid_ = TimeGrid{1, model.maturity};
    s.discount_ = std::exp(-model.rate * model.maturity);
    return s;
}

Scenario Scenario::cir(const CirModel& model, const Payout& payout, ConstructionKind construction) {
    model.validate();
    if (payout.kind != PayoutKind::cir_cap)
        fail(ErrorCode::invalid_argument, "the CIR model only supports the cir-cap payout");
    Construction c = construction == ConstructionKind::pca ? Construction::pca(model.grid)
                                                           : Construction::random_walk(model.grid);
    Scenario s(ModelKind::cir, std::move(c), payout);
    s.cir_ = model;
    s.grid_ = model.grid;
    s.discount_ = 1.0;
    return s;
}

double Scenario::operator()(std::span<const double> x) const {
    const std::size_t d = dimension();
    if (x.size() != d) fail(ErrorCode::dimension_mismatch, "integrand input has the wrong dimension");

    thread_local std::vector<double> gauss;
    thread_local std::vector<double> values;
    gauss.resize(d);
    values.resize(d);
    construction_.apply(x, gauss);

    switch (model_kind_) {
    case ModelKind::black_scholes:
        bs_path(bs_, grid_, gauss, values);
        return discount_ * evaluate_payout(payout_, values);
    case ModelKind::basket:
        bs_terminal(bs_, gauss, values);
        return discount_ * evaluate_payout(payout_, values);
    case ModelKind::cir: {
        // Brownian path -> standardized increments.
        const double inv_sqrt_dt = 1.0 / std::sqrt(grid_.dt());
        double prev = 0.0;
        for (std::size_t k = 0; k < d; ++k) {
            const double w = gauss[k];
            gauss[k] = (w - prev) * inv_sqrt_dt;
            prev = w;
        }
        cir_path(cir_, gauss, values);
        return evaluate_payout(payout_, values, grid_.dt());
    }
    }
    return 0.0;
}

} // namespace npis
