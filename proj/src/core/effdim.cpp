#include "npis/effdim.hpp"

#include "npis/error.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace npis {

namespace {

struct Moments {
    double sum = 0.0;
    double sum_sq = 0.0;

    void add(double v) {
        sum += v;
        sum_sq += v * v;
    }
    double mean(double l) const { return sum / l; }
    double std_error(double l) const {
        const double m = sum / l;
        const double var = std::max(sum_sq / l - m * m, 0.0) * l / (l - 1.0);
        return std::sqrt(var / l);
    }
};

void check_stream(const Integrand& phi, std::size_t l, const PointStream& stream) {
    require(l >= 2, ErrorCode::invalid_argument, "l must be at least 2");
    if (stream.dimension() != 2 * phi.dimension)
        fail(ErrorCode::dimension_mismatch, "effective-dimension stream must have dimension 2d");
}

} // namespace

GammaEstimate estimate_gamma(const Integrand& phi, const Subspace& u, std::size_t l, PointStream& stream) {
    const std::size_t d = phi.dimension;
    u.check(d);
    check_stream(phi, l, stream);

    std::vector<double> uniforms(2 * d), z(2 * d), mixed(d);
    Moments base, product;
    for (std::size_t i = 0; i < l; ++i) {
        stream.next(uniforms);
        uniforms_to_normals(uniforms, z);
        const std::span<const double> x(z.data(), d);
        for (std::size_t j = 0; j < d; ++j) mixed[j] = u.contains(j) ? z[j] : z[d + j];
        const double fx = phi(x);
        base.add(fx);
        product.add(fx * phi(mixed));
    }
    const double ld = static_cast<double>(l);
    const double mean = base.mean(ld);
    GammaEstimate g;
    g.mean = mean;
    g.variance = base.sum_sq / ld - mean * mean;
    g.value = product.mean(ld) - mean * mean;
    g.std_error = product.std_error(ld);
    return g;
}

EdReport effective_dimension(const Integrand& phi, double gamma, std::size_t l, PointStream& stream,
                             std::size_t max_prefix) {
    require(gamma > 0.0 && gamma < 1.0, ErrorCode::invalid_argument, "gamma must lie in (0,1)");
    check_stream(phi, l, stream);
    const std::size_t d = phi.dimension;
    const std::size_t kmax = max_prefix == 0 ? d : std::min(max_prefix, d);

    std::vector<double> uniforms(2 * d), z(2 * d), mixed(d);
    Moments base;
    std::vector<Moments> product(kmax);
    for (std::size_t i = 0; i < l; ++i) {
        stream.next(uniforms);
        uniforms_to_normals(uniforms, z);
        const double fx = phi(std::span<const double>(z.data(), d));
        base.add(fx);
        std::copy(z.begin() + static_cast<std::ptrdiff_t>(d), z.end(), mixed.begin());
        for (std::size_t k = 1; k <= kmax; ++k) {
            mixed[k - 1] = z[k - 1];
            product[k - 1].add(fx * (k == d ? fx : phi(mixed)));
        }
    }

    const double ld = static_cast<double>(l);
    EdReport r;
    r.gamma = gamma;
    r.l = l;
    r.mean = base.mean(ld);
    r.sigma2 = base.sum_sq / ld - r.mean * r.mean;
    r.ed = kmax == d ? d : kmax;
    bool found = false;
    for (std::size_t k = 1; k <= kmax; ++k) {
        const double g = product[k - 1].mean(ld) - r.mean * r.mean;
        r.gamma_hat.push_back(g);
        r.gamma_se.push_back(product[k - 1].std_error(ld));
        if (!found && std::max(g, 0.0) >= gamma * r.sigma2) {
            r.ed = k;
            found = true;
        }
    }
    return r;
}

void EdReport::write_csv(std::ostream& out) const {
    out << "k,gamma_hat,se,fraction\n";
    for (std::size_t k = 0; k < gamma_hat.size(); ++k) {
        const double fraction = sigma2 > 0.0 ? gamma_hat[k] / sigma2 : 0.0;
        out << (k + 1) << ',' << gamma_hat[k] << ',' << gamma_se[k] << ',' << fraction << '\n';
    }
}

} // namespace npis
