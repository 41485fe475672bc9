#include "npis/paths.hpp"

#include "npis/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace npis {

void TimeGrid::validate() const {
    require(steps >= 1, ErrorCode::invalid_argument, "time grid needs at least one step");
    require(horizon > 0.0, ErrorCode::invalid_argument, "time grid horizon must be positive");
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix Matrix::transposed() const {
    Matrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
}

Matrix operator*(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) fail(ErrorCode::dimension_mismatch, "matrix product shape mismatch");
    Matrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
        }
    return c;
}

void Matrix::apply(std::span<const double> x, std::span<double> out) const {
    for (std::size_t i = 0; i < rows_; ++i) {
        const double* r = data_.data() + i * cols_;
        double acc = 0.0;
        for (std::size_t j = 0; j < cols_; ++j) acc += r[j] * x[j];
        out[i] = acc;
    }
}

double frobenius_norm(const Matrix& m) {
    double s = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (double v : m.row(i)) s += v * v;
    return std::sqrt(s);
}

Matrix bm_covariance(const TimeGrid& grid) {
    grid.validate();
    const std::size_t d = grid.steps;
    Matrix sigma(d, d);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) sigma(i, j) = grid.time(std::min(i, j) + 1);
    return sigma;
}

Matrix correlation_matrix(std::size_t assets, double rho) {
    require(assets >= 1, ErrorCode::invalid_argument, "at least one asset required");
    if (assets > 1 && !(rho < 1.0 && rho > -1.0 / static_cast<double>(assets - 1)))
        fail(ErrorCode::domain, "equicorrelation matrix is not positive definite for this rho");
    Matrix c(assets, assets, rho);
    for (std::size_t i = 0; i < assets; ++i) c(i, i) = 1.0;
    return c;
}

PcaBasis eigendecompose(const Matrix& sym) {
    const std::size_t n = sym.rows();
    require(n >= 1 && sym.cols() == n, ErrorCode::invalid_argument, "eigendecompose needs a square matrix");

    Matrix a = sym;
    Matrix v = Matrix::identity(n);
    const double scale = std::max(frobenius_norm(sym), 1e-300);

    auto off_norm = [&] {
        double s = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) s += 2.0 * a(p, q) * a(p, q);
        return std::sqrt(s);
    };

    constexpr int kMaxSweeps = 100;
    int sweep = 0;
    for (; sweep < kMaxSweeps && off_norm() > 1e-12 * scale; ++sweep) {
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (std::fabs(apq) < 1e-300) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = std::copysign(1.0, theta) / (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                a(p, q) = a(q, p) = 0.0;
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }
    if (off_norm() > 1e-12 * scale)
        fail(ErrorCode::non_convergence, "Jacobi eigen-solver did not converge; input is defective");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return a(i, i) > a(j, j); });

    PcaBasis basis;
    basis.vectors = Matrix(n, n);
    basis.values.resize(n);
    for (std::size_t col = 0; col < n; ++col) {
        const std::size_t src = order[col];
        basis.values[col] = a(src, src);
        std::size_t arg = 0;
        for (std::size_t k = 1; k < n; ++k)
            if (std::fabs(v(k, src)) > std::fabs(v(arg, src))) arg = k;
        const double sign = v(arg, src) < 0.0 ? -1.0 : 1.0;
        for (std::size_t k = 0; k < n; ++k) basis.vectors(k, col) = sign * v(k, src);
    }
    if (!(basis.values.back() > 0.0)) fail(ErrorCode::domain, "matrix is not positive definite");

    const double total = std::accumulate(basis.values.begin(), basis.values.end(), 0.0);
    basis.explained.resize(n);
    double running = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        running += basis.values[i];
        basis.explained[i] = running / total;
    }
    basis.explained.back() = 1.0;
    return basis;
}

double kl_eigenvalue(std::size_t i) {
    require(i >= 1, ErrorCode::invalid_argument, "Karhunen-Loeve index starts at 1");
    const double x = (static_cast<double>(i) - 0.5) * std::numbers::pi;
    return 1.0 / (x * x);
}

PcaBasis correlation_pca(std::size_t assets, double rho) { return eigendecompose(correlation_matrix(assets, rho)); }

Matrix cholesky(const Matrix& sym) {
    const std::size_t n = sym.rows();
    Matrix l(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        double diag = sym(j, j);
        for (std::size_t k = 0; k < j; ++k) diag -= l(j, k) * l(j, k);
        if (!(diag > 0.0)) fail(ErrorCode::domain, "matrix is not positive definite");
        l(j, j) = std::sqrt(diag);
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = sym(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
            l(i, j) = s / l(j, j);
        }
    }
    return l;
}

namespace {

Matrix eigen_factor(const PcaBasis& basis) {
    const std::size_t n = basis.dimension();
    Matrix f(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) f(i, j) = basis.vectors(i, j) * std::sqrt(basis.values[j]);
    return f;
}

} // namespace

Construction Construction::random_walk(const TimeGrid& grid) {
    grid.validate();
    Construction c;
    c.kind_ = ConstructionKind::random_walk;
    c.dimension_ = grid.steps;
    c.sqrt_dt_ = std::sqrt(grid.dt());
    c.cumulative_ = true;
    return c;
}

Construction Construction::pca(const TimeGrid& grid) {
    Construction c;
    c.kind_ = ConstructionKind::pca;
    c.dimension_ = grid.steps;
    c.basis_ = eigendecompose(bm_covariance(grid));
    c.factor_ = eigen_factor(*c.basis_);
    return c;
}

Construction Construction::correlated(std::size_t assets, double rho, ConstructionKind kind) {
    Construction c;
    c.kind_ = kind;
    c.dimension_ = assets;
    if (kind == ConstructionKind::pca) {
        c.basis_ = correlation_pca(assets, rho);
        c.factor_ = eigen_factor(*c.basis_);
    } else {
        c.factor_ = cholesky(correlation_matrix(assets, rho));
    }
    return c;
}

void Construction::apply(std::span<const double> z, std::span<double> out) const {
    if (z.size() != dimension_ || out.size() < dimension_)
        fail(ErrorCode::dimension_mismatch, "normal vector dimension does not match the construction");
    if (cumulative_) {
        double w = 0.0;
        for (std::size_t k = 0; k < dimension_; ++k) {
            w += sqrt_dt_ * z[k];
            out[k] = w;
        }
        return;
    }
    factor_.apply(z, out);
}

void build_bm_path(std::span<const double> z, const Construction& construction, const TimeGrid& grid,
                   std::span<double> path) {
    if (construction.dimension() != grid.steps)
        fail(ErrorCode::dimension_mismatch, "construction does not match the time grid");
    construction.apply(z, path);
}

} // namespace npis
