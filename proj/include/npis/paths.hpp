#pragma once

// Discretized Brownian motion and correlated-normal constructions.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace npis {

/// Equally spaced grid t_k = k T / d, k = 1..d.
struct TimeGrid {
    std::size_t steps = 1;
    double horizon = 1.0;

    double dt() const noexcept { return horizon / static_cast<double>(steps); }
    /// t_k for k in 1..steps (k = 0 gives 0).
    double time(std::size_t k) const noexcept { return horizon * static_cast<double>(k) / static_cast<double>(steps); }
    void validate() const;
};

/// Dense row-major square-or-rectangular matrix.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0) : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix identity(std::size_t n);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
    std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

    Matrix transposed() const;
    friend Matrix operator*(const Matrix& a, const Matrix& b);

    /// out = this * x
    void apply(std::span<const double> x, std::span<double> out) const;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

double frobenius_norm(const Matrix& m);

/// Sigma_ij = min(t_i, t_j) over t_1..t_d.
Matrix bm_covariance(const TimeGrid& grid);

/// Equicorrelation matrix: ones on the diagonal, rho elsewhere.
Matrix correlation_matrix(std::size_t assets, double rho);

/// Eigen-decomposition Sigma = V diag(values) V^T.
struct PcaBasis {
    Matrix vectors;               // columns are unit eigenvectors
    std::vector<double> values;   // descending, all > 0
    std::vector<double> explained; // cumulative variance fractions, last = 1

    std::size_t dimension() const noexcept { return values.size(); }
};

/// Cyclic Jacobi for symmetric positive-definite input. Columns are sign
/// normalized so their largest-magnitude entry is positive.
PcaBasis eigendecompose(const Matrix& sym);

/// Karhunen-Loeve eigenvalue ((i - 0.5) pi)^-2 of Brownian motion on [0,1], i >= 1.
double kl_eigenvalue(std::size_t i);

PcaBasis correlation_pca(std::size_t assets, double rho);

/// Lower-triangular L with L L^T = sym.
Matrix cholesky(const Matrix& sym);

enum class ConstructionKind { random_walk, pca };

/// Linear map from independent standard normals to a correlated Gaussian
/// vector: a Brownian path on a grid, or correlated asset shocks.
class Construction {
public:
    static Construction random_walk(const TimeGrid& grid);
    static Construction pca(const TimeGrid& grid);
    /// Correlated shocks with unit variances; random_walk kind uses the
    /// Cholesky factor, pca kind the eigen-factor V Lambda^{1/2}.
    static Construction correlated(std::size_t assets, double rho, ConstructionKind kind);

    ConstructionKind kind() const noexcept { return kind_; }
    std::size_t dimension() const noexcept { return dimension_; }
    const PcaBasis* basis() const noexcept { return basis_ ? &*basis_ : nullptr; }

    void apply(std::span<const double> z, std::span<double> out) const;

private:
    ConstructionKind kind_ = ConstructionKind::random_walk;
    std::size_t dimension_ = 0;
    double sqrt_dt_ = 1.0;
    bool cumulative_ = false; // Brownian random walk: cumulative sums of sqrt(dt) z
    Matrix factor_;
    std::optional<PcaBasis> basis_;
};

/// W(t_1..t_d) from standard normals z.
void build_bm_path(std::span<const double> z, const Construction& construction, const TimeGrid& grid,
                   std::span<double> path);

} // namespace npis
