#include "npis/rng_qmc.hpp"

#include "npis/error.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <string>

namespace npis {

namespace {

struct SobolPolynomial {
    unsigned degree;
    unsigned coefficients;
    std::array<std::uint32_t, 18> initial;
};

#include "sobol_directions.inc"

} // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) noexcept {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (tag + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

Mt53::Mt53(std::uint64_t seed) : engine_(static_cast<std::mt19937::result_type>(seed ^ (seed >> 32))) {}

double Mt53::next() {
    const std::uint32_t a = next_word() >> 5;
    const std::uint32_t b = next_word() >> 6;
    return (a * 67108864.0 + b) * (1.0 / 9007199254740992.0);
}

SobolSequence::SobolSequence(std::size_t dimension)
    : dimension_(dimension), directions_(dimension * kBits), state_(dimension, 0u) {
    if (dimension == 0) fail(ErrorCode::invalid_argument, "Sobol dimension must be positive");
    if (dimension > max_dimension())
        fail(ErrorCode::dimension_unsupported,
             "Sobol dimension " + std::to_string(dimension) + " exceeds the direction-number table (" +
                 std::to_string(max_dimension()) + ")");

    for (unsigned k = 0; k < kBits; ++k) directions_[k] = 1u << (kBits - 1 - k);

    for (std::size_t j = 1; j < dimension; ++j) {
        const SobolPolynomial& poly = kSobolTable[j - 1];
        const unsigned s = poly.degree;
        std::uint32_t* v = &directions_[j * kBits];
        for (unsigned k = 0; k < s && k < kBits; ++k) v[k] = poly.initial[k] << (kBits - 1 - k);
        for (unsigned k = s; k < kBits; ++k) {
            v[k] = v[k - s] ^ (v[k - s] >> s);
            for (unsigned i = 1; i < s; ++i)
                if ((poly.coefficients >> (s - 1 - i)) & 1u) v[k] ^= v[k - i];
        }
    }
}

std::size_t SobolSequence::max_dimension() noexcept { return kSobolTableDims; }

void SobolSequence::next(std::span<double> out) {
    constexpr double scale = 1.0 / 4294967296.0;
    for (std::size_t j = 0; j < dimension_; ++j) out[j] = state_[j] * scale;
    const unsigned c = static_cast<unsigned>(std::countr_one(index_));
    if (c >= kBits) fail(ErrorCode::domain, "Sobol sequence exhausted");
    for (std::size_t j = 0; j < dimension_; ++j) state_[j] ^= directions_[j * kBits + c];
    ++index_;
}

PointStream::PointStream(SamplerKind kind, std::size_t dimension, std::uint64_t seed)
    : kind_(kind), dimension_(dimension), mt_(seed) {
    if (dimension == 0) fail(ErrorCode::invalid_argument, "stream dimension must be positive");
}

PointStream PointStream::pseudo(std::size_t dimension, std::uint64_t seed) {
    return PointStream(SamplerKind::pseudo, dimension, seed);
}

PointStream PointStream::shifted_sobol(std::size_t dimension, std::uint64_t seed) {
    Mt53 source(seed);
    std::vector<double> shift(dimension);
    for (double& v : shift) v = source.next();
    return shifted_sobol(dimension, std::move(shift));
}

PointStream PointStream::shifted_sobol(std::size_t dimension, std::vector<double> shift) {
    if (shift.size() != dimension) fail(ErrorCode::dimension_mismatch, "shift vector size must equal the dimension");
    for (double v : shift)
        if (!(v >= 0.0 && v < 1.0)) fail(ErrorCode::domain, "shift entries must lie in [0,1)");
    PointStream stream(SamplerKind::shifted_sobol, dimension, 0);
    stream.sobol_.emplace(dimension);
    stream.shift_ = std::move(shift);
    stream.raw_.resize(dimension);
    return stream;
}

PointStream PointStream::make(SamplerKind kind, std::size_t dimension, std::uint64_t seed) {
    return kind == SamplerKind::pseudo ? pseudo(dimension, seed) : shifted_sobol(dimension, seed);
}

void PointStream::next(std::span<double> out) {
    if (out.size() < dimension_) fail(ErrorCode::dimension_mismatch, "output span shorter than stream dimension");
    if (kind_ == SamplerKind::pseudo) {
        for (std::size_t j = 0; j < dimension_; ++j) out[j] = mt_.next();
    } else {
        sobol_->next(raw_);
        for (std::size_t j = 0; j < dimension_; ++j) {
            double y = raw_[j] + shift_[j];
            if (y >= 1.0) y -= 1.0;
            out[j] = y;
        }
    }
    ++cursor_;
}

double inv_normal(double u) {
    if (!(u > 0.0 && u < 1.0)) fail(ErrorCode::domain, "inv_normal requires 0 < u < 1");

    static constexpr double a[4] = {2.50662823884, -18.61500062529, 41.39119773534, -25.44106049637};
    static constexpr double b[4] = {-8.47351093090, 23.08336743743, -21.06224101826, 3.13082909833};
    static constexpr double c[9] = {0.3374754822726147, 0.9761690190917186, 0.1607979714918209,
                                    0.0276438810333863, 0.0038405729373609, 0.0003951896511919,
                                    0.0000321767881768, 0.0000002888167364, 0.0000003960315187};

    const double y = u - 0.5;
    // Crossover at 0.41: the central rational exceeds 3e-9 error just inside 0.42.
    if (std::fabs(y) < 0.41) {
        const double r = y * y;
        return y * (((a[3] * r + a[2]) * r + a[1]) * r + a[0]) /
               ((((b[3] * r + b[2]) * r + b[1]) * r + b[0]) * r + 1.0);
    }
    double r = y < 0.0 ? u : 1.0 - u;
    r = std::log(-std::log(r));
    const double x =
        c[0] + r * (c[1] + r * (c[2] + r * (c[3] + r * (c[4] + r * (c[5] + r * (c[6] + r * (c[7] + r * c[8])))))));
    return y < 0.0 ? -x : x;
}

double uniform_to_normal(double u) { return inv_normal(u == 0.0 ? kUniformFloor : u); }

void uniforms_to_normals(std::span<const double> u, std::span<double> z) {
    for (std::size_t i = 0; i < u.size(); ++i) z[i] = uniform_to_normal(u[i]);
}

} // namespace npis
