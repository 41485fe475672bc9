#pragma once

// Uniform point sources: Mersenne Twister (pseudo-random) and Sobol with a
// random shift modulo one (randomized QMC), plus the uniform -> normal map.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

namespace npis {

/// Mixes a base seed with a stream tag (splitmix64 finalizer) so that the
/// stages of one run draw from unrelated MT19937 states.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) noexcept;

/// MT19937 producing 53-bit uniforms in [0,1) from pairs of 32-bit words
/// (the genrand_res53 construction).
class Mt53 {
public:
    explicit Mt53(std::uint64_t seed);

    std::uint32_t next_word() { return static_cast<std::uint32_t>(engine_()); }
    double next();

private:
    std::mt19937 engine_;
};

/// Raw (unshifted) Sobol sequence, Gray-code order, index starting at 0.
class SobolSequence {
public:
    static constexpr unsigned kBits = 32;

    explicit SobolSequence(std::size_t dimension);

    static std::size_t max_dimension() noexcept;

    std::size_t dimension() const noexcept { return dimension_; }
    std::uint64_t index() const noexcept { return index_; }

    /// Writes point `index()` and advances.
    void next(std::span<double> out);

private:
    std::size_t dimension_;
    std::uint64_t index_ = 0;
    std::vector<std::uint32_t> directions_; // dimension_ * kBits
    std::vector<std::uint32_t> state_;
};

enum class SamplerKind { pseudo, shifted_sobol };

/// Single-owner source of d-dimensional uniform vectors.
class PointStream {
public:
    static PointStream pseudo(std::size_t dimension, std::uint64_t seed);

    /// Shift vector drawn once from a pseudo stream seeded with `seed`.
    static PointStream shifted_sobol(std::size_t dimension, std::uint64_t seed);
    static PointStream shifted_sobol(std::size_t dimension, std::vector<double> shift);

    static PointStream make(SamplerKind kind, std::size_t dimension, std::uint64_t seed);

    SamplerKind kind() const noexcept { return kind_; }
    std::size_t dimension() const noexcept { return dimension_; }
    std::uint64_t cursor() const noexcept { return cursor_; }
    const std::vector<double>& shift() const noexcept { return shift_; }

    /// Writes the next vector in [0,1)^d and advances the cursor.
    void next(std::span<double> out);

private:
    PointStream(SamplerKind kind, std::size_t dimension, std::uint64_t seed);

    SamplerKind kind_;
    std::size_t dimension_;
    std::uint64_t cursor_ = 0;
    Mt53 mt_;
    std::optional<SobolSequence> sobol_;
    std::vector<double> shift_;
    std::vector<double> raw_;
};

/// Beasley-Springer-Moro inverse of the standard normal CDF. Throws a
/// domain error outside (0,1).
double inv_normal(double u);

/// Smallest uniform fed to inv_normal; exact zeros are nudged to this.
inline constexpr double kUniformFloor = 0x1p-53;

/// inv_normal after nudging u == 0 to kUniformFloor.
double uniform_to_normal(double u);

void uniforms_to_normals(std::span<const double> u, std::span<double> z);

} // namespace npis
