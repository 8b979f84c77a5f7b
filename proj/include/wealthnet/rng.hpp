#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <utility>

namespace wealthnet {

/// Philox4x32-10 counter-based bijection (Salmon et al., Random123).
/// Output depends only on (counter, key), so any stream position can be
/// evaluated directly and independently of iteration order.
class Philox4x32 {
public:
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static Counter generate(Counter ctr, Key key) noexcept;
};

/// Mixes a master seed with a stream index (splitmix64 finalizer applied to
/// `master + golden * (stream + 1)`). Used for ensemble members and for
/// separating independent uses of one seed.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) noexcept;

/// Maps 64 random bits to a double in [0, 1) with 53-bit resolution.
inline double to_unit(std::uint64_t bits) noexcept {
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

/// Maps 64 random bits to a double in the open interval (0, 1).
inline double to_open_unit(std::uint64_t bits) noexcept {
    return (static_cast<double>(bits >> 12) + 0.5) * 0x1.0p-52;
}

/// Sequential random stream over Philox blocks. Satisfies
/// UniformRandomBitGenerator. Distribution transforms are implemented here
/// rather than through <random> distributions so results are identical
/// across standard library implementations.
class Rng {
public:
    using result_type = std::uint32_t;

    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0) noexcept;

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept {
        return std::numeric_limits<result_type>::max();
    }
    result_type operator()() noexcept { return next_u32(); }

    std::uint32_t next_u32() noexcept;
    std::uint64_t next_u64() noexcept;

    /// Uniform in [0, 1).
    double uniform() noexcept { return to_unit(next_u64()); }
    /// Uniform in (0, 1).
    double uniform_open() noexcept { return to_open_unit(next_u64()); }
    /// Unbiased integer in [0, bound); bound must be positive.
    std::uint64_t below(std::uint64_t bound) noexcept;
    bool bernoulli(double p) noexcept { return uniform() < p; }
    double normal() noexcept;
    double normal(double mean, double sd) noexcept { return mean + sd * normal(); }
    /// Gamma variate with unit scale (Marsaglia-Tsang).
    double gamma(double shape) noexcept;

private:
    void refill() noexcept;

    Philox4x32::Key key_;
    std::uint64_t block_ = 0;
    std::uint64_t stream_;
    Philox4x32::Counter buffer_{};
    int used_ = 4;
    double spare_normal_ = 0.0;
    bool has_spare_ = false;
};

/// Two independent standard normals for one (vertex, step) cell of the
/// dynamics noise field. `purpose` separates schemes that must not share
/// draws. Deterministic in all arguments.
std::pair<double, double> vertex_normals(std::uint64_t seed, std::uint32_t vertex,
                                         std::uint64_t step,
                                         std::uint32_t purpose) noexcept;

/// Box-Muller transform of two open-interval uniforms.
std::pair<double, double> box_muller(double u1, double u2) noexcept;

}  // namespace wealthnet
