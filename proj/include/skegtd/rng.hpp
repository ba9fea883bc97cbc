#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace skegtd {

/// Seeded xoshiro256** stream. Sub-streams are derived from (seed, index)
/// only, never from the parent's position, so replicate k draws the same
/// numbers regardless of which thread runs it or in what order.
class RngStream {
public:
    using result_type = std::uint64_t;

    explicit RngStream(std::uint64_t seed = 0x5eed5eedULL);

    /// Independent stream number `index` of this stream's seed.
    [[nodiscard]] RngStream split(std::uint64_t index) const;

    std::uint64_t seed() const noexcept { return seed_; }

    std::uint64_t next_u64() noexcept;
    /// Uniform on the open interval (0, 1).
    double uniform() noexcept;
    /// Standard normal.
    double normal() noexcept;
    /// Uniform integer in [0, n).
    std::size_t uniform_index(std::size_t n) noexcept;

    // UniformRandomBitGenerator
    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return ~result_type{0}; }
    result_type operator()() noexcept { return next_u64(); }

private:
    std::uint64_t seed_;
    std::array<std::uint64_t, 4> s_{};
};

/// Gamma(shape, rate): mean shape / rate. Marsaglia-Tsang squeeze for
/// shape >= 1, boosted through U^{1/shape} for shape < 1.
double sample_gamma(double shape, double rate, RngStream& rng);

/// log of a Gamma(shape, 1) variate. Stays finite for very small shapes where
/// the variate itself underflows.
double sample_log_gamma(double shape, RngStream& rng);

/// 1 / Gamma(shape, rate): inverse gamma with shape `shape` and scale `rate`.
double sample_inverse_gamma(double shape, double rate, RngStream& rng);

/// Returns `hi` with probability p_hi, otherwise `lo`.
double sample_two_point(double p_hi, double hi, double lo, RngStream& rng);

}  // namespace skegtd
