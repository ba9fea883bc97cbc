#include "skegtd/rng.hpp"

#include <cmath>
#include <numbers>

#include "skegtd/errors.hpp"

namespace skegtd {
namespace {

std::uint64_t splitmix64(std::uint64_t& state) noexcept {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept { return (x << k) | (x >> (64 - k)); }

}  // namespace

RngStream::RngStream(std::uint64_t seed) : seed_(seed) {
    std::uint64_t st = seed;
    for (auto& w : s_) w = splitmix64(st);
}

RngStream RngStream::split(std::uint64_t index) const {
    std::uint64_t st = seed_ ^ 0x6a09e667f3bcc909ULL;
    std::uint64_t mixed = splitmix64(st);
    st = mixed + index * 0xd1b54a32d192ed03ULL;
    return RngStream(splitmix64(st));
}

std::uint64_t RngStream::next_u64() noexcept {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

double RngStream::uniform() noexcept {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double RngStream::normal() noexcept {
    // Box-Muller; one of the pair is discarded to keep the stream stateless
    // beyond the generator words.
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::size_t RngStream::uniform_index(std::size_t n) noexcept {
    // Lemire's multiply-shift with rejection.
    const std::uint64_t bound = n;
    std::uint64_t x = next_u64();
    __uint128_t m = static_cast<__uint128_t>(x) * bound;
    auto low = static_cast<std::uint64_t>(m);
    if (low < bound) {
        const std::uint64_t threshold = (0 - bound) % bound;
        while (low < threshold) {
            x = next_u64();
            m = static_cast<__uint128_t>(x) * bound;
            low = static_cast<std::uint64_t>(m);
        }
    }
    return static_cast<std::size_t>(m >> 64);
}

double sample_gamma(double shape, double rate, RngStream& rng) {
    if (!(shape > 0.0) || !(rate > 0.0)) throw DomainError("sample_gamma: shape and rate must be positive");
    if (shape < 1.0) {
        // G(a) = G(a + 1) * U^{1/a}, done in logs so tiny shapes do not underflow to 0 early.
        const double g = sample_gamma(shape + 1.0, 1.0, rng);
        const double lu = std::log(rng.uniform()) / shape;
        return std::exp(std::log(g) + lu) / rate;
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x;
        double v;
        do {
            x = rng.normal();
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = rng.uniform();
        const double x2 = x * x;
        if (u < 1.0 - 0.0331 * x2 * x2) return d * v / rate;
        if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v / rate;
    }
}

double sample_log_gamma(double shape, RngStream& rng) {
    if (!(shape > 0.0)) throw DomainError("sample_log_gamma: shape must be positive");
    if (shape < 1.0) return std::log(sample_gamma(shape + 1.0, 1.0, rng)) + std::log(rng.uniform()) / shape;
    return std::log(sample_gamma(shape, 1.0, rng));
}

double sample_inverse_gamma(double shape, double rate, RngStream& rng) {
    return 1.0 / sample_gamma(shape, rate, rng);
}

double sample_two_point(double p_hi, double hi, double lo, RngStream& rng) {
    if (!(p_hi >= 0.0 && p_hi <= 1.0)) throw DomainError("sample_two_point: p_hi must lie in [0, 1]");
    if (p_hi == 1.0) return hi;
    if (p_hi == 0.0) return lo;
    return rng.uniform() < p_hi ? hi : lo;
}

}  // namespace skegtd
