#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "skegtd/em.hpp"
#include "skegtd/errors.hpp"
#include "skegtd/kernels.hpp"
#include "skegtd/rng.hpp"

using namespace skegtd;
namespace k = skegtd::kernels;

namespace {

std::vector<double> uniform_vec(RngStream& rng, std::size_t n, double lo, double hi) {
    std::vector<double> v(n);
    for (auto& x : v) x = lo + (hi - lo) * rng.uniform();
    return v;
}

bool close(double a, double b, double rel, double abs = 0.0) {
    if (std::isinf(a) || std::isinf(b)) return a == b;
    return std::fabs(a - b) <= abs + rel * std::max(std::fabs(a), std::fabs(b));
}

struct IsaGuard {
    k::Isa saved = k::active_isa();
    ~IsaGuard() { k::set_isa(saved); }
};

}  // namespace

TEST_CASE("dispatcher reports and switches ISA") {
    CHECK(k::isa_supported(k::Isa::scalar));
    CHECK(k::isa_name(k::Isa::scalar) == "scalar");
    CHECK(k::isa_name(k::Isa::avx2) == "avx2");
    IsaGuard g;
    k::set_isa(k::Isa::scalar);
    CHECK(k::active_isa() == k::Isa::scalar);
    if (k::isa_supported(k::Isa::avx2)) {
        k::set_isa(k::Isa::avx2);
        CHECK(k::active_isa() == k::Isa::avx2);
    } else {
        CHECK_THROWS_AS(k::set_isa(k::Isa::avx2), DomainError);
    }
}

TEST_CASE("AVX2 kernels match the scalar reference") {
    if (!k::isa_supported(k::Isa::avx2)) {
        MESSAGE("AVX2 not available on this CPU; equivalence not exercised");
        return;
    }
    RngStream rng(2024);
    // every length 0..67 covers empty input, partial vectors and tails
    for (std::size_t n = 0; n < 68; ++n) {
        CAPTURE(n);
        const auto x = uniform_vec(rng, n, -700.0, 700.0);
        std::vector<double> a(n), b(n);
        k::scalar::exp_batch(x, a);
        k::avx2::exp_batch(x, b);
        for (std::size_t i = 0; i < n; ++i) CHECK(close(a[i], b[i], 4e-16));

        auto pos = uniform_vec(rng, n, 0.0, 1.0);
        for (auto& v : pos) v = std::exp(-700.0 * v) * 1e3;
        k::scalar::log_batch(pos, a);
        k::avx2::log_batch(pos, b);
        for (std::size_t i = 0; i < n; ++i) CHECK(close(a[i], b[i], 1e-15, 1e-15));

        const auto L = uniform_vec(rng, n, -30.0, 3.0);
        const auto w = uniform_vec(rng, n, 0.0, 2.0);
        for (double beta : {0.3, 1.0, 2.5, 9.0}) {
            for (double c : {1e-6, 0.2, 7.0}) {
                CHECK(close(k::scalar::sum_log1p_cexp(L, c, beta), k::avx2::sum_log1p_cexp(L, c, beta), 1e-13, 1e-300));
                std::vector<double> wa(n), wb(n);
                const double sa = k::scalar::estep_weights(L, c, 3.0, beta, 3.4, wa);
                const double sb = k::avx2::estep_weights(L, c, 3.0, beta, 3.4, wb);
                CHECK(close(sa, sb, 1e-13, 1e-12));
                for (std::size_t i = 0; i < n; ++i) CHECK(close(wa[i], wb[i], 1e-14));
            }
            for (const auto& wt : {std::vector<double>{}, w}) {
                const auto pa = k::scalar::weighted_power_sums(L, wt, beta);
                const auto pb = k::avx2::weighted_power_sums(L, wt, beta);
                CHECK(close(pa.s0, pb.s0, 1e-13, 1e-300));
                CHECK(close(pa.s1, pb.s1, 1e-13, 1e-300));
            }
        }

        auto xs = uniform_vec(rng, n, -5.0, 20.0);
        const auto ca = k::scalar::central_sums(xs, 1.5);
        const auto cb = k::avx2::central_sums(xs, 1.5);
        CHECK(close(ca.m2, cb.m2, 1e-13, 1e-12));
        CHECK(close(ca.m3, cb.m3, 1e-12, 1e-10));
        CHECK(close(ca.m4, cb.m4, 1e-12, 1e-10));

        std::sort(xs.begin(), xs.end());
        const auto la = k::scalar::lmoment_sums(xs);
        const auto lb = k::avx2::lmoment_sums(xs);
        const double scale = 1.0 + static_cast<double>(n * n * n) * 20.0;
        CHECK(std::fabs(la.b - lb.b) <= 1e-14 * scale);
        CHECK(std::fabs(la.c - lb.c) <= 1e-14 * scale);
        CHECK(std::fabs(la.d - lb.d) <= 1e-14 * scale);
    }
}

TEST_CASE("special inputs") {
    const double inf = std::numeric_limits<double>::infinity();
    const std::vector<double> in{-inf, -800.0, -745.2, 0.0, 1e-300, 709.0, 710.0};
    std::vector<double> a(in.size()), b(in.size());
    k::scalar::exp_batch(in, a);
    CHECK(a[0] == 0.0);
    CHECK(a[3] == 1.0);
    CHECK(std::isinf(a[6]));
    if (k::isa_supported(k::Isa::avx2)) {
        k::avx2::exp_batch(in, b);
        for (std::size_t i = 0; i < in.size(); ++i) CHECK(close(a[i], b[i], 4e-16, 1e-320));
        const std::vector<double> pos{5e-324, 1e-310, 2.2250738585072014e-308, 1.0, 1.7e308};
        std::vector<double> la(pos.size()), lb(pos.size());
        k::scalar::log_batch(pos, la);
        k::avx2::log_batch(pos, lb);
        for (std::size_t i = 0; i < pos.size(); ++i) CHECK(close(la[i], lb[i], 1e-15, 1e-15));
        // -inf exponents contribute nothing
        const std::vector<double> L{-inf, -inf, 0.0};
        CHECK(k::avx2::sum_log1p_cexp(L, 1.0, 2.0) == doctest::Approx(std::log(2.0)));
    }
}

TEST_CASE("EM fit is the same under either ISA") {
    if (!k::isa_supported(k::Isa::avx2)) return;
    IsaGuard g;
    RngStream rng(31);
    std::vector<double> y(400);
    for (auto& v : y) v = rng.normal() * (rng.uniform() < 0.3 ? 3.0 : 1.0) + 0.4;
    k::set_isa(k::Isa::scalar);
    const auto fs = fit_mle(y);
    k::set_isa(k::Isa::avx2);
    const auto fv = fit_mle(y);
    // the likelihood is flat in alpha here, so estimates agree only to optimizer tolerance
    for (std::size_t i = 0; i < 3; ++i) CHECK(fs.estimates[i] == doctest::Approx(fv.estimates[i]).epsilon(2e-3));
    CHECK(fs.loglik == doctest::Approx(fv.loglik).epsilon(1e-10));
}
