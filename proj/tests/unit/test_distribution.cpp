#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "skegtd/distribution.hpp"
#include "skegtd/errors.hpp"
#include "support/oracles.hpp"

using namespace skegtd;

TEST_CASE("parameter validation") {
    CHECK_THROWS_AS(SkeGTDParams(0, 0, 0, 1, 2), DomainError);
    CHECK_THROWS_AS(SkeGTDParams(0, 1, 1.1, 1, 2), DomainError);
    CHECK_THROWS_AS(SkeGTDParams(0, 1, 0, -1, 2), DomainError);
    CHECK_THROWS_AS(SkeGTDParams(0, 1, 0, 1, 0), DomainError);
    CHECK_THROWS_AS(SkeGTDParams(NAN, 1, 0, 1, 2), DomainError);
    CHECK_NOTHROW(SkeGTDParams(0, 1, -1, 1, 2));
    const SkeGTDParams p(0, 1, 0, 2, 1.5);
    CHECK(p.has_moment(2));
    CHECK_FALSE(p.has_moment(3));
}

TEST_CASE("density at the mode and the Cauchy case") {
    CHECK(skegtd_logpdf({0, 1, 0, 0.5, 2}, 0.0) == doctest::Approx(-std::log(std::numbers::pi)).epsilon(1e-14));
    for (auto [s, r, a, b] : {std::array{1.0, 0.3, 2.0, 1.5}, std::array{0.2, -0.8, 0.7, 4.0}}) {
        const double expect = std::log(b / (2.0 * s * std::pow(2.0 * a, 1.0 / b))) -
                              (std::lgamma(a) + std::lgamma(1.0 / b) - std::lgamma(a + 1.0 / b));
        CHECK(skegtd_logpdf({1.5, s, r, a, b}, 1.5) == doctest::Approx(expect).epsilon(1e-13));
    }
}

TEST_CASE("Student-t reduction") {
    for (double x = -8.0; x <= 8.0; x += 0.37)
        CHECK(std::fabs(skegtd_pdf({0, 1, 0, 2, 2}, x) - oracle::student_t_pdf(x, 4.0, 0.0, 1.0)) <= 1e-12);
}

TEST_CASE("mirror symmetry") {
    for (double x = -4.0; x <= 6.0; x += 0.5) {
        const SkeGTDParams p(1.0, 0.7, 0.4, 1.3, 1.7), q(1.0, 0.7, -0.4, 1.3, 1.7);
        CHECK(skegtd_logpdf(p, x) == doctest::Approx(skegtd_logpdf(q, 2.0 - x)).epsilon(1e-14));
    }
}

TEST_CASE("one-sided support at |r| = 1") {
    CHECK(skegtd_pdf({0, 1, 1, 2, 1}, -0.1) == 0.0);
    CHECK(skegtd_pdf({0, 1, -1, 2, 1}, 0.1) == 0.0);
    CHECK(skegtd_cdf({0, 1, 1, 2, 1}, -3.0) == 0.0);
    RngStream rng(4);
    for (double v : skegtd_sample({2.0, 1, 1, 3, 2}, 2000, rng)) CHECK(v >= 2.0);
}

TEST_CASE("cdf against quadrature of the pdf") {
    const SkeGTDParams p(0, 1, 0.5, 3, 2);
    CHECK(skegtd_cdf(p, 0.0) == doctest::Approx(0.25).epsilon(1e-15));
    for (double x : {-2.0, -1.0, 0.0, 1.0, 2.0}) {
        const double q = oracle::integrate_to([&](double t) { return skegtd_pdf(p, t); }, x, 0.0, 1.0);
        CHECK(std::fabs(skegtd_cdf(p, x) - q) <= 1e-8);
    }
    const SkeGTDParams s(0, 1, 0, 1.2, 0.9);
    for (double t : {0.1, 1.0, 25.0}) CHECK(skegtd_cdf(s, -t) + skegtd_cdf(s, t) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("quantile inverts the cdf") {
    const SkeGTDParams p(0, 1, 0.5, 3, 2);
    CHECK(skegtd_quantile(p, 0.25) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(skegtd_quantile({3, 2, 0, 1, 1}, 0.5) == doctest::Approx(3.0).epsilon(1e-12));
    for (double x : {-1.0, 0.3, 4.0}) CHECK(std::fabs(skegtd_quantile(p, skegtd_cdf(p, x)) - x) <= 1e-7);
    CHECK_THROWS_AS(skegtd_quantile(p, 0.0), DomainError);
    CHECK_THROWS_AS(skegtd_quantile(p, 1.0), DomainError);
}

TEST_CASE("moments") {
    SUBCASE("mean closed form") {
        for (auto [r, a, b] : {std::array{0.7, 3.0, 2.5}, std::array{-0.5, 4.0, 2.5}, std::array{0.2, 1.0, 1.5}}) {
            const double s = 1.7, mu = -0.4;
            const double expect = mu + 2.0 * std::pow(2.0 * a, 1.0 / b) * s * r *
                                           std::exp(std::lgamma(a - 1.0 / b) + std::lgamma(2.0 / b) - std::lgamma(a + 1.0 / b) -
                                                    (std::lgamma(a) + std::lgamma(1.0 / b) - std::lgamma(a + 1.0 / b)));
            CHECK(skegtd_moment({mu, s, r, a, b}, 1) == doctest::Approx(expect).epsilon(1e-12));
        }
        CHECK(skegtd_moment({2.5, 1, 0, 3, 2}, 1) == doctest::Approx(2.5).epsilon(1e-15));
    }
    SUBCASE("non-existent moments throw") {
        CHECK_THROWS_AS(skegtd_moment({0, 1, 0, 1, 2}, 2), MomentNotFinite);
        try {
            (void)skegtd_moment({0, 1, 0, 1, 2}, 3);
        } catch (const MomentNotFinite& e) {
            CHECK(e.order() == 3);
            CHECK(e.alpha_beta() == doctest::Approx(2.0));
        }
        const auto s = skegtd_summary({0, 1, 0.3, 1, 2.5});
        CHECK(s.mean.has_value());
        CHECK(s.variance.has_value());
        CHECK_FALSE(s.skewness.has_value());
        CHECK_FALSE(s.kurtosis.has_value());
    }
    SUBCASE("raw moments against quadrature") {
        const SkeGTDParams p(0.5, 1.3, -0.6, 2.5, 1.8);
        for (int k : {1, 2, 3}) {
            const double q = oracle::integrate_real_line([&](double x) { return std::pow(x, k) * skegtd_pdf(p, x); }, 0.5, 1.3);
            CHECK(skegtd_moment(p, k) == doctest::Approx(q).epsilon(1e-8));
        }
    }
    SUBCASE("summary agrees with raw moments") {
        const SkeGTDParams p(1, 2, 0.4, 4, 2);
        const double m1 = skegtd_moment(p, 1), m2 = skegtd_moment(p, 2), m3 = skegtd_moment(p, 3), m4 = skegtd_moment(p, 4);
        const double v = m2 - m1 * m1;
        const auto s = skegtd_summary(p);
        CHECK(*s.mean == doctest::Approx(m1).epsilon(1e-10));
        CHECK(*s.variance == doctest::Approx(v).epsilon(1e-10));
        const double c3 = m3 - 3 * m1 * m2 + 2 * m1 * m1 * m1;
        const double c4 = m4 - 4 * m1 * m3 + 6 * m1 * m1 * m2 - 3 * m1 * m1 * m1 * m1;
        CHECK(*s.skewness == doctest::Approx(c3 / std::pow(v, 1.5)).epsilon(1e-9));
        CHECK(*s.kurtosis == doctest::Approx(c4 / (v * v) - 3.0).epsilon(1e-9));
    }
    SUBCASE("skewness sign symmetry and the large-beta kurtosis limit") {
        CHECK(*skegtd_summary({0, 1, 0, 3, 2}).skewness == 0.0);
        for (double r : {0.1, 0.5, 0.9})
            for (double a : {2.0, 5.0}) {
                const auto sp = skegtd_summary({0, 1, r, a, 3.0});
                const auto sm = skegtd_summary({0, 1, -r, a, 3.0});
                CHECK(*sp.skewness == -*sm.skewness);
                CHECK(*sp.kurtosis == doctest::Approx(*sm.kurtosis).epsilon(1e-13));
            }
        CHECK(*skegtd_summary({0, 1, 0, 5, 200}).kurtosis == doctest::Approx(-1.2).epsilon(0.02 / 1.2));
    }
}

TEST_CASE("sampler moments") {
    RngStream rng(77);
    {
        const auto x = skegtd_sample({0, 1, 0, 4, 2}, 200000, rng);
        double s = 0, s2 = 0;
        for (double v : x) s += v, s2 += v * v;
        const double m = s / x.size(), se = std::sqrt((s2 / x.size() - m * m) / x.size());
        CHECK(std::fabs(m) < 5 * se);
    }
    {
        const SkeGTDParams p(0, 1, 0.7, 3, 2.5);
        const auto x = skegtd_sample(p, 200000, rng);
        const auto sm = skegtd_summary(p);
        double s = 0;
        for (double v : x) s += v;
        const double m = s / x.size();
        double c2 = 0, c4 = 0;
        for (double v : x) c2 += (v - m) * (v - m), c4 += std::pow(v - m, 4);
        c2 /= x.size();
        c4 /= x.size();
        CHECK(std::fabs(m - *sm.mean) < 5 * std::sqrt(*sm.variance / x.size()));
        CHECK(std::fabs(c2 - *sm.variance) < 5 * std::sqrt((c4 - c2 * c2) / x.size()));
    }
}

TEST_CASE("sampler law: Kolmogorov-Smirnov against the cdf") {
    RngStream root(5);
    int idx = 0;
    for (double r : {-0.9, 0.0, 0.5})
        for (double a : {0.5, 2.0})
            for (double b : {0.5, 2.0, 8.0}) {
                const SkeGTDParams p(0, 1, r, a, b);
                RngStream rng = root.split(idx++);
                auto x = skegtd_sample(p, 100000, rng);
                std::sort(x.begin(), x.end());
                double d = 0.0;
                const double n = static_cast<double>(x.size());
                for (std::size_t i = 0; i < x.size(); ++i) {
                    const double F = skegtd_cdf(p, x[i]);
                    d = std::max({d, F - i / n, (i + 1) / n - F});
                }
                CAPTURE(r);
                CAPTURE(a);
                CAPTURE(b);
                // 1% critical value 1.628 / sqrt(n)
                CHECK(d < 1.628 / std::sqrt(n));
            }
}

TEST_CASE("SGN law") {
    for (double x = -5; x <= 5; x += 0.25)
        CHECK(std::fabs(sgn_pdf({0.3, 1.4, 0, 2}, x) - oracle::normal_pdf(x, 0.3, 1.4)) <= 1e-12);
    const SGNParams p(0, 1, 0.4, 1.5);
    CHECK(sgn_cdf(p, 0.0) == doctest::Approx(0.3).epsilon(1e-14));
    for (double x : {-3.0, -0.5, 0.7, 2.5}) {
        const double q = oracle::integrate_to([&](double t) { return sgn_pdf(p, t); }, x, 0.0, 1.0);
        CHECK(std::fabs(sgn_cdf(p, x) - q) <= 1e-8);
    }
    // large alpha approaches SGN
    double sup = 0.0;
    for (double x = -6; x <= 6; x += 0.01)
        sup = std::max(sup, std::fabs(skegtd_pdf({0, 1, 0.4, 1e6, 1.5}, x) - sgn_pdf(p, x)));
    CHECK(sup < 1e-4);
    RngStream rng(8);
    const auto xs = sgn_sample(p, 50000, rng);
    double below = 0;
    for (double v : xs) below += v <= 0.0;
    CHECK(std::fabs(below / xs.size() - 0.3) < 5 * std::sqrt(0.21 / xs.size()));
}

TEST_CASE("limiting case recognition") {
    auto t = limiting_case_check({0, 1, 0, 3, 2});
    REQUIRE(t);
    CHECK(t->law == "StudentT");
    CHECK(t->params[0] == 6.0);
    auto c = limiting_case_check({1, 2, 0, 0.5, 2});
    REQUIRE(c);
    CHECK(c->law == "Cauchy");
    auto pII = limiting_case_check({1, 2, 1, 3, 1});
    REQUIRE(pII);
    CHECK(pII->law == "ParetoII");
    CHECK(pII->params[1] == doctest::Approx(24.0));
    for (double x = 1.0; x < 30.0; x += 0.7)
        CHECK(std::fabs(skegtd_pdf({1, 2, 1, 3, 1}, x) - oracle::lomax_pdf(x, 1.0, 24.0, 3.0)) <= 1e-12);
    auto n = limiting_case_check({0, 1, 0, 1e6, 2});
    REQUIRE(n);
    CHECK(n->law == "Normal");
    CHECK_FALSE(n->exact);
    CHECK(limiting_case_check({0, 1, 0, 1e6, 1})->law == "Laplace");
    CHECK(limiting_case_check({0, 1, 0, 1e6, 5e3})->law == "Uniform");
    CHECK(limiting_case_check({0, 1, 0.3, 1e6, 1.5})->law == "SGN");
    CHECK_FALSE(limiting_case_check({0, 1, 0.3, 2, 1.5}).has_value());
}
