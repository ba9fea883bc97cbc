#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "skegtd/errors.hpp"
#include "skegtd/model_select.hpp"
#include "support/oracles.hpp"

using namespace skegtd;

TEST_CASE("skew-Cauchy density") {
    CHECK(std::exp(sc_logpdf(-1.8, 0.8, 18, -1.8)) == doctest::Approx(1.0 / (std::numbers::pi * 0.8)).epsilon(1e-14));
    for (double x = -5; x <= 5; x += 0.5)
        CHECK(std::exp(sc_logpdf(0.5, 2.0, 0.0, x)) == doctest::Approx(oracle::cauchy_pdf(x, 0.5, 2.0)).epsilon(1e-14));
    auto f = [](double x) { return std::exp(sc_logpdf(-1.8, 0.8, 18, x)); };
    CHECK(std::fabs(oracle::integrate_real_line(f, -1.8, 0.8) - 1.0) <= 1e-8);
    for (double a : {18.0, -3.0, 0.0})
        for (double x : {-6.0, -1.9, -1.0, 0.0, 4.0}) {
            auto g = [&](double t) { return std::exp(sc_logpdf(-1.8, 0.8, a, t)); };
            CAPTURE(a);
            CAPTURE(x);
            CHECK(std::fabs(sc_cdf(-1.8, 0.8, a, x) - oracle::integrate_to(g, x, -1.8, 0.8)) <= 1e-8);
        }
    CHECK_THROWS_AS(sc_logpdf(0, 0, 1, 0), DomainError);
}

TEST_CASE("skew-Cauchy sampler follows the cdf") {
    RngStream rng(9);
    auto x = sc_sample(-1.8, 0.8, 18, 50000, rng);
    std::sort(x.begin(), x.end());
    double d = 0;
    const double n = x.size();
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double F = sc_cdf(-1.8, 0.8, 18, x[i]);
        d = std::max({d, F - i / n, (i + 1) / n - F});
    }
    CHECK(d < 1.628 / std::sqrt(n));
}

TEST_CASE("two-piece skew-t density") {
    for (double x = -4; x <= 4; x += 0.4)
        CHECK(std::exp(st_logpdf(3.0, 1.0, x)) == doctest::Approx(oracle::student_t_pdf(x, 3.0, 0, 1)).epsilon(1e-13));
    auto f = [](double x) { return std::exp(st_logpdf(3.0, 2.0, x)); };
    CHECK(std::fabs(oracle::integrate_real_line(f, 0.0, 1.0) - 1.0) <= 1e-8);
    CHECK(st_logpdf(3.0, 2.0, -1e-12) == doctest::Approx(st_logpdf(3.0, 2.0, 1e-12)).epsilon(1e-10));
    CHECK(std::exp(st_logpdf(3.0, 2.0, 0.0)) == doctest::Approx(2.0 / 2.5 * oracle::student_t_pdf(0, 3.0, 0, 1)));
}

TEST_CASE("skew-normal density") {
    for (double x = -4; x <= 4; x += 0.5)
        CHECK(std::exp(sn_logpdf(0.0, x)) == doctest::Approx(oracle::normal_pdf(x, 0, 1)).epsilon(1e-14));
    CHECK(std::isfinite(sn_logpdf(50.0, -3.0)));
    auto f = [](double x) { return std::exp(sn_logpdf(4.0, x)); };
    CHECK(oracle::integrate_real_line(f, 0.0, 1.0) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("candidate fits") {
    SUBCASE("normal closed form") {
        const std::vector<double> x{-1, 0, 1, -1, 0, 1, -1, 0, 1, 0};
        const auto m = fit_candidate(Family::Normal, x);
        CHECK(m.params[0] == doctest::Approx(0.0));
        CHECK(m.params[1] * m.params[1] == doctest::Approx(0.6));
        CHECK(m.rho == 2);
        CHECK_THROWS_AS(fit_candidate(Family::Normal, std::vector<double>{-1, 0, 1}), InsufficientData);
    }
    RngStream rng(10);
    SUBCASE("ST on symmetric data") {
        std::vector<double> x;
        for (int i = 0; i < 300; ++i) {
            const double v = rng.normal() / std::sqrt(sample_gamma(2.0, 2.0, rng));
            x.push_back(v);
            x.push_back(-v);
        }
        const auto m = fit_candidate(Family::ST, x);
        CHECK(std::fabs(m.params[3] - 1.0) < 0.05);
    }
    SUBCASE("reported loglik is the sum of log densities") {
        const auto x = sc_sample(-1.8, 0.8, 18, 300, rng);
        std::vector<CandidateModel> ms;
        for (Family f : {Family::Normal, Family::StudentT, Family::SN, Family::ST, Family::SC, Family::SkeGTD}) {
            const auto m = fit_candidate(f, x);
            CAPTURE(family_name(f));
            REQUIRE_FALSE(m.failed);
            CHECK(m.rho == family_rho(f));
            CHECK(m.params.size() == m.param_names.size());
            double s = 0;
            for (double v : x) s += family_logpdf(f, m.params, v);
            CHECK(std::fabs(s - m.loglik) <= 1e-8 * std::max(1.0, std::fabs(s)));
            ms.push_back(m);
        }
        // SkeGTD beats the normal on skewed heavy-tailed data
        CHECK(ms[5].loglik > ms[0].loglik);
        // the skew-Cauchy is the true family here
        CHECK(ms[4].loglik > ms[0].loglik);
    }
}

TEST_CASE("information criteria") {
    CandidateModel m;
    m.loglik = -100;
    m.rho = 3;
    const auto c = criteria(m, 100);
    CHECK(c.aic == doctest::Approx(206));
    CHECK(c.edc == doctest::Approx(206));
    CHECK(c.bic == doctest::Approx(200 + 3 * std::log(100.0)));
    CandidateModel roller;
    roller.loglik = -1062.446;
    roller.rho = 5;
    CHECK(criteria(roller, 1150).aic == doctest::Approx(2134.892).epsilon(1e-6));

    SUBCASE("orderings survive a common shift of the log-likelihoods") {
        RngStream rng(3);
        for (int t = 0; t < 50; ++t) {
            CandidateModel a, b;
            a.loglik = -500 * rng.uniform();
            b.loglik = -500 * rng.uniform();
            a.rho = 2 + rng.uniform_index(4);
            b.rho = 2 + rng.uniform_index(4);
            const double shift = 1000 * rng.normal();
            for (Criterion cr : {Criterion::AIC, Criterion::BIC, Criterion::EDC}) {
                const bool before = strictly_better(a, b, 200, cr);
                CandidateModel a2 = a, b2 = b;
                a2.loglik += shift;
                b2.loglik += shift;
                CHECK(strictly_better(a2, b2, 200, cr) == before);
            }
        }
    }
    SUBCASE("ties and failures") {
        CandidateModel a;
        a.loglik = -10;
        a.rho = 2;
        CHECK_FALSE(strictly_better(a, a, 50, Criterion::AIC));
        CandidateModel f = a;
        f.failed = true;
        CHECK(strictly_better(a, f, 50, Criterion::AIC));
        CHECK_FALSE(strictly_better(f, a, 50, Criterion::AIC));
    }
    CHECK(parse_family("SkeGTD") == Family::SkeGTD);
    CHECK_THROWS_AS(parse_family("gamma"), DomainError);
}
