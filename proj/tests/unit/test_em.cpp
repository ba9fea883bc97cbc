#include <doctest.h>

#include <cmath>
#include <vector>

#include "skegtd/distribution.hpp"
#include "skegtd/em.hpp"
#include "skegtd/errors.hpp"
#include "skegtd/specfun.hpp"
#include "support/oracles.hpp"

using namespace skegtd;

namespace {

double total_logpdf(const OmegaParams& w, const std::vector<double>& y) {
    const SkeGTDParams p(0, 1, w.r, w.alpha, w.beta());
    double s = 0;
    for (double v : y) s += skegtd_logpdf(p, v);
    return s;
}

std::vector<double> symmetric_sample(std::size_t half, std::uint64_t seed) {
    RngStream rng(seed);
    const auto x = skegtd_sample({0, 1, 0, 3, 2}, half, rng);
    std::vector<double> y;
    for (double v : x) {
        y.push_back(v);
        y.push_back(-v);
    }
    return y;
}

}  // namespace

TEST_CASE("observed log-likelihood") {
    const OmegaParams w = OmegaParams::from_beta(0.3, 2.0, 1.5);
    CHECK(observed_loglik(w, std::vector<double>{0.0}) == doctest::Approx(skegtd_log_norm_const(2.0, 1.5)).epsilon(1e-14));
    RngStream rng(1);
    auto y = skegtd_sample({0, 1, 0.3, 2, 1.5}, 333, rng);
    const double l = observed_loglik(w, y);
    CHECK(l == doctest::Approx(total_logpdf(w, y)).epsilon(1e-12));
    std::reverse(y.begin(), y.end());
    CHECK(observed_loglik(w, y) == doctest::Approx(l).epsilon(1e-13));
    // the density it sums integrates to one
    const SkeGTDParams p(0, 1, 0.3, 2.0, 1.5);
    CHECK(oracle::integrate_real_line([&](double x) { return skegtd_pdf(p, x); }, 0, 1) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("E-step moments of the latent gamma") {
    const OmegaParams w = OmegaParams::from_beta(0.4, 2.5, 2.0);
    const std::vector<double> y{0.0, 1.3, -0.7};
    const auto st = make_state(w, y);
    const auto e = e_step(st, y);
    CHECK(st.a_t == doctest::Approx(w.alpha + w.eta));
    CHECK(st.b_t[0] == doctest::Approx(w.alpha));
    CHECK(e.ez[0] == doctest::Approx((w.alpha + w.eta) / w.alpha).epsilon(1e-14));
    RngStream rng(2);
    for (std::size_t i = 0; i < y.size(); ++i) {
        const int n = 1000000;
        double s = 0, s2 = 0, l = 0, l2 = 0;
        for (int k = 0; k < n; ++k) {
            const double g = sample_gamma(st.a_t, st.b_t[i], rng);
            s += g, s2 += g * g;
            const double lg = std::log(g);
            l += lg, l2 += lg * lg;
        }
        const double m = s / n, se = std::sqrt((s2 / n - m * m) / n);
        const double ml = l / n, sel = std::sqrt((l2 / n - ml * ml) / n);
        CHECK(std::fabs(m - e.ez[i]) < 5 * se);
        CHECK(std::fabs(ml - e.elogz[i]) < 5 * sel);
        CHECK(e.elogz[i] == doctest::Approx(specfun::digamma(st.a_t) - std::log(st.b_t[i])).epsilon(1e-14));
    }
}

TEST_CASE("M-step") {
    SUBCASE("symmetric data keep r at zero") {
        const auto y = symmetric_sample(200, 3);
        const auto st = make_state(OmegaParams::from_beta(0.0, 2.0, 1.5), y);
        CHECK(std::fabs(m_step(st, y).r) < 1e-12);
    }
    SUBCASE("one step increases Q and the likelihood") {
        RngStream rng(4);
        const auto y = skegtd_sample({0, 1, 0.6, 3, 2.5}, 500, rng);
        const auto fit = fit_mle(y);
        const OmegaParams opt = OmegaParams::from_beta(fit.get("r"), fit.get("alpha"), fit.get("beta"));
        OmegaParams pert = opt;
        pert.r = std::clamp(opt.r - 0.15, -0.9, 0.9);
        pert.alpha *= 1.4;
        pert.eta *= 0.8;
        const auto st = make_state(pert, y);
        const auto next = m_step(st, y);
        CHECK(q_function(next, st, y) > q_function(pert, st, y));
        CHECK(observed_loglik(next, y) >= observed_loglik(pert, y) - 1e-9);
    }
}

TEST_CASE("score matches numeric derivatives of the log-density") {
    for (auto [r, a, b] : {std::array{0.3, 2.0, 1.5}, std::array{-0.7, 0.8, 3.0}, std::array{0.0, 6.0, 0.7}}) {
        const OmegaParams w = OmegaParams::from_beta(r, a, b);
        for (double y : {-2.5, -0.3, 0.4, 1.7, 9.0}) {
            auto f = [&](const std::vector<double>& v) {
                return skegtd_logpdf(SkeGTDParams(0, 1, v[0], v[1], 1.0 / v[2]), y);
            };
            const auto g = oracle::gradient(f, {w.r, w.alpha, w.eta}, 1e-6);
            const auto s = score(w, y);
            for (int k = 0; k < 3; ++k) CHECK(s[k] == doctest::Approx(g[k]).epsilon(1e-6).scale(1.0));
        }
    }
}

TEST_CASE("maximum likelihood fit") {
    RngStream rng(5);
    const auto y = skegtd_sample({0, 1, 0.7, 3, 2.5}, 500, rng);
    const auto f = fit_mle(y);
    CHECK(f.method == "mle");
    CHECK(f.converged);
    for (std::size_t i = 1; i < f.loglik_trace.size(); ++i) CHECK(f.loglik_trace[i] >= f.loglik_trace[i - 1] - 1e-9);
    CHECK(f.loglik == doctest::Approx(total_logpdf(OmegaParams::from_beta(f.get("r"), f.get("alpha"), f.get("beta")), y)).epsilon(1e-12));
    // numeric gradient in (r, alpha, beta)
    auto ll = [&](const std::vector<double>& v) { return total_logpdf(OmegaParams::from_beta(v[0], v[1], v[2]), y); };
    const auto g = oracle::gradient(ll, f.estimates, 1e-5);
    for (double v : g) CHECK(std::fabs(v) < 1e-3 * y.size());
    CHECK(std::fabs(f.get("r") - 0.7) < 0.08);
    REQUIRE(f.standard_errors.size() == 3);
    CHECK(f.standard_errors[0] > 0.0);

    SUBCASE("symmetric data") {
        const auto s = symmetric_sample(250, 6);
        CHECK(std::fabs(fit_mle(s).get("r")) < 1e-3);
    }
    SUBCASE("tight tolerance drives the mean score to zero") {
        MleOptions o;
        o.tol = 1e-10;
        o.max_iter = 5000;
        const auto t = fit_mle(y, std::nullopt, o);
        const auto ms = mean_score(OmegaParams::from_beta(t.get("r"), t.get("alpha"), t.get("beta")), y);
        for (double v : ms) CHECK(std::fabs(v) < 1e-6);
    }
    SUBCASE("starting point and errors") {
        const auto fi = fit_mle(y, OmegaParams::from_beta(0.5, 2.0, 2.0));
        CHECK(fi.loglik == doctest::Approx(f.loglik).epsilon(1e-6));
        CHECK_THROWS_AS(fit_mle(std::vector<double>(5, 1.0)), InsufficientData);
    }
}

TEST_CASE("Fisher information") {
    SUBCASE("structural zeros and definiteness") {
        for (double r : {-0.9, 0.0, 0.9})
            for (double a : {0.5, 1.0, 2.0, 5.0, 10.0, 25.0})
                for (double b : {0.5, 1.0, 2.0, 5.0, 10.0, 25.0}) {
                    const auto info = fisher_info(OmegaParams::from_beta(r, a, b));
                    CHECK(info.J_omega(0, 1) == 0.0);
                    CHECK(info.J_omega(0, 2) == 0.0);
                    CHECK(info.I_theta.llt().info() == Eigen::Success);
                }
    }
    SUBCASE("negative Hessian of the expected log-density") {
        for (auto [r, a, b] : {std::array{0.3, 2.0, 2.0}, std::array{-0.5, 4.0, 1.2}, std::array{0.7, 1.5, 3.0}}) {
            const OmegaParams w0 = OmegaParams::from_beta(r, a, b);
            const SkeGTDParams p0(0, 1, r, a, b);
            auto expected = [&](const std::array<double, 3>& v) {
                const SkeGTDParams p(0, 1, v[0], v[1], 1.0 / v[2]);
                return oracle::integrate_real_line(
                    [&](double x) {
                        const double f0 = skegtd_pdf(p0, x);
                        return f0 > 0 ? f0 * skegtd_logpdf(p, x) : 0.0;
                    },
                    0, 1);
            };
            const std::array<double, 3> c{w0.r, w0.alpha, w0.eta};
            const std::array<double, 3> h{2e-3, 2e-3 * w0.alpha, 2e-3 * w0.eta};
            const auto J = fisher_info(w0).J_omega;
            for (int i = 0; i < 3; ++i)
                for (int j = i; j < 3; ++j) {
                    double d;
                    if (i == j) {
                        auto p = c, m = c;
                        p[i] += h[i];
                        m[i] -= h[i];
                        d = (expected(p) - 2 * expected(c) + expected(m)) / (h[i] * h[i]);
                    } else {
                        auto pp = c, pm = c, mp = c, mm = c;
                        pp[i] += h[i], pp[j] += h[j];
                        pm[i] += h[i], pm[j] -= h[j];
                        mp[i] -= h[i], mp[j] += h[j];
                        mm[i] -= h[i], mm[j] -= h[j];
                        d = (expected(pp) - expected(pm) - expected(mp) + expected(mm)) / (4 * h[i] * h[j]);
                    }
                    CAPTURE(i);
                    CAPTURE(j);
                    const double scale = std::sqrt(J(i, i) * J(j, j));
                    CHECK(std::fabs(-d - J(i, j)) <= 1e-3 * scale);
                }
        }
    }
    SUBCASE("standard errors scale with n") {
        const auto a = fisher_info(OmegaParams::from_beta(0.2, 3, 2), 100);
        const auto b = fisher_info(OmegaParams::from_beta(0.2, 3, 2), 400);
        CHECK(a.standard_errors[1] == doctest::Approx(2 * b.standard_errors[1]).epsilon(1e-12));
    }
}
