#include "skegtd/regression.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "skegtd/distribution.hpp"
#include "skegtd/errors.hpp"
#include "skegtd/optim.hpp"
#include "skegtd/two_step.hpp"

namespace skegtd {
namespace {

constexpr double kHuge = 1e300;
constexpr double kAlphaMax = 1e4;
constexpr double kBetaMax = 50.0;

struct Ols {
    double b0, b1, sd_x;
};

Ols ols(std::span<const double> x, std::span<const double> y) {
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    const double b1 = sxy / sxx;
    return {my - b1 * mx, b1, std::sqrt(sxx / n)};
}

}  // namespace

double regression_loglik(std::span<const double> x, std::span<const double> y, const std::array<double, 6>& t) {
    const SkeGTDParams p(0.0, t[2], t[3], t[4], t[5]);
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += skegtd_logpdf(p, y[i] - t[0] - t[1] * x[i]);
    return s;
}

RegressionFit fit_regression(std::span<const double> x, std::span<const double> y, const RegressionOptions& opt) {
    if (x.size() != y.size()) throw DomainError("fit_regression: x and y differ in length");
    const std::size_t n = x.size();
    if (n < 10) throw InsufficientData("fit_regression: needs at least 10 observations");
    const Ols o = ols(x, y);
    if (!(o.sd_x > 0.0)) throw InsufficientData("fit_regression: x is constant");

    std::vector<double> res(n);
    for (std::size_t i = 0; i < n; ++i) res[i] = y[i] - o.b0 - o.b1 * x[i];
    double rss = 0.0;
    for (double e : res) rss += e * e;
    const double s_res = std::max(std::sqrt(rss / static_cast<double>(n)), 1e-300);

    const double amin = opt.alpha_min;
    // z = (b0, b1, log sigma, atanh r, log(alpha - amin), log beta)
    auto decode = [&](const optim::Vec& z) -> std::array<double, 6> {
        const double r = opt.fix_r_zero ? 0.0 : std::tanh(z[3]);
        return {z[0], z[1], std::exp(z[2]), r, amin + std::exp(z[4]), std::exp(z[5])};
    };
    auto encode = [&](const std::array<double, 6>& t) {
        optim::Vec z(6);
        z << t[0], t[1], std::log(t[2]), std::atanh(std::clamp(t[3], -0.99, 0.99)), std::log(std::max(t[4] - amin, 1e-3)),
            std::log(t[5]);
        return z;
    };
    auto negll = [&](const optim::Vec& z) {
        const auto t = decode(z);
        if (!(t[2] > 0.0) || t[4] > kAlphaMax || t[5] > kBetaMax || t[5] < 0.05 || std::fabs(t[3]) >= 1.0) return kHuge;
        try {
            const double l = regression_loglik(x, y, t);
            return std::isfinite(l) ? -l : kHuge;
        } catch (const DomainError&) {
            return kHuge;
        }
    };

    std::vector<std::array<double, 6>> starts;
    if (n >= 20) {
        try {
            const FitReport t = fit_tse(res);
            const double b0 = o.b0 + t.estimates[0];
            starts.push_back({b0, o.b1, t.estimates[1], opt.fix_r_zero ? 0.0 : t.estimates[2],
                              std::clamp(t.estimates[3], amin + 0.01, 50.0), t.estimates[4]});
        } catch (const std::exception&) {
        }
    }
    starts.push_back({o.b0, o.b1, s_res, 0.0, 2.0, 2.0});
    starts.push_back({o.b0, o.b1, 0.5 * s_res, 0.0, 0.8, 2.5});

    RegressionFit fit;
    fit.n = n;
    double best = kHuge;
    optim::Vec bestz;
    optim::BfgsOptions bo;
    bo.max_iter = 500;
    bo.gtol = 1e-8;
    for (const auto& s : starts) {
        const auto r1 = optim::bfgs(negll, encode(s), bo);
        // a simplex pass shakes the iterate off flat ridges, then BFGS again
        optim::NelderMeadOptions nm;
        nm.max_iter = 2000;
        const auto r2 = optim::nelder_mead(negll, r1.x, nm);
        const auto r3 = optim::bfgs(negll, r2.fx < r1.fx ? r2.x : r1.x, bo);
        const auto& r = r3.fx <= std::min(r1.fx, r2.fx) ? r3 : (r2.fx < r1.fx ? r2 : r1);
        if (r.fx < best) {
            best = r.fx;
            bestz = r.x;
            fit.converged = r3.converged || r1.converged;
        }
        fit.loglik_trace.push_back(-best);
    }
    if (!(best < kHuge)) throw FitFailure("fit_regression: every start failed");

    const auto t = decode(bestz);
    fit.beta0 = t[0];
    fit.beta1 = t[1];
    fit.sigma = t[2];
    fit.r = t[3];
    fit.alpha = t[4];
    fit.beta = t[5];
    fit.loglik = regression_loglik(x, y, t);
    // Parameters pinned at a bound are held fixed when forming the information.
    std::vector<int> free_idx{0, 1, 2};
    if (opt.fix_r_zero) {
    } else if (std::fabs(fit.r) > 0.99) {
        fit.flags.push_back("boundary_r");
    } else {
        free_idx.push_back(3);
    }
    if (fit.alpha < amin + 1e-3 || fit.alpha > 0.99 * kAlphaMax)
        fit.flags.push_back("boundary_alpha");
    else
        free_idx.push_back(4);
    if (fit.beta > 0.99 * kBetaMax || fit.beta < 0.051)
        fit.flags.push_back("boundary_beta");
    else
        free_idx.push_back(5);
    if (!fit.converged) fit.flags.push_back("not_converged");

    // empirical information from numeric per-observation scores
    const int k = static_cast<int>(free_idx.size());
    std::array<double, 6> h{1e-4 * t[2], 1e-4 * t[2] / o.sd_x, 1e-5 * t[2], 1e-5, 1e-5 * t[4], 1e-5 * t[5]};
    Eigen::MatrixXd info = Eigen::MatrixXd::Zero(k, k);
    bool ok = true;
    for (std::size_t i = 0; i < n && ok; ++i) {
        Eigen::VectorXd s(k);
        for (int a = 0; a < k; ++a) {
            const int j = free_idx[a];
            auto tp = t, tm = t;
            tp[j] += h[j];
            tm[j] -= h[j];
            try {
                const double lp = skegtd_logpdf(SkeGTDParams(0.0, tp[2], tp[3], tp[4], tp[5]), y[i] - tp[0] - tp[1] * x[i]);
                const double lm = skegtd_logpdf(SkeGTDParams(0.0, tm[2], tm[3], tm[4], tm[5]), y[i] - tm[0] - tm[1] * x[i]);
                s[a] = (lp - lm) / (2.0 * h[j]);
            } catch (const DomainError&) {
                ok = false;
                break;
            }
        }
        if (ok) info += s * s.transpose();
    }
    fit.standard_errors.fill(std::numeric_limits<double>::quiet_NaN());
    if (ok) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(info);
        if (es.eigenvalues().minCoeff() > 1e-12 * es.eigenvalues().maxCoeff()) {
            const Eigen::MatrixXd cov = info.ldlt().solve(Eigen::MatrixXd::Identity(k, k));
            for (int a = 0; a < k; ++a) fit.standard_errors[free_idx[a]] = std::sqrt(cov(a, a));
        } else {
            fit.flags.push_back("information_singular");
        }
    }
    if (opt.fix_r_zero) fit.standard_errors[3] = 0.0;

    if (fit.alpha * fit.beta > 1.0)
        fit.adjusted_intercept = fit.beta0 + skegtd_moment(SkeGTDParams(0.0, fit.sigma, fit.r, fit.alpha, fit.beta), 1);
    return fit;
}

ResidualReport residual_report(const RegressionFit& fit, std::span<const double> x, std::span<const double> y) {
    ResidualReport rep;
    rep.residuals.resize(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) rep.residuals[i] = y[i] - fit.beta0 - fit.beta1 * x[i];
    const auto [lo_it, hi_it] = std::minmax_element(rep.residuals.begin(), rep.residuals.end());
    double lo = *lo_it, hi = *hi_it;
    double pad = 0.1 * (hi - lo);
    if (!(pad > 0.0)) pad = fit.sigma;
    lo -= pad;
    hi += pad;
    const SkeGTDParams p(0.0, fit.sigma, fit.r, fit.alpha, fit.beta);
    constexpr int m = 512;
    rep.grid.resize(m);
    rep.density.resize(m);
    for (int i = 0; i < m; ++i) {
        rep.grid[i] = lo + (hi - lo) * i / (m - 1);
        rep.density[i] = skegtd_pdf(p, rep.grid[i]);
    }
    return rep;
}

}  // namespace skegtd
