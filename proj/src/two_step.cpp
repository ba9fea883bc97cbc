#include "skegtd/two_step.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "skegtd/distribution.hpp"
#include "skegtd/errors.hpp"
#include "skegtd/kernels.hpp"
#include "skegtd/optim.hpp"

namespace skegtd {
namespace {

constexpr double kAlphaHi = 50.0;
constexpr double kAlphaLo = 0.2;
constexpr double kBetaLo = 0.2;
constexpr double kBetaHi = 25.0;
constexpr double kKurtFloor = 4.2;  // alpha*beta > 1.05 * 4

// (u, v) in [0,1]^2 -> (alpha, beta), rectangular in the feasible region.
struct ShapeMap {
    static double beta(double u) { return kBetaLo * std::pow(kBetaHi / kBetaLo, u); }
    static double alpha_min(double b) { return std::max(kAlphaLo, kKurtFloor / b); }
    static double alpha(double u, double v) {
        const double lo = alpha_min(beta(u));
        return lo * std::pow(kAlphaHi / lo, v);
    }
};

std::array<double, 2> gammas(double r, double alpha, double beta) {
    const Summary s = skegtd_summary(SkeGTDParams(0.0, 1.0, r, alpha, beta));
    return {*s.skewness, *s.kurtosis};
}

}  // namespace

double hrm_mode(std::span<const double> data) {
    if (data.size() < 2) throw InsufficientData("hrm_mode: needs at least 2 points");
    std::vector<double> x(data.begin(), data.end());
    std::sort(x.begin(), x.end());
    while (true) {
        const std::size_t n = x.size();
        if (n == 2) return 0.5 * (x[0] + x[1]);
        if (n == 3) {
            const double g1 = x[1] - x[0], g2 = x[2] - x[1];
            const double tol = 1e-12 * std::max({std::fabs(x[0]), std::fabs(x[2]), g1 + g2});
            if (std::fabs(g1 - g2) <= tol) return x[1];
            return g1 < g2 ? 0.5 * (x[0] + x[1]) : 0.5 * (x[1] + x[2]);
        }
        const double w = 0.5 * (x[n - 1] - x[0]);
        if (w == 0.0) return x[0];
        std::size_t best_i = 0, best_count = 0;
        std::size_t j = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (j < i) j = i;
            while (j + 1 < n && x[j + 1] - x[i] <= w) ++j;
            const std::size_t count = j - i + 1;
            if (count > best_count) {  // strict: smaller midpoint wins ties
                best_count = count;
                best_i = i;
            }
        }
        if (best_count == n) return x[0];  // unreachable for w = range/2 > 0
        if (best_count < 2) return x[best_i];
        x = std::vector<double>(x.begin() + static_cast<std::ptrdiff_t>(best_i),
                                x.begin() + static_cast<std::ptrdiff_t>(best_i + best_count));
    }
}

double profile_r(std::span<const double> data, double mu) {
    if (data.empty()) throw InsufficientData("profile_r: empty sample");
    std::size_t below = 0;
    for (double v : data) below += (v <= mu);
    return 1.0 - 2.0 * static_cast<double>(below) / static_cast<double>(data.size());
}

SampleShape sample_shape(std::span<const double> data) {
    const std::size_t n = data.size();
    if (n < 2) throw InsufficientData("sample_shape: needs at least 2 points");
    double sum = 0.0;
    for (double v : data) sum += v;
    const double mean = sum / static_cast<double>(n);
    const auto cs = kernels::central_sums(data, mean);
    const double dn = static_cast<double>(n);
    const double m2 = cs.m2 / dn, m3 = cs.m3 / dn, m4 = cs.m4 / dn;
    return {mean, cs.m2 / (dn - 1.0), m3 / std::pow(m2, 1.5), m4 / (m2 * m2) - 3.0};
}

ShapeFit match_shape(double r, double g1, double g2) {
    auto obj_uv = [&](double u, double v) {
        if (!(u >= 0.0 && u <= 1.0 && v >= 0.0 && v <= 1.0)) return std::numeric_limits<double>::infinity();
        const auto g = gammas(r, ShapeMap::alpha(u, v), ShapeMap::beta(u));
        return std::fabs(g[0] - g1) + std::fabs(g[1] - g2);
    };

    // coarse grid
    constexpr int G = 30;
    struct Cand {
        double f, u, v;
    };
    std::vector<Cand> cands;
    for (int i = 0; i <= G; ++i)
        for (int j = 0; j <= G; ++j) {
            const double u = static_cast<double>(i) / G, v = static_cast<double>(j) / G;
            cands.push_back({obj_uv(u, v), u, v});
        }
    std::stable_sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) { return a.f < b.f; });

    Cand best = cands.front();
    optim::NelderMeadOptions nm;
    nm.initial_step = 0.5 / G;
    nm.ftol = 1e-14;
    nm.xtol = 1e-12;
    for (int k = 0; k < 3 && k < static_cast<int>(cands.size()); ++k) {
        optim::Vec x0(2);
        x0 << cands[k].u, cands[k].v;
        const auto res = optim::nelder_mead([&](const optim::Vec& x) { return obj_uv(x[0], x[1]); }, x0, nm);
        if (res.fx < best.f) best = {res.fx, res.x[0], res.x[1]};
    }

    // Newton polish on the two equations when close to an exact match.
    if (best.f < 1e-2) {
        double u = best.u, v = best.v;
        for (int it = 0; it < 30 && best.f > 1e-13; ++it) {
            auto F = [&](double uu, double vv) {
                const auto g = gammas(r, ShapeMap::alpha(uu, vv), ShapeMap::beta(uu));
                return std::array<double, 2>{g[0] - g1, g[1] - g2};
            };
            const double h = 1e-7;
            const auto f0 = F(u, v);
            const double uh = u + (u + h <= 1.0 ? h : -h), vh = v + (v + h <= 1.0 ? h : -h);
            const auto fu = F(uh, v), fv = F(u, vh);
            const double a = (fu[0] - f0[0]) / (uh - u), b = (fv[0] - f0[0]) / (vh - v);
            const double c = (fu[1] - f0[1]) / (uh - u), d = (fv[1] - f0[1]) / (vh - v);
            const double det = a * d - b * c;
            if (!(std::fabs(det) > 0.0)) break;
            double du = -(d * f0[0] - b * f0[1]) / det, dv = -(-c * f0[0] + a * f0[1]) / det;
            bool moved = false;
            for (int ls = 0; ls < 20; ++ls) {
                const double nu = u + du, nv = v + dv;
                const double nf = obj_uv(nu, nv);
                if (nf < best.f) {
                    u = nu;
                    v = nv;
                    best = {nf, u, v};
                    moved = true;
                    break;
                }
                du *= 0.5;
                dv *= 0.5;
            }
            if (!moved) break;
        }
    }

    ShapeFit out;
    out.alpha = ShapeMap::alpha(best.u, best.v);
    out.beta = ShapeMap::beta(best.u);
    out.objective = best.f;
    const double e = 1e-6;
    out.boundary = best.u < e || best.u > 1.0 - e || best.v < e || best.v > 1.0 - e || best.f > 1e-3;
    return out;
}

ShapeFit profile_shape(std::span<const double> data, double /*mu*/, double r) {
    if (data.size() < 5) throw InsufficientData("profile_shape: needs at least 5 points");
    const SampleShape s = sample_shape(data);
    return match_shape(r, s.g1, s.g2);
}

double profile_scale(std::span<const double> data, double r, double alpha, double beta) {
    const SampleShape s = sample_shape(data);
    return std::sqrt(s.var / normalized_variance(r, alpha, beta));
}

SplineMax spline_argmax(const std::vector<double>& x, const std::vector<double>& y, int per_interval) {
    const std::size_t n = x.size();
    if (n < 2 || y.size() != n) throw DomainError("spline_argmax: need matching knots");
    // natural spline second derivatives (tridiagonal solve)
    std::vector<double> m(n, 0.0);
    if (n > 2) {
        std::vector<double> cp(n, 0.0), dp(n, 0.0);
        for (std::size_t i = 1; i + 1 < n; ++i) {
            const double h0 = x[i] - x[i - 1], h1 = x[i + 1] - x[i];
            const double a = h0, b = 2.0 * (h0 + h1), c = h1;
            const double d = 6.0 * ((y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0);
            const double den = b - a * cp[i - 1];
            cp[i] = c / den;
            dp[i] = (d - a * dp[i - 1]) / den;
        }
        for (std::size_t i = n - 2; i >= 1; --i) {
            m[i] = dp[i] - cp[i] * m[i + 1];
            if (i == 1) break;
        }
    }
    SplineMax best{x[0], y[0], 0};
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double h = x[i + 1] - x[i];
        for (int k = 0; k <= per_interval; ++k) {
            const double t = static_cast<double>(k) / per_interval;
            const double A = 1.0 - t, B = t;
            const double v = A * y[i] + B * y[i + 1] +
                             ((A * A * A - A) * m[i] + (B * B * B - B) * m[i + 1]) * h * h / 6.0;
            if (v > best.y) best = {x[i] + t * h, v, t < 0.5 ? i : i + 1};
        }
    }
    return best;
}

namespace {

struct SubEstimate {
    double sigma, r, alpha, beta, loglik;
    bool boundary;
};

class ProfileEvaluator {
public:
    explicit ProfileEvaluator(std::span<const double> data) : data_(data), shape_(sample_shape(data)) {}

    SubEstimate at(double mu) {
        const double r = profile_r(data_, mu);
        auto it = cache_.find(r);
        if (it == cache_.end()) it = cache_.emplace(r, match_shape(r, shape_.g1, shape_.g2)).first;
        const ShapeFit& sf = it->second;
        const double sigma = std::sqrt(shape_.var / normalized_variance(r, sf.alpha, sf.beta));
        const SkeGTDParams p(mu, sigma, r, sf.alpha, sf.beta);
        double ll = 0.0;
        for (double v : data_) ll += skegtd_logpdf(p, v);
        return {sigma, r, sf.alpha, sf.beta, ll, sf.boundary};
    }

private:
    std::span<const double> data_;
    SampleShape shape_;
    std::map<double, ShapeFit> cache_;  // r takes at most n + 1 values
};

}  // namespace

FitReport fit_tse(std::span<const double> data, const TseOptions& opt, ProfileGrid* grid_out) {
    if (data.size() < 20) throw InsufficientData("fit_tse: needs at least 20 observations");
    if (opt.grid_size < 3) throw DomainError("fit_tse: grid_size must be >= 3");
    for (double v : data)
        if (!std::isfinite(v)) throw DomainError("fit_tse: non-finite observation");
    const SampleShape shape = sample_shape(data);
    if (!(shape.var > 0.0)) throw InsufficientData("fit_tse: constant sample");
    const double half = opt.grid_half_width > 0.0 ? opt.grid_half_width : 1.5 * std::sqrt(shape.var);

    ProfileEvaluator eval(data);
    double center = hrm_mode(data);
    FitReport rep;
    rep.method = "tse";
    rep.names = {"mu", "sigma", "r", "alpha", "beta"};
    rep.n = data.size();
    rep.diagnostics["mu0"] = center;

    ProfileGrid grid;
    SplineMax smax{};
    bool boundary_mu = false;
    for (int pass = 0; pass < 2; ++pass) {
        grid = ProfileGrid{};
        const int s = opt.grid_size;
        for (int t = 0; t < s; ++t) {
            const double mu = center - half + 2.0 * half * t / (s - 1);
            const SubEstimate e = eval.at(mu);
            grid.mu_values.push_back(mu);
            grid.sigma.push_back(e.sigma);
            grid.r.push_back(e.r);
            grid.alpha.push_back(e.alpha);
            grid.beta.push_back(e.beta);
            grid.loglik.push_back(e.loglik);
        }
        smax = spline_argmax(grid.mu_values, grid.loglik);
        const bool at_edge = smax.x <= grid.mu_values.front() || smax.x >= grid.mu_values.back();
        if (!at_edge) break;
        if (pass == 1) {
            boundary_mu = true;
            break;
        }
        center = smax.x;  // re-center once
        rep.diagnostics["recentered"] = 1.0;
    }

    const double mu_hat = smax.x;
    const SubEstimate fin = eval.at(mu_hat);
    rep.estimates = {mu_hat, fin.sigma, fin.r, fin.alpha, fin.beta};
    rep.loglik = fin.loglik;
    rep.converged = !boundary_mu;
    rep.iterations = 1;
    rep.diagnostics["profile_max"] = smax.y;
    if (boundary_mu) rep.flags.push_back("boundary_mu");
    if (fin.boundary) rep.flags.push_back("shape_boundary");
    if (fin.alpha >= kAlphaHi * (1.0 - 1e-9)) rep.flags.push_back("alpha_censored");
    if (grid_out) *grid_out = std::move(grid);
    return rep;
}

}  // namespace skegtd
