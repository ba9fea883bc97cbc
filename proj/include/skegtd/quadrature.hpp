#pragma once

// Tanh-sinh (double exponential) quadrature on (0, 1). The integrand gets
// both x and 1 - x so endpoint singularities at either end keep full
// relative precision.

#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>

namespace skegtd::quad {

template <std::size_t N>
struct TanhSinhResult {
    std::array<double, N> value{};
    double rel_change = 0.0;
    int levels = 0;
};

/// One abscissa of the rule with its weight, all also in log form so that
/// integrands with strong endpoint singularities can fold the weight in
/// before exponentiating.
struct TsNode {
    double x, xc;          ///< u and 1 - u
    double log_x, log_xc;  ///< their logs, exact even where u or 1 - u underflows
    double log_w;          ///< log of the quadrature weight (without the step h)
};

/// Integrates N functions at once. f(const TsNode&) returns the weighted
/// integrand values w * g(u) as std::array<double, N>. The rule covers
/// t in [-tmax, tmax]; raise tmax for singularities like u^(-1 + eps).
template <std::size_t N, class F>
TanhSinhResult<N> tanh_sinh_unit(F&& f, double rel_tol = 1e-13, int max_level = 9, double tmax = 4.5) {
    auto add = [&](double t, std::array<double, N>& acc) {
        const double s = std::numbers::pi * std::sinh(t);
        TsNode nd;
        // log(1 / (1 + e^-s)) and log(1 / (1 + e^s)) without overflow
        const double lp = std::log1p(std::exp(-std::fabs(s)));
        nd.log_x = s >= 0.0 ? -lp : s - lp;
        nd.log_xc = s >= 0.0 ? -s - lp : -lp;
        nd.x = std::exp(nd.log_x);
        nd.xc = std::exp(nd.log_xc);
        nd.log_w = std::log(std::numbers::pi * std::cosh(t)) + nd.log_x + nd.log_xc;
        const auto v = f(nd);
        for (std::size_t k = 0; k < N; ++k)
            if (std::isfinite(v[k])) acc[k] += v[k];
    };

    TanhSinhResult<N> res;
    double h = 0.5;
    std::array<double, N> sum{};
    for (double t = -tmax; t <= tmax + 1e-12; t += h) add(t, sum);
    std::array<double, N> prev{};
    for (std::size_t k = 0; k < N; ++k) prev[k] = h * sum[k];
    for (int level = 1; level <= max_level; ++level) {
        h *= 0.5;
        for (double t = -tmax + h; t < tmax; t += 2.0 * h) add(t, sum);
        std::array<double, N> cur{};
        double change = 0.0;
        for (std::size_t k = 0; k < N; ++k) {
            cur[k] = h * sum[k];
            const double scale = std::max(std::fabs(cur[k]), 1e-300);
            change = std::max(change, std::fabs(cur[k] - prev[k]) / scale);
        }
        res.value = cur;
        res.rel_change = change;
        res.levels = level;
        if (level >= 3 && change <= rel_tol) break;
        prev = cur;
    }
    return res;
}

}  // namespace skegtd::quad
