#pragma once

#include <array>

#include "skegtd/distribution.hpp"
#include "support/oracles.hpp"

namespace oracle {

/// lambda_k = integral of x P*_{k-1}(F(x)) f(x) dx with shifted Legendre P*.
inline std::array<double, 4> lmoments_by_quadrature(double r, double alpha, double beta) {
    const skegtd::SkeGTDParams p(0.0, 1.0, r, alpha, beta);
    std::array<double, 4> out{};
    for (int k = 0; k < 4; ++k) {
        auto g = [&](double x) {
            const double f = skegtd::skegtd_pdf(p, x);
            if (f == 0.0) return 0.0;
            const double u = skegtd::skegtd_cdf(p, x);
            double w = 1.0;
            if (k == 1) w = 2 * u - 1;
            if (k == 2) w = 6 * u * u - 6 * u + 1;
            if (k == 3) w = 20 * u * u * u - 30 * u * u + 12 * u - 1;
            return x * w * f;
        };
        out[k] = integrate_real_line(g, 0.0, 1.0);
    }
    return out;
}

/// lambda_1 as the mean and lambda_2..4 as integrals of F(1-F) times a polynomial
/// in F (integration by parts of the form above). The survival function is taken
/// from the mirrored law, 1 - F_r(x) = F_{-r}(-x), so the right tail keeps
/// full relative precision.
inline std::array<double, 4> lmoments_by_parts(double r, double alpha, double beta) {
    const skegtd::SkeGTDParams p(0.0, 1.0, r, alpha, beta);
    const skegtd::SkeGTDParams m(0.0, 1.0, -r, alpha, beta);
    std::array<double, 4> out{};
    out[0] = integrate_real_line([&](double x) { return x * skegtd::skegtd_pdf(p, x); }, 0.0, 1.0);
    for (int k = 1; k < 4; ++k) {
        auto g = [&](double x) {
            const double F = skegtd::skegtd_cdf(p, x);
            const double S = skegtd::skegtd_cdf(m, -x);
            double w = 1.0;
            if (k == 2) w = F - S;
            if (k == 3) w = 1.0 - 5.0 * F * S;
            return F * S * w;
        };
        out[k] = integrate_real_line(g, 0.0, 1.0);
    }
    return out;
}

}  // namespace oracle
