// Reference implementations. These define the semantics the vector
// variants are tested against.

#include <cmath>

#include "skegtd/kernels.hpp"

namespace skegtd::kernels::scalar {

void exp_batch(std::span<const double> in, std::span<double> out) {
    for (std::size_t i = 0; i < in.size(); ++i) out[i] = std::exp(in[i]);
}

void log_batch(std::span<const double> in, std::span<double> out) {
    for (std::size_t i = 0; i < in.size(); ++i) out[i] = std::log(in[i]);
}

double sum_log1p_cexp(std::span<const double> L, double c, double beta) {
    double acc = 0.0;
    for (double l : L) acc += std::log1p(c * std::exp(beta * l));
    return acc;
}

PowerSums weighted_power_sums(std::span<const double> L, std::span<const double> w, double beta) {
    double s0 = 0.0;
    double s1 = 0.0;
    const bool unit = w.empty();
    for (std::size_t i = 0; i < L.size(); ++i) {
        const double e = std::exp(beta * L[i]);
        if (e == 0.0) continue;
        const double we = unit ? e : w[i] * e;
        s0 += we;
        s1 += we * L[i];
    }
    return {s0, s1};
}

double estep_weights(std::span<const double> L, double c, double alpha, double beta, double a,
                     std::span<double> w_out) {
    double acc = 0.0;
    for (std::size_t i = 0; i < L.size(); ++i) {
        const double t = c * std::exp(beta * L[i]);
        const double b = alpha * (1.0 + t);
        w_out[i] = a / b;
        acc += std::log(alpha) + std::log1p(t);
    }
    return acc;
}

CentralSums central_sums(std::span<const double> x, double center) {
    double m2 = 0.0;
    double m3 = 0.0;
    double m4 = 0.0;
    for (double v : x) {
        const double d = v - center;
        const double d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    return {m2, m3, m4};
}

LMomentSums lmoment_sums(std::span<const double> sorted) {
    const double n = static_cast<double>(sorted.size());
    double sb = 0.0;
    double sc = 0.0;
    double sd = 0.0;
    for (std::size_t k = 0; k < sorted.size(); ++k) {
        const double i = static_cast<double>(k + 1);
        const double im1 = i - 1.0;
        const double nmi = n - i;
        const double bw = 2.0 * i - n - 1.0;
        const double cw = im1 * (i - 2.0) - 4.0 * im1 * nmi + nmi * (nmi - 1.0);
        const double dw = im1 * (i - 2.0) * (i - 3.0) - nmi * (nmi - 1.0) * (nmi - 2.0) +
                          9.0 * (n + 1.0 - 2.0 * i) * im1 * nmi;
        sb += bw * sorted[k];
        sc += cw * sorted[k];
        sd += dw * sorted[k];
    }
    return {sb, sc, sd};
}

}  // namespace skegtd::kernels::scalar
