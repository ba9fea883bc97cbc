#include "skegtd/distribution.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "skegtd/errors.hpp"
#include "skegtd/specfun.hpp"

namespace skegtd {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

int sign_of(double z) { return (z > 0.0) - (z < 0.0); }

// log(1 + exp(v)) without overflow.
double log1pexp(double v) {
    if (v > 35.0) return v + std::log1p(std::exp(-v));
    return std::log1p(std::exp(v));
}

// log t for t = |z|^beta / (2 alpha (1 + r s)^beta); z != 0 and 1 + r s > 0.
double log_t(double z, double r, double alpha, double beta) {
    const double side = 1.0 + r * sign_of(z);
    return beta * (std::log(std::fabs(z)) - std::log(side)) - std::log(2.0 * alpha);
}

void check_sigma_r_beta(double mu, double sigma, double r, double beta) {
    if (!std::isfinite(mu)) throw DomainError("mu must be finite");
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw DomainError("sigma must be positive and finite");
    if (!(std::fabs(r) <= 1.0)) throw DomainError("r must lie in [-1, 1]");
    if (!(beta > 0.0) || !std::isfinite(beta)) throw DomainError("beta must be positive and finite");
}

double binom(int n, int k) {
    double c = 1.0;
    for (int j = 1; j <= k; ++j) c = c * (n - k + j) / j;
    return c;
}

}  // namespace

SkeGTDParams::SkeGTDParams(double mu_, double sigma_, double r_, double alpha_, double beta_)
    : mu(mu_), sigma(sigma_), r(r_), alpha(alpha_), beta(beta_) {
    check_sigma_r_beta(mu, sigma, r, beta);
    if (!(alpha > 0.0) || !std::isfinite(alpha)) throw DomainError("alpha must be positive and finite");
}

SGNParams::SGNParams(double mu_, double sigma_, double r_, double beta_)
    : mu(mu_), sigma(sigma_), r(r_), beta(beta_) {
    check_sigma_r_beta(mu, sigma, r, beta);
}

double skegtd_log_norm_const(double alpha, double beta) {
    return std::log(beta) - std::numbers::ln2 - std::log(2.0 * alpha) / beta - specfun::log_beta(alpha, 1.0 / beta);
}

double skegtd_logpdf(const SkeGTDParams& p, double x) {
    const double z = (x - p.mu) / p.sigma;
    const double c = skegtd_log_norm_const(p.alpha, p.beta) - std::log(p.sigma);
    if (z == 0.0) return c;
    if (1.0 + p.r * sign_of(z) <= 0.0) return kNegInf;
    if (std::isinf(z)) return kNegInf;
    return c - (p.alpha + 1.0 / p.beta) * log1pexp(log_t(z, p.r, p.alpha, p.beta));
}

double skegtd_pdf(const SkeGTDParams& p, double x) { return std::exp(skegtd_logpdf(p, x)); }

double skegtd_cdf(const SkeGTDParams& p, double x) {
    if (std::isnan(x)) return x;
    const double z = (x - p.mu) / p.sigma;
    const double lo_mass = 0.5 * (1.0 - p.r);
    const double hi_mass = 0.5 * (1.0 + p.r);
    if (z == 0.0) return lo_mass;
    if (z < 0.0 && lo_mass == 0.0) return 0.0;
    if (z > 0.0 && hi_mass == 0.0) return 1.0;
    if (std::isinf(z)) return z < 0.0 ? 0.0 : 1.0;
    // u = 1/(1+t), 1-u = t/(1+t), both formed without cancellation.
    const double lt = log_t(z, p.r, p.alpha, p.beta);
    const double u = std::exp(-log1pexp(lt));
    const double uc = std::exp(-log1pexp(-lt));
    const double I = specfun::inc_beta(u, uc, p.alpha, 1.0 / p.beta).value;
    return z < 0.0 ? lo_mass * I : 1.0 - hi_mass * I;
}

double skegtd_quantile(const SkeGTDParams& p, double q) {
    if (!(q > 0.0 && q < 1.0)) throw DomainError("quantile: q must lie in (0, 1)");
    const double pivot = 0.5 * (1.0 - p.r);
    const double b = 1.0 / p.beta;
    double target, target_c, side;
    if (q <= pivot) {
        if (q == pivot) return p.mu;
        target = 2.0 * q / (1.0 - p.r);
        target_c = (1.0 - p.r - 2.0 * q) / (1.0 - p.r);
        side = -(1.0 - p.r);
    } else {
        target = 2.0 * (1.0 - q) / (1.0 + p.r);
        target_c = (2.0 * q - 1.0 + p.r) / (1.0 + p.r);
        side = 1.0 + p.r;
    }
    const auto sol = specfun::inv_inc_beta(target, target_c, p.alpha, b);
    if (sol.x <= 0.0) return side < 0.0 ? -std::numeric_limits<double>::infinity()
                                        : std::numeric_limits<double>::infinity();
    // |z| = |side| * (2 alpha (1-u)/u)^(1/beta)
    const double lz = (std::log(2.0 * p.alpha) + std::log(sol.xc) - std::log(sol.x)) / p.beta;
    return p.mu + p.sigma * side * std::exp(lz);
}

std::vector<double> skegtd_sample(const SkeGTDParams& p, std::size_t n, RngStream& rng) {
    std::vector<double> out(n);
    const double b = 1.0 / p.beta;
    const double scale = p.sigma * std::exp(std::numbers::ln2 * b);
    const double log_alpha = std::log(p.alpha);
    for (auto& v : out) {
        const double w = sample_two_point(0.5 * (1.0 + p.r), p.r + 1.0, p.r - 1.0, rng);
        const double log_y = sample_log_gamma(b, rng);
        // Z = 1 / Ga(alpha, rate alpha): log Z = log alpha - log Ga(alpha, 1)
        const double log_z = log_alpha - sample_log_gamma(p.alpha, rng);
        v = p.mu + scale * w * std::exp((log_y + log_z) * b);
    }
    return out;
}

double normalized_moment(double r, double alpha, double beta, int i) {
    if (i < 0) throw DomainError("moment order must be nonnegative");
    if (i == 0) return 1.0;
    if (!(static_cast<double>(i) < alpha * beta))
        throw MomentNotFinite("moment of order " + std::to_string(i) + " requires alpha*beta > " + std::to_string(i), i,
                              alpha * beta);
    const double b = 1.0 / beta;
    const double lg = i * b * std::log(2.0 * alpha) + specfun::log_gamma(alpha - i * b) +
                      specfun::log_gamma((i + 1) * b) - specfun::log_gamma(alpha) - specfun::log_gamma(b);
    const double bracket = std::pow(r + 1.0, i + 1) - std::pow(r - 1.0, i + 1);
    return 0.5 * std::exp(lg) * bracket;
}

double skegtd_moment(const SkeGTDParams& p, int k) {
    if (k < 1) throw DomainError("moment order must be positive");
    if (!(static_cast<double>(k) < p.alpha * p.beta))
        throw MomentNotFinite("moment of order " + std::to_string(k) + " requires alpha*beta > " + std::to_string(k), k,
                              p.alpha * p.beta);
    double acc = 0.0;
    for (int j = 0; j <= k; ++j) {
        const double mj = normalized_moment(p.r, p.alpha, p.beta, j);
        acc += binom(k, j) * std::pow(p.mu, k - j) * std::pow(p.sigma, j) * mj;
    }
    return acc;
}

double normalized_variance(double r, double alpha, double beta) {
    const double m1 = normalized_moment(r, alpha, beta, 1);
    const double m2 = normalized_moment(r, alpha, beta, 2);
    return m2 - m1 * m1;
}

Summary skegtd_summary(const SkeGTDParams& p) {
    Summary s;
    const double ab = p.alpha * p.beta;
    if (!(ab > 1.0)) return s;
    const double m1 = normalized_moment(p.r, p.alpha, p.beta, 1);
    s.mean = p.mu + p.sigma * m1;
    if (!(ab > 2.0)) return s;
    const double m2 = normalized_moment(p.r, p.alpha, p.beta, 2);
    const double var0 = m2 - m1 * m1;
    s.variance = p.sigma * p.sigma * var0;
    if (!(ab > 3.0)) return s;
    const double m3 = normalized_moment(p.r, p.alpha, p.beta, 3);
    const double c3 = m3 - 3.0 * m1 * m2 + 2.0 * m1 * m1 * m1;
    s.skewness = c3 / std::pow(var0, 1.5);
    if (!(ab > 4.0)) return s;
    const double m4 = normalized_moment(p.r, p.alpha, p.beta, 4);
    const double c4 = m4 - 4.0 * m1 * m3 + 6.0 * m1 * m1 * m2 - 3.0 * m1 * m1 * m1 * m1;
    s.kurtosis = c4 / (var0 * var0) - 3.0;
    return s;
}

double sgn_logpdf(const SGNParams& p, double x) {
    const double z = (x - p.mu) / p.sigma;
    const double b = 1.0 / p.beta;
    const double c = std::log(p.beta) - (1.0 + b) * std::numbers::ln2 - specfun::log_gamma(b) - std::log(p.sigma);
    if (z == 0.0) return c;
    const double side = 1.0 + p.r * sign_of(z);
    if (side <= 0.0 || std::isinf(z)) return kNegInf;
    return c - 0.5 * std::exp(p.beta * (std::log(std::fabs(z)) - std::log(side)));
}

double sgn_pdf(const SGNParams& p, double x) { return std::exp(sgn_logpdf(p, x)); }

double sgn_cdf(const SGNParams& p, double x) {
    if (std::isnan(x)) return x;
    const double z = (x - p.mu) / p.sigma;
    const double lo_mass = 0.5 * (1.0 - p.r);
    const double hi_mass = 0.5 * (1.0 + p.r);
    if (z == 0.0) return lo_mass;
    if (z < 0.0 && lo_mass == 0.0) return 0.0;
    if (z > 0.0 && hi_mass == 0.0) return 1.0;
    if (std::isinf(z)) return z < 0.0 ? 0.0 : 1.0;
    const double side = 1.0 + p.r * sign_of(z);
    const double g = 0.5 * std::exp(p.beta * (std::log(std::fabs(z)) - std::log(side)));
    const double Q = specfun::reg_inc_gamma_upper(g, 1.0 / p.beta);
    return z < 0.0 ? lo_mass * Q : 1.0 - hi_mass * Q;
}

std::vector<double> sgn_sample(const SGNParams& p, std::size_t n, RngStream& rng) {
    std::vector<double> out(n);
    const double b = 1.0 / p.beta;
    const double scale = p.sigma * std::exp(std::numbers::ln2 * b);
    for (auto& v : out) {
        const double w = sample_two_point(0.5 * (1.0 + p.r), p.r + 1.0, p.r - 1.0, rng);
        v = p.mu + scale * w * std::exp(sample_log_gamma(b, rng) * b);
    }
    return out;
}

std::optional<LimitingCase> limiting_case_check(const SkeGTDParams& p) {
    if (p.r == 0.0 && p.beta == 2.0 && p.alpha == 0.5) return LimitingCase{"Cauchy", true, {p.mu, p.sigma}};
    if (p.r == 1.0 && p.beta == 1.0) return LimitingCase{"ParetoII", true, {p.mu, 4.0 * p.sigma * p.alpha, p.alpha}};
    if (p.alpha >= kLimitAlpha) {
        if (p.r == 0.0) {
            if (p.beta == 2.0) return LimitingCase{"Normal", false, {p.mu, p.sigma}};
            if (p.beta == 1.0) return LimitingCase{"Laplace", false, {p.mu, 2.0 * p.sigma}};
            if (p.beta >= kLimitBeta) return LimitingCase{"Uniform", false, {p.mu - p.sigma, p.mu + p.sigma}};
        }
        return LimitingCase{"SGN", false, {p.mu, p.sigma, p.r, p.beta}};
    }
    if (p.r == 0.0 && p.beta == 2.0) return LimitingCase{"StudentT", true, {2.0 * p.alpha, p.mu, p.sigma}};
    return std::nullopt;
}

}  // namespace skegtd
