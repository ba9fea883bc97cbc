#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "skegtd/rng.hpp"

namespace skegtd {

/// Five-parameter SkeGTD(mu, sigma, r, alpha, beta). The constructor rejects
/// sigma <= 0, |r| > 1, alpha <= 0, beta <= 0 and non-finite values.
struct SkeGTDParams {
    double mu = 0.0;
    double sigma = 1.0;
    double r = 0.0;
    double alpha = 1.0;
    double beta = 2.0;

    SkeGTDParams() = default;
    SkeGTDParams(double mu, double sigma, double r, double alpha, double beta);

    /// True when the k-th moment is finite (k < alpha * beta).
    bool has_moment(int k) const noexcept { return static_cast<double>(k) < alpha * beta; }
};

/// Skewed generalized normal SGN(mu, sigma, r, beta): the alpha -> inf limit.
struct SGNParams {
    double mu = 0.0;
    double sigma = 1.0;
    double r = 0.0;
    double beta = 2.0;

    SGNParams() = default;
    SGNParams(double mu, double sigma, double r, double beta);
};

/// log of the density at x = mu for the normalized law (sigma = 1).
double skegtd_log_norm_const(double alpha, double beta);

double skegtd_logpdf(const SkeGTDParams& p, double x);
double skegtd_pdf(const SkeGTDParams& p, double x);
double skegtd_cdf(const SkeGTDParams& p, double x);
/// Throws DomainError unless 0 < q < 1.
double skegtd_quantile(const SkeGTDParams& p, double q);
std::vector<double> skegtd_sample(const SkeGTDParams& p, std::size_t n, RngStream& rng);

/// E[X0^i] for the normalized law. Throws MomentNotFinite if i >= alpha*beta.
double normalized_moment(double r, double alpha, double beta, int i);
/// Raw moment E[X^k]. Throws MomentNotFinite if k >= alpha*beta.
double skegtd_moment(const SkeGTDParams& p, int k);
/// Var(X0); requires alpha*beta > 2.
double normalized_variance(double r, double alpha, double beta);

/// Each statistic is empty when the moment it needs does not exist.
struct Summary {
    std::optional<double> mean;
    std::optional<double> variance;
    std::optional<double> skewness;  ///< gamma1
    std::optional<double> kurtosis;  ///< gamma2, excess
};
Summary skegtd_summary(const SkeGTDParams& p);

double sgn_logpdf(const SGNParams& p, double x);
double sgn_pdf(const SGNParams& p, double x);
double sgn_cdf(const SGNParams& p, double x);
std::vector<double> sgn_sample(const SGNParams& p, std::size_t n, RngStream& rng);

/// Named classical law a parameter vector reduces to. `exact` is false for
/// the large-alpha approximations (alpha >= kLimitAlpha).
struct LimitingCase {
    std::string law;
    bool exact = false;
    std::vector<double> params;  ///< law-specific, see limiting_case_check
};

inline constexpr double kLimitAlpha = 1e4;
inline constexpr double kLimitBeta = 1e3;

/// Recognized laws and their parameter vectors:
///   Cauchy(mu, sigma)                    r = 0, alpha = 1/2, beta = 2
///   StudentT(df = 2 alpha, mu, sigma)    r = 0, beta = 2, alpha < 1e4
///   ParetoII(mu, 4 sigma alpha, alpha)   r = 1, beta = 1
///   Normal(mu, sigma)                    alpha >= 1e4, r = 0, beta = 2
///   Laplace(mu, 2 sigma)                 alpha >= 1e4, r = 0, beta = 1
///   Uniform(mu - sigma, mu + sigma)      alpha >= 1e4, r = 0, beta >= 1e3
///   SGN(mu, sigma, r, beta)              alpha >= 1e4 otherwise
std::optional<LimitingCase> limiting_case_check(const SkeGTDParams& p);

}  // namespace skegtd
