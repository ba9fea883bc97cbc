#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace skegtd {

/// y_i = beta0 + beta1 x_i + e_i with e_i ~ SkeGTD(0, sigma, r, alpha, beta).
struct RegressionFit {
    double beta0 = 0.0;
    double beta1 = 0.0;
    double sigma = 1.0;
    double r = 0.0;
    double alpha = 1.0;
    double beta = 2.0;
    double loglik = 0.0;
    std::size_t n = 0;
    /// Order (beta0, beta1, sigma, r, alpha, beta); NaN where the empirical
    /// information is singular.
    std::array<double, 6> standard_errors{};
    /// beta0 + E(e); empty when alpha * beta <= 1.
    std::optional<double> adjusted_intercept;
    bool converged = false;
    std::vector<std::string> flags;
    std::vector<double> loglik_trace;  ///< best objective after each start

    static constexpr std::array<const char*, 6> names{"beta0", "beta1", "sigma", "r", "alpha", "beta"};
    std::array<double, 6> estimates() const { return {beta0, beta1, sigma, r, alpha, beta}; }
};

struct RegressionOptions {
    bool fix_r_zero = false;    ///< fit the symmetric submodel
    double alpha_min = 0.05;
};

RegressionFit fit_regression(std::span<const double> x, std::span<const double> y, const RegressionOptions& opt = {});

/// Sum of log densities at the given coefficients and error law.
double regression_loglik(std::span<const double> x, std::span<const double> y, const std::array<double, 6>& theta);

struct ResidualReport {
    std::vector<double> residuals;
    std::vector<double> grid;     ///< 512 points over the residual range widened by 10% each side
    std::vector<double> density;  ///< fitted error density on grid
};

ResidualReport residual_report(const RegressionFit& fit, std::span<const double> x, std::span<const double> y);

}  // namespace skegtd
