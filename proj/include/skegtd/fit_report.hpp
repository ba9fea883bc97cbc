#pragma once

#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <vector>

namespace skegtd {

/// Common estimator output.
struct FitReport {
    std::string method;                  ///< "mle", "lme", "tse", ...
    std::vector<std::string> names;      ///< parameter names, same order as estimates
    std::vector<double> estimates;
    std::vector<double> standard_errors; ///< empty when unavailable
    double loglik = std::numeric_limits<double>::quiet_NaN();
    std::size_t n = 0;
    bool converged = false;
    int iterations = 0;
    std::vector<std::string> flags;          ///< e.g. "boundary_r", "small_sample"
    std::map<std::string, double> diagnostics;
    std::vector<double> loglik_trace;

    double get(const std::string& name) const {
        for (std::size_t i = 0; i < names.size(); ++i)
            if (names[i] == name) return estimates[i];
        return std::numeric_limits<double>::quiet_NaN();
    }
    bool has_flag(const std::string& f) const {
        for (const auto& g : flags)
            if (g == f) return true;
        return false;
    }
};

struct Criteria {
    double aic;
    double bic;
    double edc;
};

/// AIC = -2l + 2k, BIC = -2l + k log n, EDC = -2l + 0.2 sqrt(n) k.
inline Criteria information_criteria(double loglik, int n_params, std::size_t n) {
    const double k = n_params;
    const double dn = static_cast<double>(n);
    return {-2.0 * loglik + 2.0 * k, -2.0 * loglik + std::log(dn) * k, -2.0 * loglik + 0.2 * std::sqrt(dn) * k};
}

}  // namespace skegtd
