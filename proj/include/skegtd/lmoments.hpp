#pragma once

#include <array>
#include <span>

#include "skegtd/fit_report.hpp"

namespace skegtd {

enum class LMomentKind { theoretical, sample };

/// First four L-moments. Ratios are always recomputed from the lambdas.
struct LMomentSet {
    std::array<double, 4> lambda{};  ///< lambda1..lambda4
    int available = 4;               ///< number of leading entries that are defined
    LMomentKind kind = LMomentKind::theoretical;

    /// lambda_k for k = 1..4; throws InsufficientData if not available.
    double l(int k) const;
    double tau1() const { return l(2) / l(1); }  ///< L-CV
    double tau3() const { return l(3) / l(2); }  ///< L-skewness
    double tau4() const { return l(4) / l(2); }  ///< L-kurtosis
};

enum class LMomentMethod {
    series,    ///< truncated series; throws NonConvergence on slow tails
    integral,  ///< tanh-sinh quadrature of the same beta-function integrals
    automatic  ///< series where it converges, integral otherwise
};

/// Theoretical L-moments of the normalized SkeGTD(0, 1, r, alpha, beta).
/// Requires alpha*beta > 1.
LMomentSet theoretical_lmoments(double r, double alpha, double beta,
                                LMomentMethod method = LMomentMethod::automatic);

/// Sample L-moments. Needs n >= 1; lambda_k is available for k <= n.
LMomentSet sample_lmoments(std::span<const double> data);

/// Matching targets for the L-moment estimator. lambda1/lambda2 is used in
/// place of tau1 because it stays finite at r = 0.
struct LmeTargets {
    double inv_tau1;
    double tau3;
    double tau4;
};
LmeTargets lme_targets(const LMomentSet& s);

struct LmeOptions {
    double residual_limit = 1e-2;  ///< best residual norm must fall below this
};

/// L-moment estimate of (r, alpha, beta) for data from the normalized law.
FitReport fit_lme(std::span<const double> data, const LmeOptions& opt = {});
/// Same solver driven by given targets (no data; loglik is left NaN).
FitReport fit_lme_targets(const LmeTargets& t, const LmeOptions& opt = {});

}  // namespace skegtd
