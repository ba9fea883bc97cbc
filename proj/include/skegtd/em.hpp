#pragma once

#include <array>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "skegtd/fit_report.hpp"

namespace skegtd {

/// EM working parameters (r, alpha, eta) with eta = 1/beta > 0.
struct OmegaParams {
    double r = 0.0;
    double alpha = 1.0;
    double eta = 0.5;

    double beta() const { return 1.0 / eta; }
    static OmegaParams from_beta(double r, double alpha, double beta) { return {r, alpha, 1.0 / beta}; }
};

/// Iterate state. b_t holds the per-observation posterior rates of the
/// latent mixing variable (same order as the data), a_t its shape.
struct EMState {
    OmegaParams omega;
    int iteration = 0;
    double loglik = 0.0;
    double a_t = 0.0;
    std::vector<double> b_t;
};

/// Builds a state at omega with a_t, b_t and loglik filled in.
EMState make_state(const OmegaParams& omega, std::span<const double> data);

/// Sum of normalized SkeGTD(0, 1, r, alpha, 1/eta) log-densities.
double observed_loglik(const OmegaParams& omega, std::span<const double> data);

struct EStepResult {
    std::vector<double> ez;     ///< E(z_i | y_i) = a / b_i
    std::vector<double> elogz;  ///< E(log z_i | y_i) = psi(a) - log b_i
};
EStepResult e_step(const EMState& state, std::span<const double> data);

/// Expected complete-data log-likelihood Q(omega | state).
double q_function(const OmegaParams& omega, const EMState& state, std::span<const double> data);

/// One maximization step: alpha by a bracketed root of its score equation,
/// (r, eta) by the closed-form r optimum for fixed eta and a 1-D search in
/// eta over [0.04, 5]. r is clamped to [-0.999, 0.999].
OmegaParams m_step(const EMState& state, std::span<const double> data);

/// Per-observation score of the normalized log-density in (r, alpha, eta).
std::array<double, 3> score(const OmegaParams& omega, double y);
/// Mean score over the data (zero at an interior MLE).
std::array<double, 3> mean_score(const OmegaParams& omega, std::span<const double> data);

struct MleOptions {
    int max_iter = 500;
    double tol = 1e-4;  ///< sup-norm of the change in (r, alpha, eta)
};

/// Default starting points: r from the sign balance of the data,
/// (alpha, beta) in {(1,2), (3,2.5), (5,1), (2,4), (10,2), (0.8,1.5)}.
std::vector<OmegaParams> default_starts(std::span<const double> data);

/// EM maximum likelihood for the normalized SkeGTD. Estimates are reported
/// as (r, alpha, beta). Needs n >= 10.
FitReport fit_mle(std::span<const double> data, std::optional<OmegaParams> init = std::nullopt,
                  const MleOptions& opt = {});

struct InfoMatrices {
    Eigen::Matrix3d J_omega;   ///< per-observation information in (r, alpha, eta)
    Eigen::Matrix3d I_theta;   ///< per-observation information in (r, alpha, beta)
    Eigen::Vector3d standard_errors;  ///< sqrt(diag(I_theta^-1) / n)
};

/// Closed-form expected information. Throws NotPositiveDefinite (with the
/// eigenvalues of I_theta) if I_theta is not positive definite.
InfoMatrices fisher_info(const OmegaParams& omega, std::size_t n = 1);

}  // namespace skegtd
