#pragma once

// Special functions used throughout the library. All functions are pure and
// thread-safe; domain violations throw skegtd::DomainError.

namespace skegtd::specfun {

/// ln Gamma(x), x > 0.
double log_gamma(double x);

/// ln B(a, b) = lgamma(a) + lgamma(b) - lgamma(a + b).
double log_beta(double a, double b);

double digamma(double x);
double trigamma(double x);

/// Regularized incomplete beta I_x(a, b).
double reg_inc_beta(double x, double a, double b);

/// I_x(a, b) together with its complement 1 - I_x(a, b), each computed without
/// cancellation. `xc` must equal 1 - x; passing it separately keeps precision
/// when x is close to 1.
struct IncBeta {
    double value;
    double complement;
};
IncBeta inc_beta(double x, double xc, double a, double b);

/// Inverse of reg_inc_beta in x: returns x with I_x(a, b) = p.
double inv_reg_inc_beta(double p, double a, double b);

/// Solves I_x(a, b) = p where q = 1 - p is supplied separately. Returns both x
/// and 1 - x so callers can avoid forming 1 - x themselves.
struct InvIncBeta {
    double x;
    double xc;
};
InvIncBeta inv_inc_beta(double p, double q, double a, double b);

/// Regularized lower incomplete gamma P(a, x).
double reg_inc_gamma_lower(double x, double a);
/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x).
double reg_inc_gamma_upper(double x, double a);

}  // namespace skegtd::specfun
