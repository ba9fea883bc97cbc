#pragma once

// Small deterministic optimizers shared by the estimators.

#include <functional>

#include <Eigen/Dense>

namespace skegtd::optim {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using ScalarFn = std::function<double(double)>;
using ObjectiveFn = std::function<double(const Vec&)>;
using ResidualFn = std::function<Vec(const Vec&)>;

/// Root of f in [lo, hi]; f(lo) and f(hi) must differ in sign.
/// Throws NonConvergence if they do not or if max_iter is exhausted.
double brent_root(const ScalarFn& f, double lo, double hi, double tol = 1e-12, int max_iter = 200);

struct Min1D {
    double x;
    double fx;
};
/// Local minimum of f on [lo, hi] (golden section with parabolic steps).
Min1D brent_minimize(const ScalarFn& f, double lo, double hi, double tol = 1e-10, int max_iter = 200);

struct Result {
    Vec x;
    double fx = 0.0;
    int iterations = 0;
    bool converged = false;
};

struct NelderMeadOptions {
    double initial_step = 0.25;
    double ftol = 1e-12;
    double xtol = 1e-10;
    int max_iter = 2000;
};
Result nelder_mead(const ObjectiveFn& f, const Vec& x0, const NelderMeadOptions& opt = {});

struct BfgsOptions {
    double gtol = 1e-6;
    double ftol = 1e-13;
    int max_iter = 500;
    double fd_step = 1e-6;
};
/// Quasi-Newton minimization with central-difference gradients and a
/// backtracking Armijo line search. Non-finite objective values are treated
/// as +inf so callers can encode constraints by returning inf.
Result bfgs(const ObjectiveFn& f, const Vec& x0, const BfgsOptions& opt = {});

struct LmOptions {
    double ftol = 1e-15;
    double xtol = 1e-12;
    int max_iter = 300;
    double fd_step = 1e-7;
};
/// Box-projected Levenberg-Marquardt on 0.5*|R(x)|^2. fx holds |R|^2.
Result levenberg_marquardt(const ResidualFn& r, const Vec& x0, const Vec& lo, const Vec& hi,
                           const LmOptions& opt = {});

/// Central differences with relative step h*max(1,|x_i|).
Vec numeric_gradient(const ObjectiveFn& f, const Vec& x, double h = 1e-5);
Mat numeric_hessian(const ObjectiveFn& f, const Vec& x, double h = 1e-4);

}  // namespace skegtd::optim
