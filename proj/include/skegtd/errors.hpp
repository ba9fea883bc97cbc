#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace skegtd {

/// Argument outside the mathematical domain of a function or parameter set.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Requested moment (or moment-derived statistic) does not exist: k >= alpha*beta.
class MomentNotFinite : public DomainError {
public:
    MomentNotFinite(const std::string& what, int order, double alpha_beta)
        : DomainError(what), order_(order), alpha_beta_(alpha_beta) {}
    int order() const noexcept { return order_; }
    double alpha_beta() const noexcept { return alpha_beta_; }

private:
    int order_;
    double alpha_beta_;
};

/// An iterative procedure stopped without meeting its tolerance.
class NonConvergence : public std::runtime_error {
public:
    NonConvergence(const std::string& what, double partial = 0.0, int iterations = 0)
        : std::runtime_error(what), partial_(partial), iterations_(iterations) {}
    double partial_result() const noexcept { return partial_; }
    int iterations() const noexcept { return iterations_; }

private:
    double partial_;
    int iterations_;
};

/// Not enough (or degenerate) data for an estimator.
class InsufficientData : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Fitting failed for every start.
class FitFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Information matrix is not positive definite.
class NotPositiveDefinite : public std::runtime_error {
public:
    NotPositiveDefinite(const std::string& what, std::vector<double> eigenvalues)
        : std::runtime_error(what), eigenvalues_(std::move(eigenvalues)) {}
    const std::vector<double>& eigenvalues() const noexcept { return eigenvalues_; }

private:
    std::vector<double> eigenvalues_;
};

}  // namespace skegtd
