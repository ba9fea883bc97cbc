#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "skegtd/fit_report.hpp"
#include "skegtd/rng.hpp"

namespace skegtd {

enum class Family { Normal, StudentT, SN, ST, SC, SkeGTD };

std::string_view family_name(Family f);
/// Parses "normal", "t", "sn", "st", "sc", "skegtd" (case-insensitive).
Family parse_family(std::string_view s);
/// Number of free parameters of the location-scale family.
int family_rho(Family f);

/// Skew-Cauchy density with location xi, scale omega, shape alpha.
double sc_logpdf(double xi, double omega, double alpha, double x);
double sc_cdf(double xi, double omega, double alpha, double x);
/// Draws by inverting the closed-form cdf.
std::vector<double> sc_sample(double xi, double omega, double alpha, std::size_t n, RngStream& rng);

/// Two-piece (Fernandez-Steel) skew-t with nu > 0, gamma > 0, standard form.
double st_logpdf(double nu, double gamma, double x);
/// Student-t log density with nu degrees of freedom, standard form.
double t_logpdf(double nu, double x);
/// Azzalini skew-normal log density, standard form.
double sn_logpdf(double lambda, double x);

/// Log density of a fitted candidate; params in the order of param_names.
double family_logpdf(Family f, std::span<const double> params, double x);

struct CandidateModel {
    Family family = Family::Normal;
    std::vector<std::string> param_names;
    std::vector<double> params;
    double loglik = 0.0;
    int rho = 0;
    bool failed = false;
    std::vector<std::string> flags;
};

enum class SkegtdFit {
    tse,       ///< two-step estimate as is
    tse_ml     ///< two-step estimate refined by direct likelihood maximization
};

struct CandidateOptions {
    SkegtdFit skegtd = SkegtdFit::tse_ml;
};

/// Maximum-likelihood fit of one family (location-scale versions of t, SN,
/// ST, SC; closed form for Normal). Failed fits are marked, not thrown.
CandidateModel fit_candidate(Family f, std::span<const double> data, const CandidateOptions& opt = {});

enum class Criterion { AIC, BIC, EDC };
std::string_view criterion_name(Criterion c);
Criteria criteria(const CandidateModel& m, std::size_t n);
double criterion_value(const CandidateModel& m, std::size_t n, Criterion c);
/// True if `a` is strictly better (smaller criterion) than `b`. Failed fits
/// never win; a failed `b` loses to any successful `a`.
bool strictly_better(const CandidateModel& a, const CandidateModel& b, std::size_t n, Criterion c);

}  // namespace skegtd
