#include "skegtd/model_select.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numbers>

#include "skegtd/distribution.hpp"
#include "skegtd/errors.hpp"
#include "skegtd/optim.hpp"
#include "skegtd/specfun.hpp"
#include "skegtd/two_step.hpp"

namespace skegtd {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kSnShapeCap = 50.0;

// log Phi(t), accurate in the far left tail.
double log_ndtr(double t) {
    if (t > -20.0) return std::log(0.5 * std::erfc(-t / std::numbers::sqrt2));
    // asymptotic series for the Mills ratio
    const double t2 = t * t;
    const double s = 1.0 - 1.0 / t2 + 3.0 / (t2 * t2) - 15.0 / (t2 * t2 * t2);
    return -0.5 * t2 - std::log(-t) - 0.5 * std::log(2.0 * std::numbers::pi) + std::log(s);
}

double median_of(std::vector<double> x) {
    std::sort(x.begin(), x.end());
    const std::size_t n = x.size();
    return n % 2 ? x[n / 2] : 0.5 * (x[n / 2 - 1] + x[n / 2]);
}

double mad_of(std::span<const double> data, double med) {
    std::vector<double> d;
    d.reserve(data.size());
    for (double v : data) d.push_back(std::fabs(v - med));
    return 1.4826 * median_of(std::move(d));
}

double total_loglik(Family f, std::span<const double> params, std::span<const double> data) {
    double s = 0.0;
    for (double v : data) {
        s += family_logpdf(f, params, v);
        if (!std::isfinite(s)) return -kInf;
    }
    return s;
}

// Transformed-parameter fit shared by t, SN, ST, SC and the SkeGTD polish.
struct Transform {
    std::function<std::vector<double>(const optim::Vec&)> to_params;
};

CandidateModel best_of_starts(Family f, std::span<const double> data, const Transform& tr,
                              const std::vector<optim::Vec>& starts) {
    CandidateModel m;
    m.family = f;
    m.rho = family_rho(f);
    double best = -kInf;
    std::vector<double> best_params;
    auto negll = [&](const optim::Vec& z) {
        const auto p = tr.to_params(z);
        for (double v : p)
            if (!std::isfinite(v)) return kInf;
        try {
            return -total_loglik(f, p, data);
        } catch (const DomainError&) {
            return kInf;
        }
    };
    optim::BfgsOptions bo;
    bo.max_iter = 300;
    bo.gtol = 1e-7;
    for (const auto& s : starts) {
        const auto res = optim::bfgs(negll, s, bo);
        if (std::isfinite(res.fx) && -res.fx > best) {
            best = -res.fx;
            best_params = tr.to_params(res.x);
        }
    }
    if (!std::isfinite(best)) {
        m.failed = true;
        return m;
    }
    m.params = best_params;
    m.loglik = total_loglik(f, m.params, data);
    return m;
}

}  // namespace

std::string_view family_name(Family f) {
    switch (f) {
        case Family::Normal: return "N";
        case Family::StudentT: return "t";
        case Family::SN: return "SN";
        case Family::ST: return "ST";
        case Family::SC: return "SC";
        case Family::SkeGTD: return "SkeGTD";
    }
    return "?";
}

Family parse_family(std::string_view s) {
    std::string l(s);
    for (auto& c : l) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (l == "n" || l == "normal") return Family::Normal;
    if (l == "t" || l == "studentt" || l == "student-t") return Family::StudentT;
    if (l == "sn") return Family::SN;
    if (l == "st") return Family::ST;
    if (l == "sc") return Family::SC;
    if (l == "skegtd") return Family::SkeGTD;
    throw DomainError("unknown family '" + std::string(s) + "'");
}

int family_rho(Family f) {
    switch (f) {
        case Family::Normal: return 2;
        case Family::StudentT: return 3;
        case Family::SN: return 3;
        case Family::ST: return 4;
        case Family::SC: return 3;
        case Family::SkeGTD: return 5;
    }
    return 0;
}

double sc_logpdf(double xi, double omega, double alpha, double x) {
    if (!(omega > 0.0)) throw DomainError("sc_logpdf: omega must be positive");
    const double z = (x - xi) / omega;
    const double z2 = z * z;
    const double skew = 1.0 + alpha * z / std::sqrt(1.0 + z2 * (1.0 + alpha * alpha));
    if (!(skew > 0.0)) return -kInf;
    return -std::log(std::numbers::pi * omega) - std::log1p(z2) + std::log(skew);
}

double sc_cdf(double xi, double omega, double alpha, double x) {
    if (!(omega > 0.0)) throw DomainError("sc_cdf: omega must be positive");
    const double z = (x - xi) / omega;
    if (std::isinf(z)) return z < 0.0 ? 0.0 : 1.0;
    if (alpha == 0.0) return 0.5 + std::atan(z) / std::numbers::pi;
    const double s = std::sqrt(1.0 + (1.0 + alpha * alpha) * z * z);
    const double c = alpha > 0.0 ? 0.0 : 1.0;
    return (std::atan(z) + std::atan(s / alpha)) / std::numbers::pi + c;
}

std::vector<double> sc_sample(double xi, double omega, double alpha, std::size_t n, RngStream& rng) {
    if (!(omega > 0.0)) throw DomainError("sc_sample: omega must be positive");
    std::vector<double> out(n);
    const double half_pi = 0.5 * std::numbers::pi;
    for (auto& v : out) {
        const double u = rng.uniform();
        // F is monotone in theta = atan(z) on (-pi/2, pi/2).
        auto g = [&](double th) { return sc_cdf(0.0, 1.0, alpha, std::tan(th)) - u; };
        const double th = optim::brent_root(g, -half_pi + 1e-15, half_pi - 1e-15, 1e-15);
        v = xi + omega * std::tan(th);
    }
    return out;
}

double t_logpdf(double nu, double x) {
    if (!(nu > 0.0)) throw DomainError("t_logpdf: nu must be positive");
    return specfun::log_gamma(0.5 * (nu + 1.0)) - specfun::log_gamma(0.5 * nu) - 0.5 * std::log(nu * std::numbers::pi) -
           0.5 * (nu + 1.0) * std::log1p(x * x / nu);
}

double st_logpdf(double nu, double gamma, double x) {
    if (!(gamma > 0.0)) throw DomainError("st_logpdf: gamma must be positive");
    const double scaled = x <= 0.0 ? gamma * x : x / gamma;
    return std::numbers::ln2 - std::log(gamma + 1.0 / gamma) + t_logpdf(nu, scaled);
}

double sn_logpdf(double lambda, double x) {
    return std::numbers::ln2 - 0.5 * x * x - 0.5 * std::log(2.0 * std::numbers::pi) + log_ndtr(lambda * x);
}

double family_logpdf(Family f, std::span<const double> p, double x) {
    switch (f) {
        case Family::Normal: {
            if (!(p[1] > 0.0)) throw DomainError("normal: sigma must be positive");
            const double z = (x - p[0]) / p[1];
            return -0.5 * z * z - std::log(p[1]) - 0.5 * std::log(2.0 * std::numbers::pi);
        }
        case Family::StudentT:
            if (!(p[1] > 0.0)) throw DomainError("t: sigma must be positive");
            return t_logpdf(p[2], (x - p[0]) / p[1]) - std::log(p[1]);
        case Family::SN:
            if (!(p[1] > 0.0)) throw DomainError("SN: omega must be positive");
            return sn_logpdf(p[2], (x - p[0]) / p[1]) - std::log(p[1]);
        case Family::ST:
            if (!(p[1] > 0.0)) throw DomainError("ST: sigma must be positive");
            return st_logpdf(p[2], p[3], (x - p[0]) / p[1]) - std::log(p[1]);
        case Family::SC: return sc_logpdf(p[0], p[1], p[2], x);
        case Family::SkeGTD: return skegtd_logpdf(SkeGTDParams(p[0], p[1], p[2], p[3], p[4]), x);
    }
    return -kInf;
}

CandidateModel fit_candidate(Family f, std::span<const double> data, const CandidateOptions& opt) {
    if (data.size() < 10) throw InsufficientData("fit_candidate: needs at least 10 observations");
    const std::size_t n = data.size();
    double sum = 0.0;
    for (double v : data) sum += v;
    const double mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (double v : data) ss += (v - mean) * (v - mean);
    const double sd_ml = std::sqrt(ss / static_cast<double>(n));
    const double med = median_of(std::vector<double>(data.begin(), data.end()));
    double mad = mad_of(data, med);
    if (!(mad > 0.0)) mad = sd_ml > 0.0 ? sd_ml : 1.0;
    const double sd = sd_ml > 0.0 ? sd_ml : 1.0;
    auto vec = [](std::initializer_list<double> l) {
        optim::Vec v(static_cast<Eigen::Index>(l.size()));
        Eigen::Index i = 0;
        for (double x : l) v[i++] = x;
        return v;
    };

    CandidateModel m;
    switch (f) {
        case Family::Normal: {
            m.family = f;
            m.rho = 2;
            m.params = {mean, sd_ml};
            if (!(sd_ml > 0.0)) {
                m.failed = true;
                break;
            }
            m.loglik = total_loglik(f, m.params, data);
            break;
        }
        case Family::StudentT: {
            Transform tr{[](const optim::Vec& z) { return std::vector<double>{z[0], std::exp(z[1]), std::exp(z[2])}; }};
            m = best_of_starts(f, data, tr,
                               {vec({med, std::log(mad), std::log(1.0)}), vec({med, std::log(mad), std::log(4.0)}),
                                vec({med, std::log(sd), std::log(10.0)}), vec({mean, std::log(sd), std::log(30.0)})});
            break;
        }
        case Family::SN: {
            // lambda = cap * tanh(s / cap) keeps |lambda| < cap
            Transform tr{[](const optim::Vec& z) {
                return std::vector<double>{z[0], std::exp(z[1]), kSnShapeCap * std::tanh(z[2] / kSnShapeCap)};
            }};
            std::vector<optim::Vec> starts;
            for (double lam : {-3.0, 0.0, 3.0, 10.0}) {
                const double d = lam / std::sqrt(1.0 + lam * lam);
                const double om = sd / std::sqrt(1.0 - 2.0 * d * d / std::numbers::pi);
                const double xi = mean - om * d * std::sqrt(2.0 / std::numbers::pi);
                const double s = kSnShapeCap * std::atanh(lam / kSnShapeCap);
                starts.push_back(vec({xi, std::log(om), s}));
            }
            m = best_of_starts(f, data, tr, starts);
            if (!m.failed && std::fabs(m.params[2]) > 0.999 * kSnShapeCap) m.flags.push_back("shape_capped");
            break;
        }
        case Family::ST: {
            Transform tr{[](const optim::Vec& z) {
                return std::vector<double>{z[0], std::exp(z[1]), std::exp(z[2]), std::exp(z[3])};
            }};
            m = best_of_starts(f, data, tr,
                               {vec({med, std::log(mad), std::log(4.0), 0.0}), vec({med, std::log(mad), std::log(2.0), std::log(2.0)}),
                                vec({med, std::log(mad), std::log(2.0), std::log(0.5)}),
                                vec({med, std::log(sd), std::log(10.0), mean > med ? std::log(1.5) : std::log(1.0 / 1.5)})});
            break;
        }
        case Family::SC: {
            Transform tr{[](const optim::Vec& z) { return std::vector<double>{z[0], std::exp(z[1]), z[2]}; }};
            const double sgn = mean >= med ? 1.0 : -1.0;
            m = best_of_starts(f, data, tr,
                               {vec({med, std::log(mad), 0.0}), vec({med - sgn * mad, std::log(mad), 5.0 * sgn}),
                                vec({med, std::log(mad), -5.0 * sgn}), vec({med - sgn * mad, std::log(mad), 20.0 * sgn})});
            break;
        }
        case Family::SkeGTD: {
            m.family = f;
            m.rho = 5;
            FitReport tse;
            try {
                tse = fit_tse(data);
            } catch (const std::exception&) {
                m.failed = true;
                break;
            }
            m.params = tse.estimates;
            m.loglik = tse.loglik;
            for (const auto& fl : tse.flags) m.flags.push_back(fl);
            if (opt.skegtd == SkegtdFit::tse_ml) {
                // (mu, log sigma, atanh r, log alpha, log beta); alpha and beta kept finite
                Transform tr{[](const optim::Vec& z) {
                    const double a = std::exp(z[3]), b = std::exp(z[4]);
                    if (a > 1e4 || b > 50.0 || b < 0.05 || a < 0.02) return std::vector<double>{kInf, kInf, kInf, kInf, kInf};
                    return std::vector<double>{z[0], std::exp(z[1]), std::tanh(z[2]), a, b};
                }};
                const auto& e = tse.estimates;
                const double rc = std::clamp(e[2], -0.95, 0.95);
                std::vector<optim::Vec> starts = {
                    vec({e[0], std::log(e[1]), std::atanh(rc), std::log(e[3]), std::log(e[4])}),
                    vec({e[0], std::log(e[1]), std::atanh(rc), std::log(2.0), std::log(2.0)}),
                    vec({med, std::log(mad), std::atanh(rc), std::log(1.0), std::log(1.5)}),
                    vec({med, std::log(mad), 0.0, std::log(0.7), std::log(2.0)})};
                CandidateModel ml = best_of_starts(f, data, tr, starts);
                if (!ml.failed && ml.loglik > m.loglik) {
                    m.params = ml.params;
                    m.loglik = ml.loglik;
                    m.flags.clear();
                    m.flags.push_back("ml_refined");
                }
            }
            break;
        }
    }
    m.family = f;
    m.rho = family_rho(f);
    switch (f) {
        case Family::Normal: m.param_names = {"mu", "sigma"}; break;
        case Family::StudentT: m.param_names = {"mu", "sigma", "nu"}; break;
        case Family::SN: m.param_names = {"xi", "omega", "lambda"}; break;
        case Family::ST: m.param_names = {"mu", "sigma", "nu", "gamma"}; break;
        case Family::SC: m.param_names = {"xi", "omega", "alpha"}; break;
        case Family::SkeGTD: m.param_names = {"mu", "sigma", "r", "alpha", "beta"}; break;
    }
    if (!m.failed && !std::isfinite(m.loglik)) m.failed = true;
    return m;
}

std::string_view criterion_name(Criterion c) {
    switch (c) {
        case Criterion::AIC: return "AIC";
        case Criterion::BIC: return "BIC";
        case Criterion::EDC: return "EDC";
    }
    return "?";
}

Criteria criteria(const CandidateModel& m, std::size_t n) { return information_criteria(m.loglik, m.rho, n); }

double criterion_value(const CandidateModel& m, std::size_t n, Criterion c) {
    const Criteria k = criteria(m, n);
    return c == Criterion::AIC ? k.aic : (c == Criterion::BIC ? k.bic : k.edc);
}

bool strictly_better(const CandidateModel& a, const CandidateModel& b, std::size_t n, Criterion c) {
    if (a.failed) return false;
    if (b.failed) return true;
    return criterion_value(a, n, c) < criterion_value(b, n, c);
}

}  // namespace skegtd
