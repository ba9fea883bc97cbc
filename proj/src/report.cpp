#include "skegtd/report.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "skegtd/parallel.hpp"
#include "skegtd/rng.hpp"

namespace skegtd {
namespace {

nlohmann::json num(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

double quantile_sorted(const std::vector<double>& v, double p) {
    // type-7 interpolation
    const double h = (static_cast<double>(v.size()) - 1.0) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

}  // namespace

nlohmann::json to_json(const FitReport& r) {
    nlohmann::json est = nlohmann::json::object();
    nlohmann::json se = nlohmann::json::object();
    for (std::size_t i = 0; i < r.names.size(); ++i) {
        est[r.names[i]] = num(r.estimates[i]);
        if (i < r.standard_errors.size()) se[r.names[i]] = num(r.standard_errors[i]);
    }
    nlohmann::json diag = nlohmann::json::object();
    for (const auto& [k, v] : r.diagnostics) diag[k] = num(v);
    nlohmann::json j{{"method", r.method},     {"estimates", est}, {"standard_errors", se},
                     {"loglik", num(r.loglik)}, {"n", r.n},         {"converged", r.converged},
                     {"iterations", r.iterations}, {"flags", r.flags}, {"diagnostics", diag}};
    if (std::isfinite(r.loglik) && r.n > 0) {
        const Criteria c = information_criteria(r.loglik, static_cast<int>(r.names.size()), r.n);
        j["criteria"] = {{"rho", r.names.size()}, {"AIC", c.aic}, {"BIC", c.bic}, {"EDC", c.edc}};
    }
    return j;
}

nlohmann::json to_json(const CandidateModel& m, std::size_t n) {
    nlohmann::json p = nlohmann::json::object();
    for (std::size_t i = 0; i < m.param_names.size() && i < m.params.size(); ++i) p[m.param_names[i]] = num(m.params[i]);
    nlohmann::json j{{"family", std::string(family_name(m.family))}, {"rho", m.rho}, {"failed", m.failed},
                     {"params", p}, {"flags", m.flags}};
    if (!m.failed) {
        const Criteria c = criteria(m, n);
        j["loglik"] = num(m.loglik);
        j["AIC"] = num(c.aic);
        j["BIC"] = num(c.bic);
        j["EDC"] = num(c.edc);
    }
    return j;
}

nlohmann::json to_json(const RegressionFit& f) {
    nlohmann::json est = nlohmann::json::object();
    nlohmann::json se = nlohmann::json::object();
    const auto e = f.estimates();
    for (std::size_t i = 0; i < 6; ++i) {
        est[RegressionFit::names[i]] = num(e[i]);
        se[RegressionFit::names[i]] = num(f.standard_errors[i]);
    }
    nlohmann::json j{{"estimates", est}, {"standard_errors", se}, {"loglik", num(f.loglik)}, {"n", f.n},
                     {"converged", f.converged}, {"flags", f.flags}};
    j["adjusted_intercept"] = f.adjusted_intercept ? num(*f.adjusted_intercept) : nlohmann::json(nullptr);
    const Criteria c = information_criteria(f.loglik, 6, f.n);
    j["criteria"] = {{"rho", 6}, {"AIC", c.aic}, {"BIC", c.bic}, {"EDC", c.edc}};
    return j;
}

nlohmann::json make_report(const std::string& command_line, const std::string& input_digest, std::uint64_t seed,
                           double wall_seconds, nlohmann::json result) {
    return {{"schema", kReportSchema}, {"tool_version", kToolVersion}, {"command", command_line},
            {"input_digest", input_digest}, {"seed", seed}, {"wall_seconds", wall_seconds}, {"result", std::move(result)}};
}

BootstrapResult bootstrap(std::span<const double> data, std::size_t replicates, std::uint64_t seed, unsigned threads,
                          const std::function<std::vector<double>(std::span<const double>)>& estimator) {
    std::vector<std::optional<std::vector<double>>> est(replicates);
    const RngStream root(seed);
    parallel_for(replicates, threads, [&](std::size_t b) {
        RngStream rng = root.split(b);
        std::vector<double> x(data.size());
        for (auto& v : x) v = data[rng.uniform_index(data.size())];
        try {
            est[b] = estimator(x);
        } catch (const std::exception&) {
        }
    });
    BootstrapResult out;
    std::size_t k = 0;
    for (const auto& e : est) {
        if (e) {
            k = e->size();
            ++out.used;
        } else {
            ++out.failed;
        }
    }
    out.standard_errors.assign(k, std::nan(""));
    out.lower.assign(k, std::nan(""));
    out.upper.assign(k, std::nan(""));
    if (out.used < 2) return out;
    for (std::size_t j = 0; j < k; ++j) {
        std::vector<double> col;
        for (const auto& e : est)
            if (e) col.push_back((*e)[j]);
        double m = 0.0;
        for (double v : col) m += v;
        m /= static_cast<double>(col.size());
        double ss = 0.0;
        for (double v : col) ss += (v - m) * (v - m);
        out.standard_errors[j] = std::sqrt(ss / static_cast<double>(col.size() - 1));
        std::sort(col.begin(), col.end());
        out.lower[j] = quantile_sorted(col, 0.025);
        out.upper[j] = quantile_sorted(col, 0.975);
    }
    return out;
}

}  // namespace skegtd
