#include "skegtd/simlab.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include "json.hpp"
#include <sstream>

#include "skegtd/dataset.hpp"
#include "skegtd/distribution.hpp"
#include "skegtd/em.hpp"
#include "skegtd/errors.hpp"
#include "skegtd/lmoments.hpp"
#include "skegtd/parallel.hpp"
#include "skegtd/two_step.hpp"

namespace skegtd {
namespace {

std::string trim(std::string_view s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return std::string(s.substr(a, b - a));
}

std::vector<std::string> split_list(std::string_view s) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= s.size()) {
        const std::size_t comma = s.find(',', start);
        const std::string item = trim(s.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
        if (!item.empty()) out.push_back(item);
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

double to_double(const std::string& key, const std::string& v) {
    std::size_t pos = 0;
    double d = 0.0;
    try {
        d = std::stod(v, &pos);
    } catch (const std::exception&) {
        pos = 0;
    }
    if (pos != v.size() || !std::isfinite(d)) throw DomainError("experiment spec: bad number for '" + key + "': " + v);
    return d;
}

std::uint64_t to_uint(const std::string& key, const std::string& v) {
    std::size_t pos = 0;
    unsigned long long u = 0;
    try {
        u = std::stoull(v, &pos);
    } catch (const std::exception&) {
        pos = 0;
    }
    if (pos != v.size() || v.front() == '-') throw DomainError("experiment spec: bad count for '" + key + "': " + v);
    return u;
}

Criterion parse_criterion(const std::string& s) {
    std::string l;
    for (char c : s) l += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (l == "aic") return Criterion::AIC;
    if (l == "bic") return Criterion::BIC;
    if (l == "edc") return Criterion::EDC;
    throw DomainError("experiment spec: unknown criterion '" + s + "'");
}

std::string fmt(double v) { return std::isnan(v) ? "nan" : format_double(v); }

nlohmann::json num(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

}  // namespace

std::string_view estimator_name(Estimator e) {
    switch (e) {
        case Estimator::mle: return "mle";
        case Estimator::lme: return "lme";
        case Estimator::tse: return "tse";
    }
    return "?";
}

Estimator parse_estimator(std::string_view s) {
    std::string l;
    for (char c : s) l += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (l == "mle") return Estimator::mle;
    if (l == "lme") return Estimator::lme;
    if (l == "tse") return Estimator::tse;
    throw DomainError("unknown estimator '" + std::string(s) + "'");
}

void ExperimentSpec::validate() const {
    if (replicates < 1) throw DomainError("experiment spec: replicates must be >= 1");
    if (sample_sizes.empty()) throw DomainError("experiment spec: no sample sizes");
    for (auto n : sample_sizes)
        if (n == 0) throw DomainError("experiment spec: sample sizes must be positive");
    if (kind == ExperimentKind::recovery) {
        (void)SkeGTDParams(mu, sigma, r, alpha, beta);
        if (estimators.empty()) throw DomainError("experiment spec: no estimators");
    } else {
        if (!(sc_omega > 0.0)) throw DomainError("experiment spec: omega must be positive");
        if (competitors.empty() || criteria.empty()) throw DomainError("experiment spec: no competitors or criteria");
    }
}

ExperimentSpec parse_experiment_spec(std::string_view text) {
    ExperimentSpec s;
    std::istringstream in{std::string(text)};
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const std::string t = trim(line);
        if (t.empty()) continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos) throw DomainError("experiment spec line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(std::string_view(t).substr(0, eq));
        const std::string val = trim(std::string_view(t).substr(eq + 1));
        if (key == "kind") {
            if (val == "recovery") s.kind = ExperimentKind::recovery;
            else if (val == "selection") s.kind = ExperimentKind::selection;
            else throw DomainError("experiment spec: kind must be recovery or selection");
        } else if (key == "mu") s.mu = to_double(key, val);
        else if (key == "sigma") s.sigma = to_double(key, val);
        else if (key == "r") s.r = to_double(key, val);
        else if (key == "alpha") s.alpha = to_double(key, val);
        else if (key == "beta") s.beta = to_double(key, val);
        else if (key == "xi") s.sc_xi = to_double(key, val);
        else if (key == "omega") s.sc_omega = to_double(key, val);
        else if (key == "sc_alpha") s.sc_alpha = to_double(key, val);
        else if (key == "n") {
            s.sample_sizes.clear();
            for (const auto& v : split_list(val)) s.sample_sizes.push_back(to_uint(key, v));
        } else if (key == "replicates") s.replicates = to_uint(key, val);
        else if (key == "estimators") {
            s.estimators.clear();
            for (const auto& v : split_list(val)) s.estimators.push_back(parse_estimator(v));
        } else if (key == "competitors") {
            s.competitors.clear();
            for (const auto& v : split_list(val)) s.competitors.push_back(parse_family(v));
        } else if (key == "criteria") {
            s.criteria.clear();
            for (const auto& v : split_list(val)) s.criteria.push_back(parse_criterion(v));
        } else if (key == "skegtd_fit") {
            if (val == "tse") s.skegtd_fit = SkegtdFit::tse;
            else if (val == "tse_ml") s.skegtd_fit = SkegtdFit::tse_ml;
            else throw DomainError("experiment spec: skegtd_fit must be tse or tse_ml");
        } else if (key == "seed") s.seed = to_uint(key, val);
        else if (key == "threads") s.threads = static_cast<unsigned>(to_uint(key, val));
        else throw DomainError("experiment spec: unknown key '" + key + "'");
    }
    s.validate();
    return s;
}

ExperimentSpec load_experiment_spec(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw DomainError("cannot open experiment spec '" + path + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_experiment_spec(ss.str());
}

RngStream replicate_stream(std::uint64_t seed, std::size_t slot, std::size_t rep) {
    return RngStream(seed).split(slot).split(rep);
}

std::vector<RecoveryRow> summarize_recovery(std::size_t n, std::string_view estimator,
                                            std::span<const std::string> names, std::span<const double> truth,
                                            std::span<const std::optional<std::vector<double>>> estimates) {
    std::vector<RecoveryRow> rows;
    for (std::size_t j = 0; j < names.size(); ++j) {
        RecoveryRow row;
        row.n = n;
        row.estimator = std::string(estimator);
        row.parameter = names[j];
        row.truth = truth[j];
        double s = 0.0, sa = 0.0, sq = 0.0;
        for (const auto& e : estimates) {
            if (!e) {
                ++row.excluded;
                continue;
            }
            const double d = (*e)[j] - truth[j];
            s += (*e)[j];
            sq += d * d;
            if (truth[j] != 0.0) sa += std::fabs(d / truth[j]);
            ++row.used;
        }
        const double u = static_cast<double>(row.used);
        const double nan = std::numeric_limits<double>::quiet_NaN();
        row.mean = row.used ? s / u : nan;
        row.mse = row.used ? sq / u : nan;
        row.rbias = row.used && truth[j] != 0.0 ? sa / u : nan;
        row.exclusion_rate = estimates.empty() ? 0.0 : static_cast<double>(row.excluded) / static_cast<double>(estimates.size());
        rows.push_back(row);
    }
    return rows;
}

ExperimentTable run_recovery(const ExperimentSpec& spec) {
    spec.validate();
    ExperimentTable table;
    table.kind = ExperimentKind::recovery;
    const SkeGTDParams truth(spec.mu, spec.sigma, spec.r, spec.alpha, spec.beta);
    const std::size_t ne = spec.estimators.size();
    for (std::size_t slot = 0; slot < spec.sample_sizes.size(); ++slot) {
        const std::size_t n = spec.sample_sizes[slot];
        // est[e][rep]
        std::vector<std::vector<std::optional<std::vector<double>>>> est(ne,
                                                                         std::vector<std::optional<std::vector<double>>>(spec.replicates));
        parallel_for(spec.replicates, spec.threads, [&](std::size_t rep) {
            RngStream rng = replicate_stream(spec.seed, slot, rep);
            const std::vector<double> x = skegtd_sample(truth, n, rng);
            std::vector<double> z(n);
            for (std::size_t i = 0; i < n; ++i) z[i] = (x[i] - spec.mu) / spec.sigma;
            for (std::size_t e = 0; e < ne; ++e) {
                try {
                    switch (spec.estimators[e]) {
                        case Estimator::mle: est[e][rep] = fit_mle(z).estimates; break;
                        case Estimator::lme: est[e][rep] = fit_lme(z).estimates; break;
                        case Estimator::tse: est[e][rep] = fit_tse(x).estimates; break;
                    }
                } catch (const std::exception&) {
                    est[e][rep].reset();
                }
            }
        });
        for (std::size_t e = 0; e < ne; ++e) {
            std::vector<std::string> names;
            std::vector<double> tv;
            if (spec.estimators[e] == Estimator::tse) {
                names = {"mu", "sigma", "r", "alpha", "beta"};
                tv = {spec.mu, spec.sigma, spec.r, spec.alpha, spec.beta};
            } else {
                names = {"r", "alpha", "beta"};
                tv = {spec.r, spec.alpha, spec.beta};
            }
            auto rows = summarize_recovery(n, estimator_name(spec.estimators[e]), names, tv, est[e]);
            table.recovery.insert(table.recovery.end(), rows.begin(), rows.end());
        }
    }
    return table;
}

ExperimentTable run_selection(const ExperimentSpec& spec) {
    spec.validate();
    ExperimentTable table;
    table.kind = ExperimentKind::selection;
    CandidateOptions copt;
    copt.skegtd = spec.skegtd_fit;
    const std::size_t nc = spec.competitors.size();
    for (std::size_t slot = 0; slot < spec.sample_sizes.size(); ++slot) {
        const std::size_t n = spec.sample_sizes[slot];
        struct Rep {
            CandidateModel skegtd;
            std::vector<CandidateModel> others;
        };
        std::vector<Rep> reps(spec.replicates);
        parallel_for(spec.replicates, spec.threads, [&](std::size_t rep) {
            RngStream rng = replicate_stream(spec.seed, slot, rep);
            const std::vector<double> x = sc_sample(spec.sc_xi, spec.sc_omega, spec.sc_alpha, n, rng);
            auto fit = [&](Family f) {
                try {
                    return fit_candidate(f, x, copt);
                } catch (const std::exception&) {
                    CandidateModel m;
                    m.family = f;
                    m.rho = family_rho(f);
                    m.failed = true;
                    return m;
                }
            };
            reps[rep].skegtd = fit(Family::SkeGTD);
            for (std::size_t c = 0; c < nc; ++c)
                reps[rep].others.push_back(spec.competitors[c] == Family::SkeGTD ? reps[rep].skegtd : fit(spec.competitors[c]));
        });
        for (Criterion crit : spec.criteria) {
            for (std::size_t c = 0; c < nc; ++c) {
                SelectionRow row;
                row.n = n;
                row.criterion = std::string(criterion_name(crit));
                row.competitor = std::string(family_name(spec.competitors[c]));
                row.replicates = spec.replicates;
                std::size_t wins = 0;
                for (const auto& r : reps) {
                    row.skegtd_failures += r.skegtd.failed;
                    row.competitor_failures += r.others[c].failed;
                    wins += strictly_better(r.skegtd, r.others[c], n, crit);
                }
                row.percentage = 100.0 * static_cast<double>(wins) / static_cast<double>(spec.replicates);
                table.selection.push_back(row);
            }
        }
    }
    return table;
}

ExperimentTable run_experiment(const ExperimentSpec& spec) {
    return spec.kind == ExperimentKind::recovery ? run_recovery(spec) : run_selection(spec);
}

std::string ExperimentTable::to_csv() const {
    std::ostringstream os;
    if (kind == ExperimentKind::recovery) {
        os << "n,estimator,parameter,truth,mean,rbias,mse,used,excluded,exclusion_rate\n";
        for (const auto& r : recovery)
            os << r.n << ',' << r.estimator << ',' << r.parameter << ',' << fmt(r.truth) << ',' << fmt(r.mean) << ','
               << fmt(r.rbias) << ',' << fmt(r.mse) << ',' << r.used << ',' << r.excluded << ',' << fmt(r.exclusion_rate)
               << '\n';
    } else {
        os << "n,criterion,competitor,percentage,replicates,skegtd_failures,competitor_failures\n";
        for (const auto& r : selection)
            os << r.n << ',' << r.criterion << ',' << r.competitor << ',' << fmt(r.percentage) << ',' << r.replicates << ','
               << r.skegtd_failures << ',' << r.competitor_failures << '\n';
    }
    return os.str();
}

std::string ExperimentTable::to_json() const {
    nlohmann::json rows = nlohmann::json::array();
    if (kind == ExperimentKind::recovery) {
        for (const auto& r : recovery)
            rows.push_back({{"n", r.n}, {"estimator", r.estimator}, {"parameter", r.parameter}, {"truth", num(r.truth)},
                            {"mean", num(r.mean)}, {"rbias", num(r.rbias)}, {"mse", num(r.mse)}, {"used", r.used},
                            {"excluded", r.excluded}, {"exclusion_rate", num(r.exclusion_rate)}});
    } else {
        for (const auto& r : selection)
            rows.push_back({{"n", r.n}, {"criterion", r.criterion}, {"competitor", r.competitor},
                            {"percentage", num(r.percentage)}, {"replicates", r.replicates},
                            {"skegtd_failures", r.skegtd_failures}, {"competitor_failures", r.competitor_failures}});
    }
    nlohmann::json j{{"kind", kind == ExperimentKind::recovery ? "recovery" : "selection"}, {"rows", rows}};
    return j.dump(2);
}

}  // namespace skegtd
