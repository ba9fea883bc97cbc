// skegtd command-line front-end.
#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include "skegtd/dataset.hpp"
#include "skegtd/distribution.hpp"
#include "skegtd/em.hpp"
#include "skegtd/errors.hpp"
#include "skegtd/lmoments.hpp"
#include "skegtd/model_select.hpp"
#include "skegtd/parallel.hpp"
#include "skegtd/regression.hpp"
#include "skegtd/report.hpp"
#include "skegtd/simlab.hpp"
#include "skegtd/two_step.hpp"

using namespace skegtd;

namespace {

enum Exit { kOk = 0, kUsage = 2, kData = 3, kNumeric = 4 };

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Globals {
    std::uint64_t seed = 1;
    std::string out;
    std::string format = "csv";
    unsigned threads = 0;
};

struct LawArgs {
    double mu = 0.0, sigma = 1.0, r = 0.0, alpha = 1.0, beta = 2.0;
    void add(CLI::App* c) {
        c->add_option("--mu", mu, "location")->capture_default_str();
        c->add_option("--sigma", sigma, "scale")->capture_default_str();
        c->add_option("--r", r, "skewness in [-1, 1]")->capture_default_str();
        c->add_option("--alpha", alpha, "tail parameter")->capture_default_str();
        c->add_option("--beta", beta, "shape parameter")->capture_default_str();
    }
    SkeGTDParams params() const {
        if (!std::isfinite(mu)) throw UsageError("--mu must be finite");
        if (!(sigma > 0.0) || !std::isfinite(sigma)) throw UsageError("--sigma must be positive");
        if (!(std::fabs(r) <= 1.0)) throw UsageError("--r must lie in [-1, 1]");
        if (!(alpha > 0.0) || !std::isfinite(alpha)) throw UsageError("--alpha must be positive");
        if (!(beta > 0.0) || !std::isfinite(beta)) throw UsageError("--beta must be positive");
        return SkeGTDParams(mu, sigma, r, alpha, beta);
    }
};

void emit(const Globals& g, const std::string& text) {
    if (g.out.empty() || g.out == "-") {
        std::cout << text;
        return;
    }
    std::ofstream f(g.out, std::ios::binary);
    if (!f) throw InsufficientData("cannot write '" + g.out + "'");
    f << text;
    if (!f) throw InsufficientData("write failed for '" + g.out + "'");
}

std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw InsufficientData("cannot open '" + path + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

std::string fit_csv(const FitReport& r) {
    std::ostringstream os;
    os << "parameter,estimate,se\n";
    for (std::size_t i = 0; i < r.names.size(); ++i)
        os << r.names[i] << ',' << format_double(r.estimates[i]) << ','
           << (i < r.standard_errors.size() ? format_double(r.standard_errors[i]) : "") << '\n';
    os << "loglik," << format_double(r.loglik) << ",\n";
    if (!r.flags.empty()) {
        os << "flags,";
        for (std::size_t i = 0; i < r.flags.size(); ++i) os << (i ? ";" : "") << r.flags[i];
        os << ",\n";
    }
    if (std::isfinite(r.loglik)) {
        const Criteria c = information_criteria(r.loglik, static_cast<int>(r.names.size()), r.n);
        os << "AIC," << format_double(c.aic) << ",\nBIC," << format_double(c.bic) << ",\nEDC," << format_double(c.edc)
           << ",\n";
    }
    return os.str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Skewed generalized t distribution toolkit"};
    app.require_subcommand(1);
    Globals g;
    app.add_option("--seed", g.seed, "random seed")->capture_default_str();
    app.add_option("--out", g.out, "output file (default stdout)");
    app.add_option("--format", g.format, "csv or json")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
    app.add_option("--threads", g.threads, "worker threads (0 = all cores)");

    // eval
    auto* c_eval = app.add_subcommand("eval", "pdf, logpdf and cdf at points or on a grid")->fallthrough();
    LawArgs eval_law;
    eval_law.add(c_eval);
    std::vector<double> eval_x;
    std::size_t eval_points = 512;
    c_eval->add_option("--x", eval_x, "evaluation points; default is a grid over mu +- 10 sigma");
    c_eval->add_option("--points", eval_points, "grid size")->capture_default_str();

    // fit
    auto* c_fit = app.add_subcommand("fit", "fit one sample")->fallthrough();
    std::string fit_data, fit_method = "tse";
    std::size_t fit_column = 0, fit_boot = 0;
    double fit_mu = 0.0, fit_sigma = 1.0;
    c_fit->add_option("--data", fit_data, "CSV file")->required();
    c_fit->add_option("--method", fit_method, "mle, lme or tse")->check(CLI::IsMember({"mle", "lme", "tse"}))->capture_default_str();
    c_fit->add_option("--column", fit_column, "value column (0-based)");
    c_fit->add_option("--boot", fit_boot, "bootstrap replicates for SEs and 95% percentile intervals");
    c_fit->add_option("--known-mu", fit_mu, "location used to standardize data for mle and lme")->capture_default_str();
    c_fit->add_option("--known-sigma", fit_sigma, "scale used to standardize data for mle and lme")->capture_default_str();

    // sample
    auto* c_sample = app.add_subcommand("sample", "draw a sample")->fallthrough();
    LawArgs sample_law;
    sample_law.add(c_sample);
    std::size_t sample_n = 0;
    c_sample->add_option("--n", sample_n, "sample size")->required();

    // experiment
    auto* c_exp = app.add_subcommand("experiment", "run a Monte Carlo experiment from a spec file")->fallthrough();
    std::string exp_spec;
    c_exp->add_option("spec", exp_spec, "key = value spec file")->required();

    // compare
    auto* c_cmp = app.add_subcommand("compare", "fit all candidate families and rank them")->fallthrough();
    std::string cmp_data, cmp_fit = "tse_ml";
    std::size_t cmp_column = 0;
    c_cmp->add_option("--data", cmp_data, "CSV file")->required();
    c_cmp->add_option("--column", cmp_column, "value column (0-based)");
    c_cmp->add_option("--skegtd-fit", cmp_fit, "tse or tse_ml")->check(CLI::IsMember({"tse", "tse_ml"}))->capture_default_str();

    // regress
    auto* c_reg = app.add_subcommand("regress", "linear regression with SkeGTD errors")->fallthrough();
    std::string reg_data;
    c_reg->add_option("--data", reg_data, "two-column CSV: x,y")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kUsage;
    }

    std::string echo;
    for (int i = 0; i < argc; ++i) echo += (i ? " " : "") + std::string(argv[i]);
    const auto t0 = std::chrono::steady_clock::now();
    auto wall = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(); };
    const bool json = g.format == "json";

    try {
        if (*c_eval) {
            const SkeGTDParams p = eval_law.params();
            std::vector<double> xs = eval_x;
            if (xs.empty()) {
                if (eval_points < 2) throw UsageError("--points must be at least 2");
                for (std::size_t i = 0; i < eval_points; ++i)
                    xs.push_back(p.mu - 10.0 * p.sigma + 20.0 * p.sigma * static_cast<double>(i) / static_cast<double>(eval_points - 1));
            }
            if (json) {
                nlohmann::json rows = nlohmann::json::array();
                for (double x : xs) {
                    const double lp = skegtd_logpdf(p, x);
                    rows.push_back({{"x", x}, {"pdf", std::exp(lp)}, {"logpdf", std::isfinite(lp) ? nlohmann::json(lp) : nlohmann::json(nullptr)},
                                    {"cdf", skegtd_cdf(p, x)}});
                }
                emit(g, make_report(echo, "", g.seed, wall(), {{"rows", rows}}).dump(2) + "\n");
            } else {
                std::string s = "x,pdf,logpdf,cdf\n";
                for (double x : xs) {
                    const double lp = skegtd_logpdf(p, x);
                    s += format_double(x) + ',' + format_double(std::exp(lp)) + ',' + format_double(lp) + ',' +
                         format_double(skegtd_cdf(p, x)) + '\n';
                }
                emit(g, s);
            }
        } else if (*c_fit) {
            CsvOptions co;
            co.value_column = fit_column;
            const std::string raw = read_file(fit_data);
            const Dataset d = parse_csv(raw, co, fit_data);
            if (!(fit_sigma > 0.0)) throw UsageError("--known-sigma must be positive");
            auto run = [&](std::span<const double> x) -> FitReport {
                if (fit_method == "tse") return fit_tse(x);
                std::vector<double> z(x.size());
                for (std::size_t i = 0; i < x.size(); ++i) z[i] = (x[i] - fit_mu) / fit_sigma;
                return fit_method == "mle" ? fit_mle(z) : fit_lme(z);
            };
            FitReport rep = run(d.values);
            std::optional<BootstrapResult> boot;
            if (fit_boot > 0) {
                boot = bootstrap(d.values, fit_boot, g.seed, g.threads, [&](std::span<const double> x) { return run(x).estimates; });
                rep.standard_errors = boot->standard_errors;
            }
            if (json) {
                nlohmann::json res{{"fit", to_json(rep)},
                                   {"data", {{"source", d.source}, {"n", d.values.size()}, {"rows_skipped", d.rows_skipped}, {"skip_reasons", d.skip_reasons}}}};
                if (boot) {
                    nlohmann::json ci = nlohmann::json::object();
                    for (std::size_t i = 0; i < rep.names.size(); ++i) ci[rep.names[i]] = {boot->lower[i], boot->upper[i]};
                    res["bootstrap"] = {{"replicates", fit_boot}, {"used", boot->used}, {"failed", boot->failed}, {"intervals", ci}};
                }
                emit(g, make_report(echo, digest_hex(raw), g.seed, wall(), res).dump(2) + "\n");
            } else {
                std::string s = fit_csv(rep);
                if (boot) {
                    s += "parameter,ci_lower,ci_upper\n";
                    for (std::size_t i = 0; i < rep.names.size(); ++i)
                        s += rep.names[i] + ',' + format_double(boot->lower[i]) + ',' + format_double(boot->upper[i]) + '\n';
                }
                emit(g, s);
            }
            if (d.rows_skipped) std::cerr << d.rows_skipped << " row(s) skipped\n";
        } else if (*c_sample) {
            const SkeGTDParams p = sample_law.params();
            RngStream rng(g.seed);
            emit(g, format_column(skegtd_sample(p, sample_n, rng)));
        } else if (*c_exp) {
            ExperimentSpec spec = load_experiment_spec(exp_spec);
            if (g.threads) spec.threads = g.threads;
            const ExperimentTable t = run_experiment(spec);
            if (json)
                emit(g, make_report(echo, digest_hex(read_file(exp_spec)), spec.seed, wall(), nlohmann::json::parse(t.to_json())).dump(2) + "\n");
            else
                emit(g, t.to_csv());
        } else if (*c_cmp) {
            CsvOptions co;
            co.value_column = cmp_column;
            const std::string raw = read_file(cmp_data);
            const Dataset d = parse_csv(raw, co, cmp_data);
            CandidateOptions opt;
            opt.skegtd = cmp_fit == "tse" ? SkegtdFit::tse : SkegtdFit::tse_ml;
            const std::vector<Family> fams{Family::Normal, Family::StudentT, Family::SN, Family::ST, Family::SC, Family::SkeGTD};
            std::vector<CandidateModel> ms(fams.size());
            parallel_for(fams.size(), g.threads, [&](std::size_t i) { ms[i] = fit_candidate(fams[i], d.values, opt); });
            const std::size_t n = d.values.size();
            auto rank = [&](std::size_t i, Criterion c) {
                if (ms[i].failed) return 0;
                int k = 1;
                for (std::size_t j = 0; j < ms.size(); ++j)
                    if (j != i && strictly_better(ms[j], ms[i], n, c)) ++k;
                return k;
            };
            if (json) {
                nlohmann::json rows = nlohmann::json::array();
                for (std::size_t i = 0; i < ms.size(); ++i) {
                    auto j = to_json(ms[i], n);
                    j["rank"] = {{"AIC", rank(i, Criterion::AIC)}, {"BIC", rank(i, Criterion::BIC)}, {"EDC", rank(i, Criterion::EDC)}};
                    rows.push_back(j);
                }
                emit(g, make_report(echo, digest_hex(raw), g.seed, wall(), {{"n", n}, {"models", rows}}).dump(2) + "\n");
            } else {
                std::string s = "family,rho,loglik,AIC,BIC,EDC,rank_AIC,rank_BIC,rank_EDC,failed\n";
                for (std::size_t i = 0; i < ms.size(); ++i) {
                    const Criteria c = criteria(ms[i], n);
                    s += std::string(family_name(ms[i].family)) + ',' + std::to_string(ms[i].rho) + ',' + format_double(ms[i].loglik) + ',' +
                         format_double(c.aic) + ',' + format_double(c.bic) + ',' + format_double(c.edc) + ',' +
                         std::to_string(rank(i, Criterion::AIC)) + ',' + std::to_string(rank(i, Criterion::BIC)) + ',' +
                         std::to_string(rank(i, Criterion::EDC)) + ',' + (ms[i].failed ? "1" : "0") + '\n';
                }
                emit(g, s);
            }
        } else if (*c_reg) {
            CsvOptions co;
            co.with_covariate = true;
            const std::string raw = read_file(reg_data);
            const Dataset d = parse_csv(raw, co, reg_data);
            const RegressionFit f = fit_regression(*d.covariate, d.values);
            const ResidualReport rr = residual_report(f, *d.covariate, d.values);
            if (json) {
                nlohmann::json res{{"fit", to_json(f)}, {"residuals", rr.residuals}, {"density_grid", {{"x", rr.grid}, {"pdf", rr.density}}}};
                emit(g, make_report(echo, digest_hex(raw), g.seed, wall(), res).dump(2) + "\n");
            } else {
                std::string s = "parameter,estimate,se\n";
                const auto e = f.estimates();
                for (std::size_t i = 0; i < 6; ++i)
                    s += std::string(RegressionFit::names[i]) + ',' + format_double(e[i]) + ',' + format_double(f.standard_errors[i]) + '\n';
                s += "loglik," + format_double(f.loglik) + ",\n";
                s += "adjusted_intercept," + (f.adjusted_intercept ? format_double(*f.adjusted_intercept) : std::string("nan")) + ",\n";
                s += "\nx,pdf\n";
                for (std::size_t i = 0; i < rr.grid.size(); ++i) s += format_double(rr.grid[i]) + ',' + format_double(rr.density[i]) + '\n';
                emit(g, s);
            }
        }
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kUsage;
    } catch (const MomentNotFinite& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kNumeric;
    } catch (const DomainError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kUsage;
    } catch (const InsufficientData& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kData;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kData;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kNumeric;
    }
    return kOk;
}
