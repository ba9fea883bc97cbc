#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "skegtd/model_select.hpp"

namespace skegtd {

enum class ExperimentKind { recovery, selection };
enum class Estimator { mle, lme, tse };

std::string_view estimator_name(Estimator e);
Estimator parse_estimator(std::string_view s);

struct ExperimentSpec {
    ExperimentKind kind = ExperimentKind::recovery;
    // recovery truth; MLE and LME fit the standardized law (mu, sigma known)
    double mu = 0.0;
    double sigma = 1.0;
    double r = 0.7;
    double alpha = 3.0;
    double beta = 2.5;
    // selection truth (skew-Cauchy)
    double sc_xi = -1.8;
    double sc_omega = 0.8;
    double sc_alpha = 18.0;
    std::vector<std::size_t> sample_sizes{50, 100, 200, 500};
    std::size_t replicates = 500;
    std::vector<Estimator> estimators{Estimator::mle};
    std::vector<Family> competitors{Family::Normal, Family::StudentT, Family::SN, Family::ST};
    std::vector<Criterion> criteria{Criterion::AIC, Criterion::BIC, Criterion::EDC};
    SkegtdFit skegtd_fit = SkegtdFit::tse_ml;
    std::uint64_t seed = 20240101;
    unsigned threads = 0;  ///< 0 = all cores; never changes the results

    void validate() const;
};

/// Parses `key = value` lines; '#' starts a comment. Lists are comma separated.
/// Keys: kind, mu, sigma, r, alpha, beta, xi, omega, sc_alpha, n, replicates,
/// estimators, competitors, criteria, skegtd_fit, seed, threads.
ExperimentSpec parse_experiment_spec(std::string_view text);
ExperimentSpec load_experiment_spec(const std::string& path);

struct RecoveryRow {
    std::size_t n = 0;
    std::string estimator;
    std::string parameter;
    double truth = 0.0;
    double mean = 0.0;
    double rbias = 0.0;  ///< mean |(est - truth)/truth|; NaN when truth is 0
    double mse = 0.0;
    std::size_t used = 0;
    std::size_t excluded = 0;
    double exclusion_rate = 0.0;
};

struct SelectionRow {
    std::size_t n = 0;
    std::string criterion;
    std::string competitor;
    double percentage = 0.0;  ///< share of replicates where SkeGTD is strictly better
    std::size_t replicates = 0;
    std::size_t skegtd_failures = 0;
    std::size_t competitor_failures = 0;
};

struct ExperimentTable {
    ExperimentKind kind = ExperimentKind::recovery;
    std::vector<RecoveryRow> recovery;
    std::vector<SelectionRow> selection;

    std::string to_csv() const;
    std::string to_json() const;  ///< JSON text of the table rows
};

/// Aggregates per-replicate estimates (empty optional = failed fit).
std::vector<RecoveryRow> summarize_recovery(std::size_t n, std::string_view estimator,
                                            std::span<const std::string> names, std::span<const double> truth,
                                            std::span<const std::optional<std::vector<double>>> estimates);

ExperimentTable run_recovery(const ExperimentSpec& spec);
ExperimentTable run_selection(const ExperimentSpec& spec);
ExperimentTable run_experiment(const ExperimentSpec& spec);

/// Stream for replicate `rep` of sample-size slot `slot`; shared by all
/// estimators so they see the same sample.
RngStream replicate_stream(std::uint64_t seed, std::size_t slot, std::size_t rep);

}  // namespace skegtd
