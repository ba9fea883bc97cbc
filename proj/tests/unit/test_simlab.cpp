#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "json.hpp"
#include "skegtd/distribution.hpp"
#include "skegtd/em.hpp"
#include "skegtd/errors.hpp"
#include "skegtd/simlab.hpp"

using namespace skegtd;

TEST_CASE("spec parsing") {
    const auto s = parse_experiment_spec(R"(
# recovery run
kind = recovery
r = -0.5
alpha = 4
beta = 2.5
n = 50, 500
replicates = 20
estimators = mle, lme
seed = 42   # trailing comment
threads = 2
)");
    CHECK(s.kind == ExperimentKind::recovery);
    CHECK(s.r == -0.5);
    CHECK(s.sample_sizes == std::vector<std::size_t>{50, 500});
    CHECK(s.estimators.size() == 2);
    CHECK(s.seed == 42);
    CHECK(s.threads == 2);
    CHECK_THROWS_AS(parse_experiment_spec("replicates = 0\n"), DomainError);
    CHECK_THROWS_AS(parse_experiment_spec("colour = red\n"), DomainError);
    CHECK_THROWS_AS(parse_experiment_spec("alpha = x\n"), DomainError);
    CHECK_THROWS_AS(parse_experiment_spec("n = 0\n"), DomainError);
    CHECK_THROWS_AS(parse_experiment_spec("just text\n"), DomainError);
    const auto sel = parse_experiment_spec("kind = selection\ncompetitors = N, ST\ncriteria = AIC\n");
    CHECK(sel.competitors == std::vector<Family>{Family::Normal, Family::ST});
    CHECK(sel.sc_alpha == 18.0);
}

TEST_CASE("summaries") {
    const std::vector<std::string> names{"a", "b"};
    const std::vector<double> truth{2.0, 0.0};
    std::vector<std::optional<std::vector<double>>> est(10, std::vector<double>{2.0, 0.0});
    auto rows = summarize_recovery(10, "x", names, truth, est);
    CHECK(rows[0].rbias == 0.0);
    CHECK(rows[0].mse == 0.0);
    CHECK(std::isnan(rows[1].rbias));
    est[3].reset();
    est[4] = std::vector<double>{3.0, 1.0};
    rows = summarize_recovery(10, "x", names, truth, est);
    CHECK(rows[0].used == 9);
    CHECK(rows[0].excluded == 1);
    CHECK(rows[0].exclusion_rate == doctest::Approx(0.1));
    CHECK(rows[0].mse == doctest::Approx(1.0 / 9.0));
    CHECK(rows[0].rbias == doctest::Approx(0.5 / 9.0));
}

TEST_CASE("single replicate equals a direct fit") {
    ExperimentSpec s;
    s.sample_sizes = {200};
    s.replicates = 1;
    s.seed = 77;
    const auto t = run_recovery(s);
    RngStream rng = replicate_stream(77, 0, 0);
    const auto x = skegtd_sample({s.mu, s.sigma, s.r, s.alpha, s.beta}, 200, rng);
    const auto f = fit_mle(x);
    REQUIRE(t.recovery.size() == 3);
    CHECK(t.recovery[0].mean == f.get("r"));
    CHECK(t.recovery[1].mean == f.get("alpha"));
    CHECK(t.recovery[2].mean == f.get("beta"));
}

TEST_CASE("results do not depend on the thread count") {
    ExperimentSpec s;
    s.sample_sizes = {60, 120};
    s.replicates = 8;
    s.estimators = {Estimator::mle, Estimator::lme, Estimator::tse};
    s.threads = 1;
    const auto a = run_recovery(s).to_csv();
    s.threads = 3;
    CHECK(run_recovery(s).to_csv() == a);
    CHECK(run_recovery(s).to_csv() == a);
}

TEST_CASE("selection run") {
    ExperimentSpec s;
    s.kind = ExperimentKind::selection;
    s.sample_sizes = {100};
    s.replicates = 4;
    s.competitors = {Family::Normal, Family::SkeGTD};
    s.criteria = {Criterion::AIC};
    const auto t = run_experiment(s);
    REQUIRE(t.selection.size() == 2);
    CHECK(t.selection[0].percentage == 100.0);
    // a model never strictly beats itself
    CHECK(t.selection[1].percentage == 0.0);
    const auto j = nlohmann::json::parse(t.to_json());
    CHECK(j["kind"] == "selection");
    CHECK(j["rows"].size() == 2);
    CHECK(t.to_csv().starts_with("n,criterion,competitor,percentage"));
}
