#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "skegtd/fit_report.hpp"
#include "skegtd/model_select.hpp"
#include "skegtd/regression.hpp"

namespace skegtd {

inline constexpr const char* kToolVersion = "0.3.0";
inline constexpr const char* kReportSchema = "skegtd.report/1";

nlohmann::json to_json(const FitReport& r);
nlohmann::json to_json(const CandidateModel& m, std::size_t n);
nlohmann::json to_json(const RegressionFit& f);

/// Top-level report: schema, tool version, command echo, input digest, seed,
/// wall time and the command-specific payload under "result".
nlohmann::json make_report(const std::string& command_line, const std::string& input_digest, std::uint64_t seed,
                           double wall_seconds, nlohmann::json result);

struct BootstrapResult {
    std::vector<double> standard_errors;
    std::vector<double> lower;  ///< 2.5% percentile
    std::vector<double> upper;  ///< 97.5% percentile
    std::size_t used = 0;
    std::size_t failed = 0;
};

/// Nonparametric bootstrap over resampled data. Replicate b draws from
/// RngStream(seed).split(b), so results do not depend on the thread count.
BootstrapResult bootstrap(std::span<const double> data, std::size_t replicates, std::uint64_t seed, unsigned threads,
                          const std::function<std::vector<double>(std::span<const double>)>& estimator);

}  // namespace skegtd
