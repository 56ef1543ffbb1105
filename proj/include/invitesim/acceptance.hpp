#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace invitesim {

struct CriterionResult {
    int id = 0;
    std::string name;
    std::string suite;
    bool pass = false;
    nlohmann::json measured = nlohmann::json::object();
    nlohmann::json threshold = nlohmann::json::object();
    /// One-line human summary of the measurement.
    std::string brief;
    /// Optional table rows printed under the summary line.
    std::vector<std::string> details;
    double seconds = 0.0;
};

struct SuiteReport {
    std::string suite;
    std::vector<CriterionResult> criteria;
    double seconds = 0.0;
    [[nodiscard]] bool pass() const noexcept;
};

struct AcceptanceOptions {
    std::uint64_t seed = 20240917;
    std::size_t workers = 1;
};

/// Suite names in criterion order; "all" is accepted by run_acceptance but not listed.
const std::vector<std::string>& acceptance_suites();

/// Runs one suite (or "all"). Unknown names throw ConfigInvalid.
std::vector<SuiteReport> run_acceptance(std::string_view suite, const AcceptanceOptions& options = {});

nlohmann::json to_json(const CriterionResult& result);
nlohmann::json to_json(const std::vector<SuiteReport>& reports);

/// "PASS  [3] fluid-properties: ..." style line.
std::string summary_line(const CriterionResult& result);

}  // namespace invitesim
