#pragma once

// Experiment configuration, seeded trial execution, JSON-lines records with
// a CSV summary, and bit-exact replay.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "disscalc/besov.hpp"
#include "disscalc/scalar_functions.hpp"

namespace disscalc {

inline const std::vector<std::string>& experiment_names() {
    static const std::vector<std::string> names{"window-check",         "cardinal-check",  "besov-norm",
                                                "identity-check",       "regularization-check",
                                                "lipschitz-sweep",      "p-sweep",         "bound-check"};
    return names;
}

struct ExperimentConfig {
    std::string experiment;
    std::string variant = "first";  ///< identity-check: first | second | ab12 | ba21
    std::uint64_t seed = 1;
    std::vector<int> dims;
    std::vector<double> p;  ///< Schatten exponents; +inf allowed
    std::vector<std::int64_t> truncations;
    int trials = 1;
    std::vector<ExpSum2D> functions;
    SupMode besov_mode;
    std::vector<double> eps;
    double k_emp = 10.0;
    double scale = 1.0;          ///< operator norm of random dissipative matrices
    double perturbation = 0.2;   ///< lipschitz/p-sweep: max convex-combination weight
    double ratio_ceiling = 100.0;
    bool same_pair = false;      ///< identity-check: L2 = L1 and M2 = M1
    bool flip_sign = false;      ///< flip the sign of the cardinal double series
    std::string output = ".";

    /// Canonical form with every default filled in and functions inlined;
    /// the config hash is taken over its compact dump.
    nlohmann::json to_json() const;
};

/// The standard set of three exponential sums with band radius <= 1.
std::vector<ExpSum2D> standard_functions();

/// Fills defaults for `experiment`; throws ConfigInvalid naming the field.
/// Relative function paths resolve against `base_dir`.
ExperimentConfig parse_config(const nlohmann::json& j, const std::filesystem::path& base_dir = ".");
ExperimentConfig default_config(const std::string& experiment);
ExperimentConfig load_config(const std::filesystem::path& path);
void validate(const ExperimentConfig& config);

/// SHA-256 of the canonical config JSON, hex.
std::string config_hash(const ExperimentConfig& config);

std::size_t trial_count(const ExperimentConfig& config);
/// One record, a pure function of (config, index).
nlohmann::json run_trial(const ExperimentConfig& config, std::size_t index);

struct RunResult {
    nlohmann::json header;
    std::vector<nlohmann::json> records;
    /// Rows {experiment, metric, count, max, median}.
    std::vector<nlohmann::json> summary;
    /// Cross-trial assertion failures (e.g. Lipschitz outliers).
    std::vector<std::string> run_failures;
    bool pass = true;
};

/// Runs all trials on `threads` workers; records come back in trial order.
RunResult run(const ExperimentConfig& config, int threads = 1);

/// Writes <dir>/<experiment>.jsonl (header line, then records) and
/// <dir>/<experiment>_summary.csv. Returns the JSON-lines path.
std::filesystem::path write_outputs(const RunResult& result, const ExperimentConfig& config,
                                    const std::filesystem::path& dir);

struct ReplayReport {
    std::size_t records = 0;
    std::size_t divergences = 0;
    std::optional<std::size_t> first_trial;
    std::optional<std::string> first_field;
    bool version_mismatch = false;
    std::string mismatch_detail;

    bool ok() const noexcept { return divergences == 0 && !version_mismatch; }
    nlohmann::json to_json() const;
};

/// Re-executes every record of a JSON-lines file and compares bit-exactly.
ReplayReport replay(const std::filesystem::path& records_path, int threads = 1);

/// The JSON-lines file contents as (header, records).
std::pair<nlohmann::json, std::vector<nlohmann::json>> read_records(const std::filesystem::path& path);

/// Name of the first field (dotted path) where two records differ.
std::optional<std::string> first_divergence(const nlohmann::json& expected, const nlohmann::json& actual);

/// Single-line record for `besov-norm --function`.
nlohmann::json besov_norm_record(const ExpSum2D& f, const SupMode& mode);

}  // namespace disscalc
