#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "edgelab/svg.hpp"

namespace edgelab::cli {

/// Bad configuration; the CLI exits with status 2.
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& what, int line = 0, std::string key = {})
        : std::runtime_error(what), line_(line), key_(std::move(key)) {}
    int line() const { return line_; }
    const std::string& key() const { return key_; }

private:
    int line_;
    std::string key_;
};

struct ExperimentConfig {
    std::string experiment;
    /// Truncation order or t-grid size; its meaning depends on the experiment.
    int N = 0;
    double R = 8.0;
    double R0 = 4.0;
    int l_min = 1;
    int l_max = 32;
    double p = 0.5;
    double eps0 = 0.1;
    double theta = 1.3;
    double tol = 1e-8;
    double s_star = 0.37;
    int samples = 0;
    std::uint64_t seed = 1;
    std::string out = "out";
    bool assert_checks = true;

    nlohmann::ordered_json to_json() const;
};

const std::vector<std::string>& commands();
const std::vector<std::string>& config_keys();

/// Defaults for one experiment; throws ConfigError for an unknown name.
ExperimentConfig default_config(const std::string& experiment);

/// Flat key=value text: '#' starts a comment, blank lines are ignored. `experiment` may be empty when
/// the text names it. Unknown keys are rejected with the closest valid keys.
ExperimentConfig parse_config(const std::string& text, const std::string& experiment = {});
ExperimentConfig validate_config(const std::filesystem::path& path, const std::string& experiment = {});
/// Range and consistency checks; throws ConfigError naming the key.
void validate(const ExperimentConfig& cfg);

struct Check {
    std::string name;
    bool pass = false;
    double value = 0.0;
    double target = 0.0;
};

struct ExperimentResult {
    std::string experiment;
    std::string anchor;
    nlohmann::ordered_json metrics = nlohmann::ordered_json::object();
    std::vector<Check> checks;
    std::string csv;
    std::optional<svg::Plot> plot;

    bool pass() const;
    /// Names of the failed checks.
    std::vector<std::string> failures() const;
    void check(const std::string& name, bool ok, double value, double target);
    nlohmann::ordered_json summary(const ExperimentConfig& cfg) const;
};

ExperimentResult run_experiment(const ExperimentConfig& cfg);

/// results.csv, summary.json and plot.svg (when present) under `dir`, each written atomically.
void write_artifacts(const ExperimentResult& result, const ExperimentConfig& cfg, const std::filesystem::path& dir);

/// Full command line: edgelab <command> [--config PATH] [--out DIR] [--seed INT] [--assert|--no-assert].
/// Returns 0 when every check passes (or --no-assert), 1 on failed checks, 2 on configuration errors.
int run(int argc, char** argv);

}  // namespace edgelab::cli
