#include "edgelab/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <iostream>
#include <map>
#include <sstream>

#include "edgelab/io.hpp"

namespace edgelab::cli {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return {};
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::size_t edit_distance(const std::string& a, const std::string& b) {
    std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j)
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

std::string join(const std::vector<std::string>& v) {
    std::string out;
    for (const auto& s : v) out += (out.empty() ? "" : ", ") + s;
    return out;
}

std::vector<std::string> suggestions(const std::string& key, const std::vector<std::string>& valid) {
    std::vector<std::string> close;
    for (const auto& k : valid)
        if (edit_distance(key, k) <= 2 || (!key.empty() && k.rfind(key, 0) == 0)) close.push_back(k);
    return close.empty() ? valid : close;
}

std::string where(int line) { return line > 0 ? "line " + std::to_string(line) + ": " : ""; }

template <class T>
T parse_integer(const std::string& key, const std::string& v, int line) {
    T out{};
    const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc() || res.ptr != v.data() + v.size())
        throw ConfigError(where(line) + key + ": expected an integer, got '" + v + "'", line, key);
    return out;
}

double parse_real(const std::string& key, const std::string& v, int line) {
    double out = 0.0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc() || res.ptr != v.data() + v.size() || !std::isfinite(out))
        throw ConfigError(where(line) + key + ": expected a finite number, got '" + v + "'", line, key);
    return out;
}

bool parse_bool(const std::string& key, const std::string& v, int line) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError(where(line) + key + ": expected true or false, got '" + v + "'", line, key);
}

void apply(ExperimentConfig& cfg, const std::string& key, const std::string& v, int line) {
    if (key == "N") cfg.N = parse_integer<int>(key, v, line);
    else if (key == "R") cfg.R = parse_real(key, v, line);
    else if (key == "R0") cfg.R0 = parse_real(key, v, line);
    else if (key == "l_min") cfg.l_min = parse_integer<int>(key, v, line);
    else if (key == "l_max") cfg.l_max = parse_integer<int>(key, v, line);
    else if (key == "p") cfg.p = parse_real(key, v, line);
    else if (key == "eps0") cfg.eps0 = parse_real(key, v, line);
    else if (key == "theta") cfg.theta = parse_real(key, v, line);
    else if (key == "tol") cfg.tol = parse_real(key, v, line);
    else if (key == "s_star") cfg.s_star = parse_real(key, v, line);
    else if (key == "samples") cfg.samples = parse_integer<int>(key, v, line);
    else if (key == "seed") cfg.seed = parse_integer<std::uint64_t>(key, v, line);
    else if (key == "out") cfg.out = v;
    else if (key == "assert") cfg.assert_checks = parse_bool(key, v, line);
}

void require(bool ok, const std::string& key, const std::string& what) {
    if (!ok) throw ConfigError(key + ": " + what, 0, key);
}

}  // namespace

nlohmann::ordered_json ExperimentConfig::to_json() const {
    nlohmann::ordered_json j;
    j["experiment"] = experiment;
    j["N"] = N;
    j["R"] = R;
    j["R0"] = R0;
    j["l_min"] = l_min;
    j["l_max"] = l_max;
    j["p"] = p;
    j["eps0"] = eps0;
    j["theta"] = theta;
    j["tol"] = tol;
    j["s_star"] = s_star;
    j["samples"] = samples;
    j["seed"] = seed;
    return j;
}

const std::vector<std::string>& commands() {
    static const std::vector<std::string> c{"modes",    "obstruction", "conormal",   "gram",        "deform-op",
                                            "bg-check", "decay",       "nash-moser", "continuation"};
    return c;
}

const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> k{"experiment", "N",  "R",      "R0",      "l_min", "l_max", "p",     "eps0",
                                            "theta",      "tol", "s_star", "samples", "seed",  "out",   "assert"};
    return k;
}

ExperimentConfig default_config(const std::string& experiment) {
    ExperimentConfig c;
    c.experiment = experiment;
    if (experiment == "modes") {
        c.N = 128;
    } else if (experiment == "obstruction") {
        c.N = 64, c.R = 12.0, c.l_max = 8, c.tol = 0.01, c.seed = 3;
    } else if (experiment == "conormal") {
        c.R = 16.0, c.l_min = 8, c.l_max = 256, c.tol = 0.05;
    } else if (experiment == "gram") {
        c.N = 64, c.R = 30.0, c.tol = 2.0;
    } else if (experiment == "deform-op") {
        c.N = 512, c.samples = 20, c.seed = 2024, c.tol = 0.1;
    } else if (experiment == "bg-check") {
        c.l_min = 8, c.l_max = 128, c.tol = 0.2;
    } else if (experiment == "decay") {
        c.l_min = 4, c.l_max = 64, c.samples = 1000, c.seed = 2024, c.tol = 0.2;
    } else if (experiment == "nash-moser") {
        c.N = 128;
    } else if (experiment == "continuation") {
        c.N = 12, c.seed = 9;
    } else {
        throw ConfigError("unknown experiment '" + experiment + "'; expected one of: " +
                              join(suggestions(experiment, commands())),
                          0, "experiment");
    }
    return c;
}

void validate(const ExperimentConfig& c) {
    const auto& e = c.experiment;
    require(c.N >= 0, "N", "must be non-negative, got " + std::to_string(c.N));
    require(c.tol > 0.0, "tol", "must be positive");
    require(c.R > 0.0, "R", "must be positive");
    require(c.R0 > 0.0, "R0", "must be positive");
    require(c.eps0 > 0.0, "eps0", "must be positive");
    require(c.theta > 1.0, "theta", "must exceed 1");
    require(c.samples >= 0, "samples", "must be non-negative");
    require(c.l_min <= c.l_max, "l_min", "must not exceed l_max");
    if (e != "obstruction") require(c.l_min >= 1, "l_min", "the mode range must exclude 0");
    if (e == "modes") require(c.N >= 2 * c.l_max + 1, "N", "the t-grid needs at least 2 l_max + 1 points");
    if (e == "obstruction") {
        require(c.l_min >= 0, "l_min", "must be non-negative");
        require(c.N >= 2 * c.l_max + 1, "N", "the t-grid needs at least 2 l_max + 1 points");
    }
    if (e == "conormal") require(c.p > -1.0, "p", "must exceed -1 for the pairing to converge");
    if (e == "gram") require(c.N >= 4, "N", "needs at least 4 modes");
    if (e == "deform-op") require(c.N >= 64, "N", "needs N >= 64 (Fredholm truncations N/8, N/4, N/2)");
    if (e == "bg-check") require(c.R0 < c.R, "R0", "the cutoff radius must be below R");
    if (e == "nash-moser") require(c.N >= 8, "N", "needs N >= 8");
    if (e == "continuation") {
        require(c.N >= 4, "N", "needs N >= 4");
        require(c.s_star > 0.0 && c.s_star < 1.0, "s_star", "must lie in (0, 1)");
    }
}

ExperimentConfig parse_config(const std::string& text, const std::string& experiment) {
    std::vector<std::pair<int, std::pair<std::string, std::string>>> entries;
    std::map<std::string, int> seen;
    std::string name = experiment;
    std::istringstream in(text);
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const auto hash = raw.find('#');
        const std::string body = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos) throw ConfigError(where(line) + "expected key = value, got '" + body + "'", line);
        const std::string key = trim(body.substr(0, eq));
        const std::string value = trim(body.substr(eq + 1));
        const auto& keys = config_keys();
        if (std::find(keys.begin(), keys.end(), key) == keys.end())
            throw ConfigError(where(line) + "unknown key '" + key + "'; did you mean: " + join(suggestions(key, keys)),
                              line, key);
        if (seen.count(key))
            throw ConfigError(where(line) + key + ": duplicate key (first set on line " + std::to_string(seen[key]) + ")",
                              line, key);
        if (value.empty()) throw ConfigError(where(line) + key + ": missing value", line, key);
        seen[key] = line;
        if (key == "experiment") {
            if (!experiment.empty() && value != experiment)
                throw ConfigError(where(line) + "experiment: file names '" + value + "' but the command is '" +
                                      experiment + "'",
                                  line, key);
            name = value;
        } else {
            entries.push_back({line, {key, value}});
        }
    }
    if (name.empty()) throw ConfigError("experiment: not given on the command line or in the file", 0, "experiment");
    ExperimentConfig cfg = default_config(name);
    for (const auto& [l, kv] : entries) apply(cfg, kv.first, kv.second, l);
    try {
        validate(cfg);
    } catch (const ConfigError& err) {
        const auto it = seen.find(err.key());
        if (it == seen.end()) throw;
        throw ConfigError(where(it->second) + err.what(), it->second, err.key());
    }
    return cfg;
}

ExperimentConfig validate_config(const std::filesystem::path& path, const std::string& experiment) {
    if (!std::filesystem::exists(path)) throw ConfigError("config file not found: " + path.string());
    return parse_config(io::read_file(path), experiment);
}

bool ExperimentResult::pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

std::vector<std::string> ExperimentResult::failures() const {
    std::vector<std::string> out;
    for (const auto& c : checks)
        if (!c.pass) out.push_back(c.name);
    return out;
}

void ExperimentResult::check(const std::string& name, bool ok, double value, double target) {
    checks.push_back({name, ok, value, target});
}

nlohmann::ordered_json ExperimentResult::summary(const ExperimentConfig& cfg) const {
    nlohmann::ordered_json j;
    j["experiment"] = experiment;
    j["paper_anchor"] = anchor;
    j["pass"] = pass();
    j["metrics"] = metrics;
    auto checks_json = nlohmann::ordered_json::array();
    for (const auto& c : checks) {
        nlohmann::ordered_json cj;
        cj["name"] = c.name;
        cj["pass"] = c.pass;
        // JSON has no infinities; non-finite values are written as strings.
        if (std::isfinite(c.value)) cj["value"] = c.value;
        else cj["value"] = io::format_double(c.value);
        cj["target"] = c.target;
        checks_json.push_back(cj);
    }
    j["checks"] = checks_json;
    j["failures"] = failures();
    j["config"] = cfg.to_json();
    return j;
}

void write_artifacts(const ExperimentResult& result, const ExperimentConfig& cfg, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    io::write_atomic(dir / "results.csv", result.csv);
    io::write_atomic(dir / "summary.json", result.summary(cfg).dump(2) + "\n");
    if (result.plot) io::write_atomic(dir / "plot.svg", svg::render(*result.plot));
}

int run(int argc, char** argv) {
    CLI::App app{"edgelab: flat-model experiments for harmonic spinors with edge singularities"};
    std::string command, config_path, out_dir;
    std::optional<std::uint64_t> seed;
    bool no_assert = false, force_assert = false;
    app.add_option("command", command, "Experiment to run")->required()->check(CLI::IsMember(commands()));
    app.add_option("--config", config_path, "Flat key=value configuration file");
    app.add_option("--out", out_dir, "Output directory");
    app.add_option("--seed", seed, "Seed for randomized suites");
    auto* a = app.add_flag("--assert", force_assert, "Exit 1 when a check fails (default)");
    app.add_flag("--no-assert", no_assert, "Always exit 0 after writing the artifacts")->excludes(a);
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    ExperimentConfig cfg;
    try {
        cfg = config_path.empty() ? default_config(command) : validate_config(config_path, command);
        if (seed) cfg.seed = *seed;
        if (!out_dir.empty()) cfg.out = out_dir;
        if (no_assert) cfg.assert_checks = false;
        if (force_assert) cfg.assert_checks = true;
        validate(cfg);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }

    ExperimentResult result;
    try {
        result = run_experiment(cfg);
        write_artifacts(result, cfg, cfg.out);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }

    for (const auto& c : result.checks)
        std::cout << (c.pass ? "ok   " : "FAIL ") << c.name << " value=" << io::format_double(c.value)
                  << " target=" << io::format_double(c.target) << "\n";
    std::cout << cfg.experiment << ": " << (result.pass() ? "pass" : "fail") << " -> " << cfg.out << "\n";
    if (!result.pass() && cfg.assert_checks) {
        nlohmann::json failures = result.failures();
        std::cerr << "{\"failures\":" << failures.dump() << "}\n";
        return 1;
    }
    return 0;
}

}  // namespace edgelab::cli
