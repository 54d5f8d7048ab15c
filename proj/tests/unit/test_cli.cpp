#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "edgelab/cli.hpp"
#include "edgelab/io.hpp"
#include "edgelab/svg.hpp"

using namespace edgelab;
using namespace edgelab::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const auto p = fs::temp_directory_path() / ("edgelab_test_cli_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

int run_args(std::vector<std::string> args) {
    args.insert(args.begin(), "edgelab");
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    return run(int(argv.size()), argv.data());
}

std::string error_of(const std::string& text, const std::string& experiment = "modes") {
    try {
        parse_config(text, experiment);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return {};
}

}  // namespace

TEST_CASE("empty config gives the defaults") {
    for (const auto& c : commands()) {
        const auto cfg = parse_config("", c);
        const auto def = default_config(c);
        CHECK(cfg.to_json() == def.to_json());
        CHECK_NOTHROW(validate(cfg));
    }
    const auto cfg = parse_config("# comment only\n\n   \n", "gram");
    CHECK(cfg.N == 64);
}

TEST_CASE("config values are parsed and validated") {
    const auto cfg = parse_config("N = 48\nl_max=16  # trailing comment\ntol = 1e-9\nseed = 12\nassert = false\n", "modes");
    CHECK(cfg.N == 48);
    CHECK(cfg.l_max == 16);
    CHECK(cfg.tol == 1e-9);
    CHECK(cfg.seed == 12);
    CHECK_FALSE(cfg.assert_checks);

    const auto named = parse_config("experiment = conormal\np = 1.5\n");
    CHECK(named.experiment == "conormal");
    CHECK(named.p == 1.5);
}

TEST_CASE("config rejections") {
    CHECK_THROWS_AS(parse_config("N = -4\n", "modes"), ConfigError);
    try {
        parse_config("tol = 1e-8\nN = -4\n", "nash-moser");
        FAIL("accepted N = -4");
    } catch (const ConfigError& e) {
        CHECK(e.key() == "N");
        CHECK(e.line() == 2);
    }

    const auto unknown = error_of("tl = 3\n");
    CHECK(unknown.find("unknown key 'tl'") != std::string::npos);
    CHECK(unknown.find("tol") != std::string::npos);
    // Nothing close: the whole key list is offered.
    const auto far = error_of("zzzzzzzz = 3\n");
    CHECK(far.find("l_max") != std::string::npos);
    CHECK(far.find("seed") != std::string::npos);

    CHECK(error_of("N = 12\nN = 14\n").find("duplicate") != std::string::npos);
    CHECK(error_of("N 12\n").find("line 1") != std::string::npos);
    CHECK(error_of("N = twelve\n").find("integer") != std::string::npos);
    CHECK(error_of("R = 1e400\n").find("finite") != std::string::npos);
    CHECK(error_of("tol = 0\n").find("tol") != std::string::npos);
    CHECK(error_of("l_min = 0\n").find("exclude 0") != std::string::npos);
    CHECK(error_of("l_min = 9\nl_max = 4\n").find("l_min") != std::string::npos);
    CHECK(error_of("N = 32\n").find("2 l_max + 1") != std::string::npos);
    CHECK(error_of("theta = 1\n", "nash-moser").find("theta") != std::string::npos);
    CHECK(error_of("s_star = 1.5\n", "continuation").find("s_star") != std::string::npos);
    CHECK(error_of("experiment = gram\n", "modes").find("command is 'modes'") != std::string::npos);
    CHECK(error_of("p = 1\n", "").find("not given") != std::string::npos);
    CHECK_THROWS_AS(default_config("mode"), ConfigError);
    CHECK(error_of("", "mode").find("modes") != std::string::npos);
}

TEST_CASE("validate_config reads a file") {
    const auto dir = scratch("validate");
    std::ofstream(dir / "c.cfg") << "N = 16\n";
    CHECK(validate_config(dir / "c.cfg", "continuation").N == 16);
    CHECK_THROWS_AS(validate_config(dir / "missing.cfg", "continuation"), ConfigError);
}

TEST_CASE("run writes the artifacts and maps outcomes to exit codes") {
    const auto dir = scratch("run");
    CHECK(run_args({"continuation", "--out", (dir / "a").string()}) == 0);
    for (const char* f : {"results.csv", "summary.json", "plot.svg"}) CHECK(fs::exists(dir / "a" / f));
    for (const auto& e : fs::directory_iterator(dir / "a")) CHECK(e.path().string().find(".tmp.") == std::string::npos);

    const auto summary = nlohmann::json::parse(io::read_file(dir / "a" / "summary.json"));
    CHECK(summary["experiment"].get<std::string>() == "continuation");
    CHECK(summary["paper_anchor"].is_string());
    CHECK_FALSE(summary["paper_anchor"].get<std::string>().empty());
    CHECK(summary["pass"].get<bool>());
    CHECK(summary["metrics"].is_object());
    CHECK(summary["failures"].empty());
    CHECK(io::read_file(dir / "a" / "results.csv").rfind("s,lambda,sigma_min", 0) == 0);

    // A tolerance below rounding makes a check fail.
    std::ofstream(dir / "tight.cfg") << "tol = 1e-30\n";
    CHECK(run_args({"continuation", "--config", (dir / "tight.cfg").string(), "--out", (dir / "b").string()}) == 1);
    const auto failed = nlohmann::json::parse(io::read_file(dir / "b" / "summary.json"));
    CHECK_FALSE(failed["pass"].get<bool>());
    REQUIRE(failed["failures"].size() == 1);
    CHECK(failed["failures"][0].get<std::string>() == "lambda(s) = s_star - s");
    CHECK(run_args({"continuation", "--config", (dir / "tight.cfg").string(), "--out", (dir / "c").string(),
                    "--no-assert"}) == 0);

    std::ofstream(dir / "bad.cfg") << "N = -4\n";
    CHECK(run_args({"continuation", "--config", (dir / "bad.cfg").string(), "--out", (dir / "d").string()}) == 2);
    CHECK_FALSE(fs::exists(dir / "d"));
    CHECK(run_args({"spin", "--out", (dir / "e").string()}) == 2);
    CHECK(run_args({"continuation", "--config", (dir / "none.cfg").string()}) == 2);
    CHECK(run_args({"continuation", "--assert", "--no-assert"}) == 2);
}

TEST_CASE("identical config and seed give byte-identical artifacts") {
    const auto dir = scratch("determinism");
    for (const char* sub : {"x", "y"})
        REQUIRE(run_args({"obstruction", "--seed", "11", "--out", (dir / sub).string()}) == 0);
    for (const char* f : {"results.csv", "summary.json", "plot.svg"})
        CHECK(io::read_file(dir / "x" / f) == io::read_file(dir / "y" / f));
    const auto s = nlohmann::json::parse(io::read_file(dir / "x" / "summary.json"));
    CHECK(s["config"]["seed"].get<int>() == 11);

    REQUIRE(run_args({"obstruction", "--seed", "12", "--out", (dir / "z").string()}) == 0);
    CHECK(io::read_file(dir / "x" / "summary.json") != io::read_file(dir / "z" / "summary.json"));
}

TEST_CASE("io helpers") {
    CHECK(io::format_double(0.1) == "0.1");
    CHECK(io::format_double(-2.5e-300) == "-2.5e-300");
    CHECK(std::stod(io::format_double(1.0 / 3.0)) == 1.0 / 3.0);
    CHECK(io::format_double(INFINITY) == "inf");

    io::CsvTable t({"a", "b"});
    t.add_row({1.0, 0.25});
    CHECK(t.str() == "a,b\n1,0.25\n");
    CHECK(t.rows() == 1);
    CHECK_THROWS_AS(t.add_row({1.0}), std::invalid_argument);

    const auto dir = scratch("io");
    io::write_atomic(dir / "sub" / "f.txt", "one");
    io::write_atomic(dir / "sub" / "f.txt", "two");
    CHECK(io::read_file(dir / "sub" / "f.txt") == "two");
    int files = 0;
    for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir / "sub")) ++files;
    CHECK(files == 1);
}

TEST_CASE("svg rendering") {
    svg::Plot p{"t<1>", "x", "y", true, true, {{"s", {1, 10, 100, -1}, {1, 0.1, 0.0, 5}}}};
    const auto a = svg::render(p);
    CHECK(a == svg::render(p));
    CHECK(a.rfind("<svg", 0) == 0);
    CHECK(a.find("t&lt;1&gt;") != std::string::npos);
    // Only the two points with positive coordinates on both axes survive.
    const auto pts = a.substr(a.find("points=\""));
    CHECK(std::count(pts.begin(), pts.begin() + pts.find("\"/>"), ',') == 2);
    CHECK(a.find("nan") == std::string::npos);

    svg::Plot empty{"e", "x", "y", false, false, {}};
    CHECK(svg::render(empty).find("</svg>") != std::string::npos);
}
