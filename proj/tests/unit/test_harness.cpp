#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "disscalc/harness.hpp"
#include "disscalc/prng.hpp"
#include "support.hpp"

using namespace disscalc;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("disscalc_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string body_lines(const fs::path& path) {
    const auto text = slurp(path);
    return text.substr(text.find('\n') + 1);
}

ExperimentConfig small_identity(bool same_pair) {
    auto c = default_config("identity-check");
    c.dims = {3};
    c.truncations = {64, 128};
    c.trials = 1;
    c.same_pair = same_pair;
    validate(c);
    return c;
}

std::string expect_field_error(const json& j) {
    try {
        parse_config(j);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::ConfigInvalid);
        return e.what();
    }
    FAIL("config accepted: " << j.dump());
    return {};
}

int run_cli(const std::string& args, const fs::path& err_file) {
    const std::string cmd = std::string(DISSCALC_CLI_PATH) + " " + args + " >/dev/null 2>" + err_file.string();
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

}  // namespace

TEST_CASE("every experiment has a valid default config") {
    for (const auto& name : experiment_names()) {
        const auto c = default_config(name);
        CHECK_NOTHROW(validate(c));
        CHECK(c.experiment == name);
        CHECK(trial_count(c) > 0);
        CHECK(config_hash(c).size() == 64);
    }
    CHECK(config_hash(default_config("window-check")) == config_hash(default_config("window-check")));
    CHECK(config_hash(default_config("window-check")) != config_hash(default_config("cardinal-check")));
}

TEST_CASE("config diagnostics name the field") {
    CHECK(expect_field_error({{"experiment", "window-check"}, {"bogus", 1}}).find("bogus") != std::string::npos);
    CHECK(expect_field_error({{"experiment", "p-sweep"}, {"p", {0.5}}}).find("'p'") != std::string::npos);
    CHECK(expect_field_error({{"experiment", "identity-check"}, {"truncations", {100}}}).find("'truncations'") !=
          std::string::npos);
    CHECK(expect_field_error({{"experiment", "bound-check"}, {"trials", 0}}).find("'trials'") != std::string::npos);
    CHECK(expect_field_error({{"experiment", "nope"}}).find("'experiment'") != std::string::npos);
    CHECK(expect_field_error({{"experiment", "lipschitz-sweep"},
                              {"functions", {{{"terms", {{{"re", 1}, {"im", 0}, {"a", -1}, {"b", 0}}}}}}}})
              .find("functions") != std::string::npos);
}

TEST_CASE("config round trip through the canonical form") {
    const auto c = default_config("lipschitz-sweep");
    const auto again = parse_config(c.to_json());
    CHECK(config_hash(again) == config_hash(c));
    auto ps = default_config("p-sweep");
    CHECK(parse_config(ps.to_json()).p.front() == std::numeric_limits<double>::infinity());
}

TEST_CASE("window check passes") {
    const auto result = run(default_config("window-check"));
    REQUIRE(result.records.size() == 1);
    CHECK(result.pass);
    CHECK(result.records[0]["metrics"]["partition_max_dev"].get<double>() <= 1e-12);
}

TEST_CASE("besov-norm record of the r = 2 exponential") {
    const auto rec = besov_norm_record(ExpSum2D::exponential(1.0, 2.0, 0.0), SupMode::coef_sum());
    CHECK(std::abs(rec["norm_inhomogeneous"].get<double>() - 2.0) <= 1e-12);
    CHECK(rec["sigma"].get<double>() == 2.0);
}

TEST_CASE("identity check with equal pairs") {
    const auto result = run(small_identity(true));
    CHECK(result.pass);
    for (const auto& rec : result.records) {
        for (const auto& row : rec["truncations"]) CHECK(row["residual_s2"].get<double>() <= 1e-12);
    }
}

TEST_CASE("records are deterministic across thread counts and replay cleanly") {
    auto c = default_config("bound-check");
    c.trials = 6;
    const auto dir1 = scratch_dir("det1");
    const auto dir2 = scratch_dir("det2");
    const auto p1 = write_outputs(run(c, 1), c, dir1);
    const auto p2 = write_outputs(run(c, 2), c, dir2);
    CHECK(body_lines(p1) == body_lines(p2));
    CHECK(fs::exists(dir1 / "bound-check_summary.csv"));

    const auto report = replay(p1, 2);
    CHECK(report.ok());
    CHECK(report.divergences == 0);
    CHECK(report.records == 6);

    // Tamper with one numeric field of the third record.
    auto [header, records] = read_records(p1);
    records[2]["metrics"]["minimal_constant_p2"] = records[2]["metrics"]["minimal_constant_p2"].get<double>() * 1.0000001;
    const auto tampered = dir1 / "tampered.jsonl";
    {
        std::ofstream out(tampered);
        out << header.dump() << '\n';
        for (const auto& r : records) out << r.dump() << '\n';
    }
    const auto bad = replay(tampered);
    CHECK_FALSE(bad.ok());
    CHECK(bad.divergences == 1);
    CHECK(bad.first_trial == 2);
    CHECK(bad.first_field == "metrics.minimal_constant_p2");

    // Records from another generator version are reported, not re-run.
    header["prng_version"] = "philox4x32-10/u53/box-muller/v0";
    const auto foreign = dir1 / "foreign.jsonl";
    {
        std::ofstream out(foreign);
        out << header.dump() << '\n';
        for (const auto& r : read_records(p1).second) out << r.dump() << '\n';
    }
    const auto mismatch = replay(foreign);
    CHECK(mismatch.version_mismatch);
    CHECK_FALSE(mismatch.ok());
    CHECK(mismatch.mismatch_detail.find("prng_version") != std::string::npos);
    fs::remove_all(dir1);
    fs::remove_all(dir2);
}

TEST_CASE("first divergence names dotted paths") {
    const json a{{"x", 1}, {"y", {{"z", {1.0, 2.0}}}}};
    json b = a;
    CHECK_FALSE(first_divergence(a, b).has_value());
    b["y"]["z"][1] = 2.5;
    CHECK(first_divergence(a, b) == "y.z.1");
}

TEST_CASE("CLI exit codes and error lines") {
    const auto dir = scratch_dir("cli");
    const auto err = dir / "stderr.txt";
    CHECK(run_cli("window-check --out " + dir.string(), err) == 0);
    CHECK(fs::exists(dir / "window-check.jsonl"));

    {
        std::ofstream cfg(dir / "bad.json");
        cfg << R"({"experiment":"lipschitz-sweep","p":[0.3]})";
    }
    CHECK(run_cli("lipschitz-sweep --config " + (dir / "bad.json").string(), err) == 2);
    const auto line = slurp(err);
    CHECK(std::count(line.begin(), line.end(), '\n') == 1);
    const auto parsed = json::parse(line);
    CHECK(parsed["error"] == "ConfigInvalid");
    CHECK(parsed["message"].get<std::string>().find("'p'") != std::string::npos);

    CHECK(run_cli("no-such-command", err) == 2);
    CHECK(json::parse(slurp(err)).contains("error"));
    CHECK(run_cli("replay " + (dir / "missing.jsonl").string(), err) == 2);

    // A run whose assertions fail exits 1: an unreachable ratio ceiling.
    {
        std::ofstream cfg(dir / "strict.json");
        cfg << R"({"experiment":"lipschitz-sweep","trials":2,"ratio_ceiling":1e-9})";
    }
    CHECK(run_cli("lipschitz-sweep --config " + (dir / "strict.json").string() + " --out " + dir.string(), err) == 1);
    fs::remove_all(dir);
}
