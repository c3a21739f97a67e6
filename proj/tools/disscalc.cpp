// disscalc command-line driver.
//
//   disscalc <experiment> [--config cfg.json] [--threads K] [--out dir]
//   disscalc besov-norm --function f.json --mode {coef_sum,grid} [--grid-res N]
//   disscalc replay records.jsonl [--threads K]
//
// Exit codes: 0 all assertions pass, 1 an assertion failed (or replay
// diverged), 2 invalid input. Failures print one JSON line on stderr.

#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "disscalc/harness.hpp"

namespace {

using nlohmann::json;

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitInvalid = 2;

int report_error(const std::string& kind, const std::string& message) {
    std::cerr << json{{"error", kind}, {"message", message}}.dump() << '\n';
    return kExitInvalid;
}

struct ExperimentArgs {
    std::string config_path;
    std::string out_dir;
    std::string variant;
    int threads = 1;
};

disscalc::ExperimentConfig make_config(const std::string& experiment, const ExperimentArgs& args) {
    if (args.config_path.empty()) {
        auto config = disscalc::default_config(experiment);
        if (!args.variant.empty()) config.variant = args.variant;
        disscalc::validate(config);
        return config;
    }
    std::ifstream in(args.config_path);
    if (!in) throw disscalc::Error(disscalc::ErrorKind::ConfigInvalid, "cannot open config file " + args.config_path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw disscalc::Error(disscalc::ErrorKind::ConfigInvalid, std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw disscalc::Error(disscalc::ErrorKind::ConfigInvalid, "field '<root>': config must be a JSON object");
    if (!j.contains("experiment")) j["experiment"] = experiment;
    if (j["experiment"] != experiment) {
        throw disscalc::Error(disscalc::ErrorKind::ConfigInvalid,
                              "field 'experiment': config is for '" + j["experiment"].dump() +
                                  "' but the command is '" + experiment + "'");
    }
    if (!args.variant.empty()) j["variant"] = args.variant;
    return disscalc::parse_config(j, std::filesystem::path(args.config_path).parent_path());
}

int run_experiment(const std::string& experiment, const ExperimentArgs& args) {
    const auto config = make_config(experiment, args);
    const auto result = disscalc::run(config, args.threads);
    const std::filesystem::path dir = args.out_dir.empty() ? config.output : args.out_dir;
    const auto path = disscalc::write_outputs(result, config, dir);
    std::size_t failed = 0;
    for (const auto& r : result.records) failed += r["pass"].get<bool>() ? 0 : 1;
    json line{{"experiment", experiment},
              {"pass", result.pass},
              {"records", result.records.size()},
              {"failed_records", failed},
              {"run_failures", result.run_failures},
              {"output", path.string()}};
    std::cout << line.dump() << '\n';
    return result.pass ? kExitPass : kExitFail;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Functional calculus and perturbation experiments for dissipative matrices"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(disscalc::kLibraryVersion));

    std::map<std::string, ExperimentArgs> experiment_args;
    std::map<std::string, CLI::App*> experiment_cmds;
    std::string function_path;
    std::string mode = "coef_sum";
    int grid_res = 4096;
    for (const auto& name : disscalc::experiment_names()) {
        auto* cmd = app.add_subcommand(name, "Run the " + name + " experiment");
        auto& a = experiment_args[name];
        cmd->add_option("--config", a.config_path, "Experiment config (JSON)");
        cmd->add_option("--threads", a.threads, "Worker threads")->check(CLI::PositiveNumber);
        cmd->add_option("--out", a.out_dir, "Output directory (default: config 'output' or .)");
        if (name == "identity-check") {
            cmd->add_option("--variant", a.variant, "first | second | ab12 | ba21")
                ->check(CLI::IsMember({"first", "second", "ab12", "ba21"}));
        }
        if (name == "besov-norm") {
            cmd->add_option("--function", function_path, "Function spec file; prints one record to stdout");
            cmd->add_option("--mode", mode, "Sup-norm mode")->check(CLI::IsMember({"coef_sum", "grid"}));
            cmd->add_option("--grid-res", grid_res, "Grid mode: maximal resolution")->check(CLI::PositiveNumber);
        }
        experiment_cmds[name] = cmd;
    }
    std::string records_path;
    int replay_threads = 1;
    auto* replay_cmd = app.add_subcommand("replay", "Re-execute a JSON-lines record file and compare bit-exactly");
    replay_cmd->add_option("records", records_path, "Records file (.jsonl)")->required();
    replay_cmd->add_option("--threads", replay_threads, "Worker threads")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return report_error("InvalidInput", e.what());
    }

    try {
        if (replay_cmd->parsed()) {
            const auto report = disscalc::replay(records_path, replay_threads);
            std::cout << report.to_json().dump() << '\n';
            if (report.version_mismatch) {
                std::cerr << json{{"error", "VersionMismatch"}, {"message", report.mismatch_detail}}.dump() << '\n';
            }
            return report.ok() ? kExitPass : kExitFail;
        }
        for (const auto& [name, cmd] : experiment_cmds) {
            if (!cmd->parsed()) continue;
            if (name == "besov-norm" && !function_path.empty()) {
                const auto f = disscalc::load_function(function_path);
                const auto sup = mode == "grid" ? disscalc::SupMode::grid(grid_res) : disscalc::SupMode::coef_sum();
                std::cout << disscalc::besov_norm_record(f, sup).dump() << '\n';
                return kExitPass;
            }
            return run_experiment(name, experiment_args[name]);
        }
    } catch (const disscalc::Error& e) {
        return report_error(std::string(disscalc::to_string(e.kind())), e.what());
    } catch (const std::exception& e) {
        return report_error("InvalidInput", e.what());
    }
    return kExitInvalid;
}
