#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <sstream>

#include "consfd/cli.hpp"

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw consfd::cli::ConfigError("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int run_with_config(const std::string& config_path, const std::vector<std::string>& extras,
                    const std::string& forced_mode) {
    nlohmann::ordered_json root = nlohmann::ordered_json::parse(slurp(config_path));
    for (const std::string& raw : extras) {
        std::string arg = raw;
        if (arg.rfind("--", 0) == 0) arg = arg.substr(2);
        consfd::cli::apply_override(root, arg);
    }
    consfd::cli::Experiment exp = consfd::cli::parse_config(root.dump(), forced_mode);
    return consfd::cli::run_experiment(exp, std::cout);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Conservative finite difference schemes via conservation law multipliers"};
    app.require_subcommand(1);

    auto* list = app.add_subcommand("list-problems", "List built-in problems and defaults");

    std::string config_path;
    std::string identity_problem;
    std::string identity_out = "out";

    auto add_config_sub = [&](const char* name, const char* help) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("config", config_path, "experiment config (JSON)")->required();
        sub->allow_extras();  // dotted-path overrides, e.g. --solver.residual_tol=1e-13
        return sub;
    };
    auto* run = add_config_sub("run", "Integrate and write conservation reports");
    auto* conv = add_config_sub("convergence", "Solution convergence study");
    auto* cons = add_config_sub("consistency", "Residual consistency-order study");
    auto* dive = add_config_sub("divergence", "Per-step discrete divergence check");

    auto* iden = app.add_subcommand("identity", "Continuous multiplier-identity suite");
    iden->add_option("--problem", identity_problem, "restrict to one problem");
    iden->add_option("--out", identity_out, "output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (list->parsed()) return consfd::cli::list_problems(std::cout);
        if (iden->parsed()) return consfd::cli::run_identity(identity_problem, identity_out, std::cout);
        for (auto* sub : {run, conv, cons, dive}) {
            if (sub->parsed())
                return run_with_config(config_path, sub->remaining(), sub->get_name());
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
