#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "delaybif_cli/config.hpp"
#include "delaybif_cli/run.hpp"

int main(int argc, char** argv) {
    using namespace delaybif::cli;

    CLI::App app{"Equilibrium, Hopf and limit-cycle bifurcation analysis of the delayed swing equation"};
    app.require_subcommand(1);
    std::string config_path;
    std::optional<std::string> out_dir;
    std::optional<std::uint64_t> seed;
    for (const std::string& name : subcommands()) {
        CLI::App* sub = app.add_subcommand(name, "run the " + name + " job of a config file");
        sub->add_option("--config", config_path, "JSON run configuration")->required();
        sub->add_option("--out", out_dir, "output directory (overrides the config)");
        sub->add_option("--seed", seed, "random seed (overrides the config)");
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitInvalid;
    }
    const std::string name = app.get_subcommands().front()->get_name();

    RunConfig cfg;
    try {
        cfg = load_config(config_path);
    } catch (const ConfigError& e) {
        std::cerr << "invalid configuration: " << e.what() << "\n";
        return kExitInvalid;
    }
    if (job_name(cfg.job) != name) {
        std::cerr << "invalid configuration: the config describes '" << job_name(cfg.job) << "', not '" << name
                  << "'\n";
        return kExitInvalid;
    }
    if (seed) cfg.seed = *seed;
    std::filesystem::path out = out_dir ? std::filesystem::path(*out_dir)
                                        : cfg.output.value_or(std::filesystem::path("delaybif-out"));
    return run(cfg, out, std::cerr);
}
