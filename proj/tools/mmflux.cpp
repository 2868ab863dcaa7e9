#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "mmflux/cli.hpp"
#include "mmflux/errors.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Finite-volume experiments for conservation laws with monotone-graph nonlinearities"};
    app.require_subcommand(1);
    std::string config_path;
    std::string out_dir;
    bool quiet = false;
    for (const auto& name : mmflux::command_names()) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "JSON config file")->required();
        sub->add_option("--out", out_dir, "output directory (overrides the config)");
        sub->add_flag("--quiet", quiet, "suppress progress messages");
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : mmflux::kExitConfig;
    }
    const std::string name = app.get_subcommands().front()->get_name();

    mmflux::RunConfig config;
    try {
        config = mmflux::load_config(config_path);
    } catch (const mmflux::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return mmflux::kExitConfig;
    }
    mmflux::CommandContext ctx;
    ctx.out = out_dir.empty() ? config.output : out_dir;
    ctx.log = &std::cout;
    ctx.quiet = quiet;
    return mmflux::run_command(name, config, ctx, std::cerr);
}
