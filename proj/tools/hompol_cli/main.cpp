#include <CLI11.hpp>

#include <iostream>
#include <thread>

#include "hompol/hompol.hpp"
#include "hompol_cli/commands.hpp"

int main(int argc, char **argv) {
    using namespace hompol::cli;

    CLI::App app{"Four-photon polarization interferometry: probabilities, Fisher "
                 "information, simulated counts and fits"};
    app.set_version_flag("--version", std::string(hompol::kVersion));
    app.require_subcommand(1);

    RunOptions options;
    options.threads = std::max(1U, std::thread::hardware_concurrency());
    std::uint64_t seed = 0;

    const std::vector<std::pair<std::string, std::string>> descriptions{
        {"probmap", "outcome probabilities over (phi, delta_z) plus fixed-delta_z cuts"},
        {"fisher-scan", "Fisher information over (phi, delta_z) plus cuts and a summary"},
        {"hom-dip", "simulate or read a two-photon HOM dip and fit its visibility"},
        {"simulate", "simulate four-fold counts into a CountsDataset"},
        {"fit", "fit path difference and background to a CountsDataset"},
        {"mc-band", "fit a CountsDataset and bootstrap a Fisher information band"},
    };
    std::vector<CLI::Option *> seed_options;
    for (const auto &[name, help] : descriptions) {
        auto *sub = app.add_subcommand(name, help);
        sub->add_option("--config", options.config, "JSON run configuration")->required();
        sub->add_option("--out", options.out_dir, "output directory")
            ->capture_default_str();
        seed_options.push_back(
            sub->add_option("--seed", seed, "RNG seed, overrides the config value"));
        sub->add_option("--threads", options.threads, "worker threads")
            ->capture_default_str()
            ->check(CLI::PositiveNumber);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    for (auto *sub : app.get_subcommands()) {
        options.command = sub->get_name();
    }
    for (auto *opt : seed_options) {
        if (opt->count() > 0) {
            options.seed = seed;
        }
    }
    return run(options, std::cout, std::cerr);
}
