#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "hoconv/cli/commands.hpp"
#include "hoconv/cli/config.hpp"

using namespace hoconv::cli;

int main(int argc, char** argv) {
    CLI::App app{"Higher-order convolution experiments on binary glider textures"};
    app.set_version_flag("--version", std::string(kToolVersion));
    app.require_subcommand(1);

    std::optional<std::string> config_path, out, seeds;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
    bool quiet = false;

    const std::pair<const char*, const char*> commands[] = {
        {"gen", "Generate train/val/test texture datasets (HOTX)"},
        {"train", "Train one model kind over a list of seeds"},
        {"eval", "Evaluate a checkpoint and write its confusion matrix"},
        {"pca-tied", "Tied-weight PCA over random initializations"},
        {"rsa", "RDMs, comparison maps and cross-layer correlations"},
        {"perturb", "Accuracy under texture perturbations"},
        {"flops", "Analytic FLOP and parameter counts per order"},
    };
    for (const auto& [name, help] : commands) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("--config", config_path, "JSON config file");
        sub->add_option("--out", out, "Output directory");
        sub->add_option("--seed", seed, "Base seed");
        sub->add_option("--seeds", seeds, "Seed list (a,b,c) or count N meaning seed..seed+N-1");
        sub->add_option("--threads", threads, "Worker threads (default: HOCONV_THREADS or 1)");
        sub->add_flag("--quiet", quiet, "Suppress progress messages");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitConfig;
    }

    const std::string command = app.get_subcommands().front()->get_name();
    try {
        FlagOverrides flags{out, seed, seeds};
        const auto cfg = ExperimentConfig::load(command, config_path, flags);
        RunContext ctx{resolve_threads(threads), quiet ? nullptr : &std::cerr};
        const auto result = run_command(cfg, ctx);
        return result.code;
    } catch (...) {
        std::string message;
        const int code = exit_code_for_current_exception(message);
        std::cerr << "hoconv " << command << ": " << message << "\n";
        return code;
    }
}
