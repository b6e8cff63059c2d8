#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include <nlohmann/json.hpp>

#include "hoconv/cli/config.hpp"

namespace hoconv::cli {

/// Process exit codes.
enum ExitCode : int {
    kExitOk = 0,
    kExitConfig = 2,
    kExitIo = 3,
    kExitDivergence = 4,
};

struct RunContext {
    int threads = 1;
    std::ostream* log = nullptr;  // progress messages; may be null
};

/// Every command writes its artifacts under cfg.out_dir() and returns the
/// summary record it wrote. Each returns an exit code through `code`.
struct CommandResult {
    nlohmann::json summary;
    int code = kExitOk;
};

CommandResult cmd_gen(const ExperimentConfig& cfg, const RunContext& ctx);
CommandResult cmd_train(const ExperimentConfig& cfg, const RunContext& ctx);
CommandResult cmd_eval(const ExperimentConfig& cfg, const RunContext& ctx);
CommandResult cmd_pca_tied(const ExperimentConfig& cfg, const RunContext& ctx);
CommandResult cmd_rsa(const ExperimentConfig& cfg, const RunContext& ctx);
CommandResult cmd_perturb(const ExperimentConfig& cfg, const RunContext& ctx);
CommandResult cmd_flops(const ExperimentConfig& cfg, const RunContext& ctx);

/// Dispatches on cfg.command().
CommandResult run_command(const ExperimentConfig& cfg, const RunContext& ctx);

/// Maps an in-flight exception to an exit code and message (call inside a
/// catch block).
int exit_code_for_current_exception(std::string& message);

/// Location of a trained checkpoint inside a train output directory.
std::string checkpoint_relpath(const std::string& model, std::uint64_t seed);

}  // namespace hoconv::cli
