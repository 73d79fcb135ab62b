#pragma once

// Subcommands of the plates CLI. Each takes the parsed config document and
// the global flags and returns the emitted documents; the caller prints or
// writes them.

#include <plates/json_io.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace plates::cli {

struct GlobalFlags {
    std::optional<int> grid;
    std::optional<double> tol;
    std::optional<std::string> regime;
    std::uint64_t seed = 0;
    int jobs = 0;
};

struct OutputFile {
    std::string name;
    std::string contents;
};

struct CommandResult {
    json document;                 // printed to stdout
    std::optional<std::string> text; // printed instead of the document (CSV)
    std::vector<OutputFile> files; // written under --out
    bool ok = true;                // false: exit with the invariant code
};

// Grid, tolerances, regime, seed and code version stamped on every output.
json provenance(const std::string &command, const SolverConfig &config, const GlobalFlags &flags,
                const std::optional<GammaRegime> &regime = std::nullopt);

SolverConfig solver_config(const json &cfg, const GlobalFlags &flags, SolverConfig base = {});
GammaRegime regime(const json &cfg, const GlobalFlags &flags, const std::string &fallback = "small");

CommandResult cmd_effective(const json &cfg, const GlobalFlags &flags);
CommandResult cmd_laminate(const json &cfg, const GlobalFlags &flags);
CommandResult cmd_classify(const json &cfg, const GlobalFlags &flags);
CommandResult cmd_sweep(const json &cfg, const GlobalFlags &flags);
CommandResult cmd_shape(const json &cfg, const GlobalFlags &flags);
CommandResult cmd_surface(const json &cfg, const GlobalFlags &flags);
CommandResult cmd_selftest(const json &cfg, const GlobalFlags &flags);

// Full command line handling; returns the process exit code.
int run(int argc, char **argv);

} // namespace plates::cli
