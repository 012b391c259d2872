#pragma once

// Subcommands behind the kswarm executable. Each returns a process exit
// code and reports to the given streams.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace kswarm {

struct CommandOptions {
    std::string config_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed;  // overrides both field.seed and run.seed
    std::optional<bool> parallel;
    std::vector<double> factors;  // sweep; empty uses the config's list
    std::optional<double> budget;  // tune-epsilon; default from config or 500
};

enum ExitCode : int { kOk = 0, kFailure = 1, kBadConfig = 2, kDiverged = 3 };

int cmd_synth_field(const CommandOptions& opt, std::ostream& out, std::ostream& err);
int cmd_run(const CommandOptions& opt, std::ostream& out, std::ostream& err);
int cmd_sweep(const CommandOptions& opt, std::ostream& out, std::ostream& err);
int cmd_tune_epsilon(const CommandOptions& opt, std::ostream& out, std::ostream& err);
int cmd_pe_check(const CommandOptions& opt, std::ostream& out, std::ostream& err);

}  // namespace kswarm
