#pragma once

#include "mbloch/config.hpp"
#include "mbloch/diagnostics.hpp"
#include "mbloch/poincare.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>

namespace mbloch {

/// Process exit codes; a stable contract for scripts.
enum ExitCode : int {
    kExitOk = 0,
    kExitCheckFailed = 1,
    kExitConfigError = 2,
    kExitNumericalError = 3,
};

struct CommandContext {
    RunConfig config;
    std::filesystem::path out_dir;
    std::size_t workers = 1;
    std::ostream* out = nullptr;  ///< terse pass/fail table
};

[[nodiscard]] int cmd_simulate(const CommandContext& ctx);
[[nodiscard]] int cmd_find_periodic(const CommandContext& ctx);
[[nodiscard]] int cmd_sweep(const CommandContext& ctx);
[[nodiscard]] int cmd_verify(const CommandContext& ctx);
[[nodiscard]] int cmd_rabi(const CommandContext& ctx);

/// Full command line: subcommand plus --config/--out/--workers/--set. Errors are
/// reported on `err` and mapped to ExitCode.
[[nodiscard]] int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

// JSON renderings used in the result documents

[[nodiscard]] Json to_json(const Check& check);
[[nodiscard]] Json to_json(const VerificationReport& report);
[[nodiscard]] Json to_json(const ReducedState& y);
[[nodiscard]] Json to_json(const FixedPointResult& result);
[[nodiscard]] Json to_json(const PeriodicSearch& search);
[[nodiscard]] Json to_json(const Branch& branch);

/// {command, config, result, digest}; the digest is SHA-256 over the compact dump of the other three.
[[nodiscard]] Json make_document(const std::string& command, const Json& config, const Json& result);
void write_document(const std::filesystem::path& path, const Json& doc);

}  // namespace mbloch
